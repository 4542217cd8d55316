#include "metaradon/reconstruction.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "fft.hpp"
#include "metaradon/error.hpp"
#include "metaradon/parallel.hpp"
#include "metaradon/rng.hpp"

namespace metaradon {

void SartConfig::validate() const {
  require(n_iterations >= 1, "SART needs n_iterations >= 1");
  require(relaxation > 0.0 && relaxation < 2.0, "SART relaxation must lie in (0, 2)");
  for (int it : snapshot_iters) require(it >= 1, "snapshot iterations are 1-based");
}

double residual_norm(const ImageGrid& x, const Sinogram& b) {
  const Sinogram ax = forward_apply(x, b.geometry());
  double s = 0.0;
  auto p = ax.data();
  auto q = b.data();
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - q[i]) * (p[i] - q[i]);
  return std::sqrt(s);
}

namespace {

constexpr double kGuard = 1e-12;

int count_outside_support(const ProjectionGeometry& g) {
  const double radius = g.n_detectors * g.bin_spacing() / 2.0;
  int n = 0;
  for (int r = 0; r < g.image_h; ++r)
    for (int c = 0; c < g.image_w; ++c) {
      const double x = c + 0.5 - g.image_w / 2.0;
      const double y = g.image_h / 2.0 - (r + 0.5);
      if (x * x + y * y > radius * radius) ++n;
    }
  return n;
}

}  // namespace

SartResult sart(const Sinogram& sino, const SartConfig& cfg) {
  cfg.validate();
  if (!sino.all_finite()) fail(ErrorKind::Data, "sinogram contains NaN or infinite values");
  const auto t0 = std::chrono::steady_clock::now();
  const ProjectionGeometry& g = sino.geometry();
  const int na = g.n_angles();
  const int nd = g.n_detectors;
  const std::size_t npix = static_cast<std::size_t>(g.image_w) * g.image_h;

  // Per-angle row sums R = A_t 1 and column sums C = A_t^T 1.
  const ImageGrid ones(g.image_w, g.image_h, 1.0, g.pixel_pitch);
  std::vector<double> row_sums(static_cast<std::size_t>(na) * nd);
  std::vector<double> col_sums(static_cast<std::size_t>(na) * npix, 0.0);
  parallel_for(static_cast<std::size_t>(na), [&](std::size_t a) {
    forward_angle(ones, g, static_cast<int>(a),
                  std::span<double>(row_sums.data() + a * nd, static_cast<std::size_t>(nd)));
  });
  {
    const std::vector<double> unit(static_cast<std::size_t>(nd), 1.0);
    for (int a = 0; a < na; ++a)
      adjoint_angle(unit, g, a, std::span<double>(col_sums.data() + a * npix, npix));
  }

  SartResult result{ImageGrid(g.image_w, g.image_h, 0.0, g.pixel_pitch), {}};
  ImageGrid& x = result.image;
  ReconReport& rep = result.report;
  rep.outside_support_pixels = count_outside_support(g);
  {
    double s = 0.0;
    for (double v : sino.data()) s += v * v;
    rep.initial_residual = std::sqrt(s);
  }

  std::vector<int> order(static_cast<std::size_t>(na));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed);

  std::vector<double> corr(static_cast<std::size_t>(nd));
  std::vector<double> back(npix);
  for (int it = 1; it <= cfg.n_iterations; ++it) {
    if (cfg.ordering == AngleOrder::Shuffled) {
      for (int i = na - 1; i > 0; --i)
        std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    }
    for (int a : order) {
      forward_angle(x, g, a, corr);
      auto b = sino.projection(a);
      const double* rs = row_sums.data() + static_cast<std::size_t>(a) * nd;
      for (int k = 0; k < nd; ++k) corr[k] = rs[k] > kGuard ? (b[k] - corr[k]) / rs[k] : 0.0;
      std::fill(back.begin(), back.end(), 0.0);
      adjoint_angle(corr, g, a, back);
      const double* cs = col_sums.data() + static_cast<std::size_t>(a) * npix;
      auto xd = x.data();
      for (std::size_t i = 0; i < npix; ++i) {
        if (cs[i] > kGuard) xd[i] += cfg.relaxation * back[i] / cs[i];
        if (cfg.nonnegativity && xd[i] < 0.0) xd[i] = 0.0;
      }
    }
    rep.residuals.push_back(residual_norm(x, sino));
    if (std::find(cfg.snapshot_iters.begin(), cfg.snapshot_iters.end(), it) !=
        cfg.snapshot_iters.end())
      rep.snapshots.push_back({it, x});
  }
  rep.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

FbpFilter parse_fbp_filter(const std::string& name) {
  if (name == "ram-lak" || name == "ramlak") return FbpFilter::RamLak;
  if (name == "shepp-logan") return FbpFilter::SheppLogan;
  if (name == "none") return FbpFilter::None;
  fail(ErrorKind::Validation, "unknown FBP filter '" + name + "' (ram-lak|shepp-logan|none)");
}

namespace {

// Real frequency response of the doubled discrete ramp for padded length n and
// bin spacing tau.
std::vector<double> ramp_response(int n, double tau, FbpFilter filter) {
  std::vector<double> h(static_cast<std::size_t>(n), 0.0);
  h[0] = 1.0 / (4.0 * tau * tau);
  for (int i = 1; i <= n / 2; ++i) {
    if (i % 2 == 0) continue;
    const double v = -1.0 / (std::numbers::pi * std::numbers::pi * i * i * tau * tau);
    h[i] = v;
    h[n - i] = v;
  }
  detail::RealFft fft(n);
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(fft.spectrum_size()));
  fft.forward(h, spec);
  std::vector<double> resp(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    double v = 2.0 * tau * spec[i].real();
    if (filter == FbpFilter::SheppLogan && i > 0) {
      const double om = std::numbers::pi * static_cast<double>(i) / n;
      v *= std::sin(om) / om;
    }
    resp[i] = v;
  }
  return resp;
}

}  // namespace

ImageGrid fbp(const Sinogram& sino, FbpFilter filter) {
  const ProjectionGeometry& g = sino.geometry();
  if (g.n_angles() < 2)
    fail(ErrorKind::InsufficientData, "filtered back projection needs at least 2 angles");
  if (!sino.all_finite()) fail(ErrorKind::Data, "sinogram contains NaN or infinite values");
  const int na = g.n_angles();
  const int nd = g.n_detectors;
  const double tau = g.bin_spacing();

  // Work in pixel units: p / pixel_pitch is the line integral per pixel length.
  std::vector<double> q(static_cast<std::size_t>(na) * nd);
  const double unit = 1.0 / g.pixel_pitch;
  if (filter == FbpFilter::None) {
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = sino.data()[i] * unit;
  } else {
    const int n = static_cast<int>(std::bit_ceil(static_cast<unsigned>(2 * nd)));
    const std::vector<double> resp = ramp_response(n, tau, filter);
    parallel_for(static_cast<std::size_t>(na), [&](std::size_t a) {
      detail::RealFft fft(n);
      std::vector<double> buf(static_cast<std::size_t>(n), 0.0);
      auto p = sino.projection(static_cast<int>(a));
      for (int k = 0; k < nd; ++k) buf[k] = p[k] * unit;
      std::vector<std::complex<double>> spec(static_cast<std::size_t>(fft.spectrum_size()));
      fft.forward(buf, spec);
      for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= resp[i];
      fft.inverse(spec, buf);
      for (int k = 0; k < nd; ++k) q[a * nd + k] = buf[k] / n;
    });
  }

  std::vector<double> cs(static_cast<std::size_t>(na)), sn(static_cast<std::size_t>(na));
  for (int a = 0; a < na; ++a) {
    const double deg = g.angles_deg[a];
    const double r = deg * std::numbers::pi / 180.0;
    cs[a] = deg == 90.0 ? 0.0 : std::cos(r);
    sn[a] = deg == 0.0 ? 0.0 : std::sin(r);
  }
  const double scale = std::numbers::pi / (2.0 * na);
  const double k_off = nd / 2.0 - 0.5;
  ImageGrid out(g.image_w, g.image_h, 0.0, g.pixel_pitch);
  parallel_for(static_cast<std::size_t>(g.image_h), [&](std::size_t rr) {
    auto dst = out.row(static_cast<int>(rr));
    const double y = g.image_h / 2.0 - (static_cast<double>(rr) + 0.5);
    for (int c = 0; c < g.image_w; ++c) {
      const double x = c + 0.5 - g.image_w / 2.0;
      double acc = 0.0;
      for (int a = 0; a < na; ++a) {
        const double u = (x * cs[a] + y * sn[a]) / tau + k_off;
        const double kf = std::floor(u);
        const int k0 = static_cast<int>(kf);
        const double t = u - kf;
        const double* qa = q.data() + static_cast<std::size_t>(a) * nd;
        const double v0 = (k0 >= 0 && k0 < nd) ? qa[k0] : 0.0;
        const double v1 = (k0 + 1 >= 0 && k0 + 1 < nd) ? qa[k0 + 1] : 0.0;
        acc += v0 + t * (v1 - v0);
      }
      dst[c] = acc * scale;
    }
  });
  return out;
}

}  // namespace metaradon
