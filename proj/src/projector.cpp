#include "metaradon/projector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>

#include "fft.hpp"
#include "metaradon/error.hpp"
#include "metaradon/parallel.hpp"

namespace metaradon {

std::vector<double> make_uniform_angles(int n, double lo_deg, double hi_deg) {
  require(n >= 1, "angle count must be >= 1");
  require(lo_deg < hi_deg, "angle range must satisfy lo < hi");
  std::vector<double> a(static_cast<std::size_t>(n));
  const double step = (hi_deg - lo_deg) / n;
  for (int i = 0; i < n; ++i) a[i] = lo_deg + step * i;
  return a;
}

int auto_detector_count(int width, int height) {
  const double diag = std::sqrt(static_cast<double>(width) * width +
                                static_cast<double>(height) * height);
  int n = static_cast<int>(std::ceil(diag)) + 1;
  if ((n - width) % 2 != 0) ++n;
  return n;
}

ProjectionGeometry ProjectionGeometry::for_image(int width, int height,
                                                 std::vector<double> angles_deg,
                                                 int n_detectors) {
  ProjectionGeometry g;
  g.angles_deg = std::move(angles_deg);
  g.image_w = width;
  g.image_h = height;
  g.n_detectors = n_detectors > 0 ? n_detectors : auto_detector_count(width, height);
  g.validate();
  return g;
}

void ProjectionGeometry::validate() const {
  require(!angles_deg.empty(), "geometry needs at least one angle");
  for (std::size_t i = 0; i < angles_deg.size(); ++i) {
    require(std::isfinite(angles_deg[i]), "angles must be finite");
    require(angles_deg[i] >= 0.0 && angles_deg[i] < 180.0, "angles must lie in [0, 180)");
    if (i > 0) require(angles_deg[i] > angles_deg[i - 1], "angles must be strictly increasing");
  }
  require(n_detectors >= 1, "detector count must be >= 1");
  require(detector_pitch > 0.0 && std::isfinite(detector_pitch),
          "detector pitch must be positive");
  require(image_w >= 1 && image_h >= 1, "geometry image dims must be >= 1");
  require(pixel_pitch > 0.0 && std::isfinite(pixel_pitch), "pixel pitch must be positive");
}

void ProjectionGeometry::check_image(const ImageGrid& img) const {
  if (img.width() != image_w || img.height() != image_h)
    fail(ErrorKind::Dimension, "image is " + std::to_string(img.width()) + "x" +
                                   std::to_string(img.height()) + " but geometry expects " +
                                   std::to_string(image_w) + "x" + std::to_string(image_h));
}

Sinogram::Sinogram(ProjectionGeometry geometry) : geom_(std::move(geometry)) {
  geom_.validate();
  data_.assign(static_cast<std::size_t>(geom_.n_angles()) * geom_.n_detectors, 0.0);
}

Sinogram::Sinogram(ProjectionGeometry geometry, std::vector<double> data)
    : geom_(std::move(geometry)), data_(std::move(data)) {
  geom_.validate();
  if (data_.size() != static_cast<std::size_t>(geom_.n_angles()) * geom_.n_detectors)
    fail(ErrorKind::Dimension, "sinogram data length does not match geometry");
}

bool Sinogram::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

RadonMethod parse_radon_method(const std::string& name) {
  if (name == "rotate") return RadonMethod::RotateSum;
  if (name == "ray") return RadonMethod::RayDriven;
  if (name == "fftdc") return RadonMethod::FftDc;
  fail(ErrorKind::Validation, "unknown radon method '" + name + "' (rotate|ray|fftdc)");
}

std::string to_string(RadonMethod m) {
  switch (m) {
    case RadonMethod::RotateSum: return "rotate";
    case RadonMethod::RayDriven: return "ray";
    case RadonMethod::FftDc: return "fftdc";
  }
  return "?";
}

namespace {

struct Trig {
  double c, s;
};

Trig trig_deg(double deg) {
  if (deg == 0.0) return {1.0, 0.0};
  if (deg == 90.0) return {0.0, 1.0};
  const double r = deg * std::numbers::pi / 180.0;
  return {std::cos(r), std::sin(r)};
}

// Content rotated by -theta on a zero-padded canvas. The quarter turn is an
// index permutation; the remainder (|phi| <= 45 deg) uses three 1D shears with
// linear interpolation, each of which conserves line sums exactly.
struct Canvas {
  int w = 0, h = 0;
  std::vector<double> v;
  double* row(int r) { return v.data() + static_cast<std::size_t>(r) * w; }
};

// dst[j] = src(j - t) with linear interpolation; zero outside [0, n).
void shift_line(const double* src, int n_src, double* dst, int n_dst, int step_src, int step_dst,
                double t) {
  int lo = 0, hi = n_src - 1;
  while (lo <= hi && src[static_cast<std::size_t>(lo) * step_src] == 0.0) ++lo;
  while (hi >= lo && src[static_cast<std::size_t>(hi) * step_src] == 0.0) --hi;
  for (int j = 0; j < n_dst; ++j) dst[static_cast<std::size_t>(j) * step_dst] = 0.0;
  if (lo > hi) return;
  const double fl = std::floor(t);
  const int ti = static_cast<int>(fl);
  const double f = t - fl;
  // Keys cubic weights (a = -1/2) for output offsets -1..2; they sum to one.
  auto keys = [](double x) {
    x = std::abs(x);
    if (x < 1.0) return (1.5 * x - 2.5) * x * x + 1.0;
    if (x < 2.0) return ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0;
    return 0.0;
  };
  double wts[4];
  for (int d = -1; d <= 2; ++d) wts[d + 1] = f == 0.0 ? (d == 0 ? 1.0 : 0.0) : keys(d - f);
  for (int i = lo; i <= hi; ++i) {
    const double s = src[static_cast<std::size_t>(i) * step_src];
    for (int d = -1; d <= 2; ++d) {
      const int j = i + ti + d;
      if (j >= 0 && j < n_dst && wts[d + 1] != 0.0)
        dst[static_cast<std::size_t>(j) * step_dst] += wts[d + 1] * s;
    }
  }
}

int even_pad(int base, double extent) {
  int n = static_cast<int>(std::ceil(extent)) + 4;
  if ((n - base) % 2 != 0) ++n;
  return n;
}

Canvas rotate_content(const ImageGrid& img, double deg, int min_w) {
  const int quarter = deg <= 45.0 ? 0 : (deg <= 135.0 ? 1 : 2);
  const double phi = (deg - 90.0 * quarter) * std::numbers::pi / 180.0;
  const int iw = img.width(), ih = img.height();
  const int cw = quarter == 1 ? ih : iw;
  const int ch = quarter == 1 ? iw : ih;
  const double a = phi == 0.0 ? 0.0 : std::tan(phi / 2.0);
  const double b = phi == 0.0 ? 0.0 : -std::sin(phi);
  const double w1 = cw + std::abs(a) * ch;
  const double h2 = ch + std::abs(b) * w1;
  Canvas out;
  out.w = even_pad(cw, std::max<double>(w1 + std::abs(a) * h2, min_w));
  out.h = even_pad(ch, h2);
  out.v.assign(static_cast<std::size_t>(out.w) * out.h, 0.0);
  const int ox = (out.w - cw) / 2, oy = (out.h - ch) / 2;
  for (int r = 0; r < ih; ++r) {
    auto src = img.row(r);
    for (int c = 0; c < iw; ++c) {
      int cc = c, rr = r;
      if (quarter == 1) {
        cc = ih - 1 - r;
        rr = c;
      } else if (quarter == 2) {
        cc = iw - 1 - c;
        rr = ih - 1 - r;
      }
      out.row(rr + oy)[cc + ox] = src[c];
    }
  }
  if (phi == 0.0) return out;
  std::vector<double> tmp(static_cast<std::size_t>(std::max(out.w, out.h)));
  const double hw = out.w / 2.0, hh = out.h / 2.0;
  auto shear_rows = [&] {
    for (int r = 0; r < out.h; ++r) {
      const double y = hh - r - 0.5;
      std::copy_n(out.row(r), out.w, tmp.data());
      shift_line(tmp.data(), out.w, out.row(r), out.w, 1, 1, a * y);
    }
  };
  shear_rows();
  for (int c = 0; c < out.w; ++c) {
    const double x = c + 0.5 - hw;
    for (int r = 0; r < out.h; ++r) tmp[r] = out.row(r)[c];
    // Row index grows downward, so an upward shift in y is a negative index shift.
    shift_line(tmp.data(), out.h, out.v.data() + c, out.h, 1, out.w, -b * x);
  }
  shear_rows();
  return out;
}

// Canvas column c is centered at x = c + 0.5 - w / 2; bins falling between
// columns take the linear interpolant.
void columns_to_bins(const std::vector<double>& col, const ProjectionGeometry& g,
                     std::span<double> p) {
  const int n = static_cast<int>(col.size());
  for (int k = 0; k < g.n_detectors; ++k) {
    const double u = g.bin_center(k) + n / 2.0 - 0.5;
    const double ur = std::round(u);
    auto at = [&](long i) { return i >= 0 && i < n ? col[static_cast<std::size_t>(i)] : 0.0; };
    if (std::abs(u - ur) < 1e-9) {
      p[k] = at(static_cast<long>(ur));
    } else {
      const double fl = std::floor(u);
      const double f = u - fl;
      p[k] = (1.0 - f) * at(static_cast<long>(fl)) + f * at(static_cast<long>(fl) + 1);
    }
    p[k] *= g.pixel_pitch;
  }
}

int detector_extent(const ProjectionGeometry& g) {
  return static_cast<int>(std::ceil(g.n_detectors * g.bin_spacing())) + 2;
}

}  // namespace

Sinogram radon_rotate_sum(const ImageGrid& img, const ProjectionGeometry& geom) {
  geom.validate();
  geom.check_image(img);
  Sinogram sino(geom);
  parallel_for(static_cast<std::size_t>(geom.n_angles()), [&](std::size_t a) {
    Canvas cv = rotate_content(img, geom.angles_deg[a], detector_extent(geom));
    std::vector<double> col(static_cast<std::size_t>(cv.w), 0.0);
    for (int r = 0; r < cv.h; ++r) {
      const double* src = cv.row(r);
      for (int c = 0; c < cv.w; ++c) col[c] += src[c];
    }
    columns_to_bins(col, geom, sino.projection(static_cast<int>(a)));
  });
  return sino;
}

Sinogram radon_fft_dc(const ImageGrid& img, const ProjectionGeometry& geom) {
  geom.validate();
  geom.check_image(img);
  Sinogram sino(geom);
  parallel_for(static_cast<std::size_t>(geom.n_angles()), [&](std::size_t a) {
    Canvas cv = rotate_content(img, geom.angles_deg[a], detector_extent(geom));
    detail::RealFft fft(cv.h);
    std::vector<double> column(static_cast<std::size_t>(cv.h));
    std::vector<std::complex<double>> spec(static_cast<std::size_t>(fft.spectrum_size()));
    std::vector<double> col(static_cast<std::size_t>(cv.w), 0.0);
    for (int c = 0; c < cv.w; ++c) {
      bool any = false;
      for (int r = 0; r < cv.h; ++r) {
        column[r] = cv.row(r)[c];
        any = any || column[r] != 0.0;
      }
      if (!any) continue;
      fft.forward(column, spec);
      col[c] = spec[0].real();
    }
    columns_to_bins(col, geom, sino.projection(static_cast<int>(a)));
  });
  return sino;
}

namespace {

// Pixel center projected onto the detector axis.
inline double pixel_s(int col, int row, int w, int h, Trig t) {
  const double x = (col + 0.5) - w / 2.0;
  const double y = h / 2.0 - (row + 0.5);
  return x * t.c + y * t.s;
}

// A unit pixel's footprint on the detector axis is the trapezoid box(a) * box(b),
// a = |cos|, b = |sin|. Bin weights are its integral over each bin, divided by
// the bin width, so they sum to exactly 1 / d for a footprint inside the span.
struct Footprint {
  double a, b, half;
  explicit Footprint(Trig t) {
    a = std::max(std::abs(t.c), std::abs(t.s));
    b = std::min(std::abs(t.c), std::abs(t.s));
    half = (a + b) / 2.0;
  }
  // Cumulative integral of the trapezoid from -inf to u.
  double cdf(double u) const {
    if (u <= -half) return 0.0;
    if (u >= half) return 1.0;
    if (b < 1e-9) return std::clamp((u + a / 2.0) / a, 0.0, 1.0);
    auto r = [](double x) { return x > 0.0 ? 0.5 * x * x : 0.0; };
    return (r(u + half) - r(u + (a - b) / 2.0) - r(u - (a - b) / 2.0) + r(u - half)) / (a * b);
  }
};

struct BinWeights {
  int k0 = 0;
  int n = 0;
  double w[4] = {0, 0, 0, 0};
};

inline BinWeights bin_weights(double s, const Footprint& fp, const ProjectionGeometry& g) {
  const double d = g.bin_spacing();
  const double k_off = g.n_detectors / 2.0 - 0.5;
  BinWeights bw;
  // Bins whose extent [c - d/2, c + d/2] meets [s - half, s + half].
  const int lo = static_cast<int>(std::ceil((s - fp.half) / d + k_off - 0.5 - 1e-12));
  const int hi = static_cast<int>(std::floor((s + fp.half) / d + k_off + 0.5 + 1e-12));
  bw.k0 = lo;
  double prev = fp.cdf(g.bin_center(lo) - d / 2.0 - s);
  for (int k = lo; k <= hi && bw.n < 4; ++k) {
    const double next = fp.cdf(g.bin_center(k) + d / 2.0 - s);
    bw.w[bw.n++] = (next - prev) / d;
    prev = next;
  }
  return bw;
}

}  // namespace

void forward_angle(const ImageGrid& x, const ProjectionGeometry& g, int angle,
                   std::span<double> out) {
  const Trig t = trig_deg(g.angles_deg[angle]);
  const Footprint fp(t);
  const int w = g.image_w;
  const int h = g.image_h;
  const int nd = g.n_detectors;
  const double scale = g.pixel_pitch;
  std::fill(out.begin(), out.end(), 0.0);
  for (int r = 0; r < h; ++r) {
    auto src = x.row(r);
    for (int col = 0; col < w; ++col) {
      const double v = src[col];
      if (v == 0.0) continue;
      const BinWeights bw = bin_weights(pixel_s(col, r, w, h, t), fp, g);
      for (int i = 0; i < bw.n; ++i) {
        const int k = bw.k0 + i;
        if (k >= 0 && k < nd) out[k] += bw.w[i] * v;
      }
    }
  }
  for (auto& o : out) o *= scale;
}

void adjoint_angle(std::span<const double> y, const ProjectionGeometry& g, int angle,
                   std::span<double> acc) {
  const Trig t = trig_deg(g.angles_deg[angle]);
  const Footprint fp(t);
  const int w = g.image_w;
  const int h = g.image_h;
  const int nd = g.n_detectors;
  const double scale = g.pixel_pitch;
  auto do_row = [&](std::size_t rr) {
    const int r = static_cast<int>(rr);
    double* dst = acc.data() + static_cast<std::size_t>(r) * w;
    for (int col = 0; col < w; ++col) {
      const BinWeights bw = bin_weights(pixel_s(col, r, w, h, t), fp, g);
      double v = 0.0;
      for (int i = 0; i < bw.n; ++i) {
        const int k = bw.k0 + i;
        if (k >= 0 && k < nd) v += bw.w[i] * y[k];
      }
      dst[col] += v * scale;
    }
  };
  // Thread start-up outweighs the work on small images.
  if (static_cast<long>(w) * h >= 65536) {
    parallel_for(static_cast<std::size_t>(h), do_row);
  } else {
    for (int r = 0; r < h; ++r) do_row(static_cast<std::size_t>(r));
  }
}

Sinogram radon_ray_driven(const ImageGrid& img, const ProjectionGeometry& geom) {
  geom.validate();
  geom.check_image(img);
  Sinogram sino(geom);
  parallel_for(static_cast<std::size_t>(geom.n_angles()), [&](std::size_t a) {
    forward_angle(img, geom, static_cast<int>(a), sino.projection(static_cast<int>(a)));
  });
  return sino;
}

Sinogram radon(const ImageGrid& img, const ProjectionGeometry& geom, RadonMethod method) {
  switch (method) {
    case RadonMethod::RotateSum: return radon_rotate_sum(img, geom);
    case RadonMethod::RayDriven: return radon_ray_driven(img, geom);
    case RadonMethod::FftDc: return radon_fft_dc(img, geom);
  }
  fail(ErrorKind::Validation, "unknown radon method");
}

Sinogram forward_apply(const ImageGrid& x, const ProjectionGeometry& geom) {
  return radon_ray_driven(x, geom);
}

ImageGrid adjoint_apply(const Sinogram& y) {
  const auto& g = y.geometry();
  ImageGrid out(g.image_w, g.image_h, 0.0, g.pixel_pitch);
  for (int a = 0; a < g.n_angles(); ++a) adjoint_angle(y.projection(a), g, a, out.data());
  return out;
}

namespace {

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<std::uint8_t>& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
std::uint32_t get_u32(const std::vector<std::uint8_t>& b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}
std::uint64_t get_u64(const std::vector<std::uint8_t>& b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[at + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_rsg(const Sinogram& sino) {
  std::vector<std::uint8_t> b{'R', 'S', 'G', '1'};
  put_u32(b, static_cast<std::uint32_t>(sino.n_angles()));
  put_u32(b, static_cast<std::uint32_t>(sino.n_detectors()));
  for (double a : sino.geometry().angles_deg) put_u64(b, std::bit_cast<std::uint64_t>(a));
  for (double v : sino.data()) {
    if (!std::isfinite(v)) fail(ErrorKind::Data, "sinogram contains non-finite values");
    put_u32(b, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return b;
}

int infer_image_size(int n_detectors) {
  int w = std::max(1, static_cast<int>(std::floor((n_detectors - 1) / std::numbers::sqrt2)));
  while (w > 1 && auto_detector_count(w, w) > n_detectors) --w;
  while (auto_detector_count(w + 1, w + 1) <= n_detectors) ++w;
  return w;
}

Sinogram decode_rsg(const std::vector<std::uint8_t>& b, int image_w, int image_h) {
  if (b.size() < 12 || std::memcmp(b.data(), "RSG1", 4) != 0)
    fail(ErrorKind::Format, "not an RSG1 sinogram (bad magic at byte offset 0)");
  const std::uint32_t na = get_u32(b, 4);
  const std::uint32_t nd = get_u32(b, 8);
  if (na == 0 || nd == 0) fail(ErrorKind::Parse, "RSG1: zero-sized dims at byte offset 4");
  const std::size_t need =
      12 + static_cast<std::size_t>(na) * 8 + static_cast<std::size_t>(na) * nd * 4;
  if (b.size() != need)
    fail(ErrorKind::Parse, "RSG1: expected " + std::to_string(need) + " bytes, found " +
                               std::to_string(b.size()));
  ProjectionGeometry g;
  g.n_detectors = static_cast<int>(nd);
  g.angles_deg.resize(na);
  std::size_t at = 12;
  for (std::uint32_t i = 0; i < na; ++i, at += 8)
    g.angles_deg[i] = std::bit_cast<double>(get_u64(b, at));
  if (image_w <= 0 || image_h <= 0) {
    const int w = infer_image_size(g.n_detectors);
    image_w = image_w > 0 ? image_w : w;
    image_h = image_h > 0 ? image_h : w;
  }
  g.image_w = image_w;
  g.image_h = image_h;
  g.validate();
  std::vector<double> data(static_cast<std::size_t>(na) * nd);
  for (std::size_t i = 0; i < data.size(); ++i, at += 4)
    data[i] = std::bit_cast<float>(get_u32(b, at));
  Sinogram s(std::move(g), std::move(data));
  if (!s.all_finite()) fail(ErrorKind::Data, "RSG1: sinogram contains non-finite values");
  return s;
}

void save_rsg(const Sinogram& sino, const std::filesystem::path& path) {
  const auto bytes = encode_rsg(sino);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot create sinogram '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

Sinogram load_rsg(const std::filesystem::path& path, int image_w, int image_h) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open sinogram '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_rsg(bytes, image_w, image_h);
}

void save_sinogram_csv(const Sinogram& sino, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot create '" + path.string() + "'");
  out << "angle_deg,bin,value\n";
  char line[96];
  for (int a = 0; a < sino.n_angles(); ++a)
    for (int k = 0; k < sino.n_detectors(); ++k) {
      std::snprintf(line, sizeof line, "%.17g,%d,%.9g\n", sino.geometry().angles_deg[a], k,
                    sino.at(a, k));
      out << line;
    }
  if (!out) fail(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

ImageGrid sinogram_image(const Sinogram& sino) {
  std::vector<double> d(sino.data().begin(), sino.data().end());
  return normalize(ImageGrid(sino.n_detectors(), sino.n_angles(), std::move(d)));
}

}  // namespace metaradon
