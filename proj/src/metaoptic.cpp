#include "metaradon/metaoptic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "metaradon/error.hpp"
#include "metaradon/parallel.hpp"
#include "metaradon/pgm.hpp"

namespace metaradon {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

LensProfile parse_lens_profile(const std::string& name) {
  if (name == "cyl" || name == "cylindrical") return LensProfile::Cylindrical;
  if (name == "hyp" || name == "hyperboloid") return LensProfile::Hyperboloid;
  fail(ErrorKind::Validation, "unknown lens profile '" + name + "' (cyl|hyp)");
}

void LensSpec::validate() const {
  auto pos = [](double v) { return v > 0.0 && std::isfinite(v); };
  require(pos(wavelength), "wavelength must be > 0");
  require(pos(focal_length), "focal length must be > 0");
  require(pos(aperture_w) && pos(aperture_h), "aperture dimensions must be > 0");
  require(pos(period), "pillar period must be > 0");
  require(sites_x() >= 1 && sites_y() >= 1, "aperture smaller than one pillar period");
}

int LensSpec::sites_x() const {
  // small relative slack so that e.g. 10 * 330e-9 / 330e-9 counts 10 sites
  return static_cast<int>(std::floor(aperture_w / period * (1.0 + 1e-12)));
}
int LensSpec::sites_y() const {
  return static_cast<int>(std::floor(aperture_h / period * (1.0 + 1e-12)));
}

double phase_profile(const LensSpec& spec, double x, double y) {
  const double f = spec.focal_length;
  const double r2 = spec.profile == LensProfile::Cylindrical ? x * x : x * x + y * y;
  // F - sqrt(F^2 + r^2) rewritten to avoid cancellation near the axis
  const double sag = -r2 / (f + std::sqrt(f * f + r2));
  return kTwoPi / spec.wavelength * sag;
}

double wrap_phase(double phi) {
  double r = std::fmod(phi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

double phase_distance(double a, double b) {
  const double d = std::abs(wrap_phase(a) - wrap_phase(b));
  return std::min(d, kTwoPi - d);
}

void PillarLibrary::normalize_and_validate() {
  if (!std::is_sorted(entries.begin(), entries.end(),
                      [](const PillarEntry& a, const PillarEntry& b) {
                        return a.diameter < b.diameter;
                      })) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const PillarEntry& a, const PillarEntry& b) {
                       return a.diameter < b.diameter;
                     });
    warnings.push_back("library rows were not sorted by diameter; sorted on load");
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (!std::isfinite(e.diameter) || e.diameter < kMinPillarDiameter * (1 - 1e-12) ||
        e.diameter > kMaxPillarDiameter * (1 + 1e-12)) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "pillar diameter %.6g nm violates the fabrication constraint "
                    "[70, 200] nm",
                    e.diameter * 1e9);
      fail(ErrorKind::Validation, buf);
    }
    require(std::isfinite(e.phase), "pillar phases must be finite");
    require(e.amplitude >= 0.0 && e.amplitude <= 1.0, "pillar amplitudes must lie in [0, 1]");
    if (i > 0 && !(e.diameter > entries[i - 1].diameter))
      fail(ErrorKind::Validation, "duplicate pillar diameter in library");
  }
  if (!entries.empty()) {
    double lo = entries.front().phase, hi = lo;
    for (const auto& e : entries) {
      lo = std::min(lo, e.phase);
      hi = std::max(hi, e.phase);
    }
    if (hi - lo < kTwoPi)
      warnings.push_back("library phase span is below 2 pi; some targets are unreachable");
  }
}

double PillarLibrary::largest_phase_gap() const {
  if (entries.empty()) return kTwoPi;
  std::vector<double> p;
  for (const auto& e : entries) p.push_back(wrap_phase(e.phase));
  std::sort(p.begin(), p.end());
  double gap = p.front() + kTwoPi - p.back();
  for (std::size_t i = 1; i < p.size(); ++i) gap = std::max(gap, p[i] - p[i - 1]);
  return gap;
}

double PillarLibrary::phase_coverage() const { return kTwoPi - largest_phase_gap(); }

PillarLibrary parse_library_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Parse, "library CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::string norm;
  for (char c : line)
    if (!std::isspace(static_cast<unsigned char>(c))) norm += c;
  if (norm != "diameter_nm,phase_rad,amplitude")
    fail(ErrorKind::Parse,
         "library CSV header must be 'diameter_nm,phase_rad,amplitude' (line 1)");
  PillarLibrary lib;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    double d, p, a;
    char extra;
    if (std::sscanf(line.c_str(), "%lf , %lf , %lf %c", &d, &p, &a, &extra) != 3)
      fail(ErrorKind::Parse, "library CSV: malformed row at line " + std::to_string(lineno));
    lib.entries.push_back({d * 1e-9, p, a});
  }
  lib.normalize_and_validate();
  return lib;
}

PillarLibrary load_library(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open library '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_library_csv(ss.str());
}

void save_library(const PillarLibrary& lib, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot create '" + path.string() + "'");
  out << "diameter_nm,phase_rad,amplitude\n";
  char buf[128];
  for (const auto& e : lib.entries) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", e.diameter * 1e9, e.phase,
                  e.amplitude);
    out << buf;
  }
  if (!out) fail(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

PillarLibrary synthetic_library(int n) {
  require(n >= 2, "synthetic library needs at least 2 entries");
  PillarLibrary lib;
  for (int i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / (n - 1);
    const double d_nm = 70.0 + 130.0 * u;
    lib.entries.push_back(
        {d_nm * 1e-9, kTwoPi * 1.05 * std::pow(u, 1.3), 0.97 - 0.12 * u * u});
  }
  lib.normalize_and_validate();
  return lib;
}

double LensDesign::max_residual() const {
  double m = 0.0;
  for (double r : residual) m = std::max(m, r);
  return m;
}

LensDesign quantize_lens(const LensSpec& spec, const PillarLibrary& lib) {
  spec.validate();
  if (lib.entries.empty()) fail(ErrorKind::Validation, "pillar library is empty");
  LensDesign d;
  d.spec = spec;
  d.nx = spec.sites_x();
  d.ny = spec.sites_y();
  d.warnings = lib.warnings;
  const std::size_t n = static_cast<std::size_t>(d.nx) * d.ny;
  d.diameter.resize(n);
  d.target.resize(n);
  d.residual.resize(n);
  d.amplitude.resize(n);

  std::vector<double> lib_phase;
  for (const auto& e : lib.entries) lib_phase.push_back(wrap_phase(e.phase));

  parallel_for(static_cast<std::size_t>(d.ny), [&](std::size_t jj) {
    const int j = static_cast<int>(jj);
    for (int i = 0; i < d.nx; ++i) {
      const double t = wrap_phase(phase_profile(spec, d.site_x(i), d.site_y(j)));
      std::size_t best = 0;
      double best_dist = phase_distance(lib_phase[0], t);
      for (std::size_t k = 1; k < lib_phase.size(); ++k) {
        const double dist = phase_distance(lib_phase[k], t);
        if (dist < best_dist) {
          best = k;
          best_dist = dist;
        }
      }
      const std::size_t idx = jj * d.nx + i;
      d.diameter[idx] = lib.entries[best].diameter;
      d.target[idx] = t;
      d.residual[idx] = best_dist;
      d.amplitude[idx] = lib.entries[best].amplitude;
    }
  });
  return d;
}

void export_layout(const LensDesign& design, const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path);
  if (!out) fail(ErrorKind::Io, "cannot create '" + csv_path.string() + "'");
  out << "x_um,y_um,diameter_nm\n";
  char buf[128];
  const double p_um = design.spec.period * 1e6;
  for (int j = 0; j < design.ny; ++j)
    for (int i = 0; i < design.nx; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", i * p_um, j * p_um,
                    design.diameter_at(i, j) * 1e9);
      out << buf;
    }
  if (!out) fail(ErrorKind::Io, "write failed for '" + csv_path.string() + "'");
}

ImageGrid residual_image(const LensDesign& design) {
  ImageGrid img(design.nx, design.ny);
  for (int j = 0; j < design.ny; ++j)
    for (int i = 0; i < design.nx; ++i)
      img.at(i, j) = std::clamp(design.residual_at(i, j) / std::numbers::pi, 0.0, 1.0);
  return img;
}

void export_residual_map(const LensDesign& design, const std::filesystem::path& pgm_path) {
  save_pgm(residual_image(design), pgm_path, 16);
}

LayoutGrid read_layout(const std::filesystem::path& csv_path, double period) {
  std::ifstream in(csv_path);
  if (!in) fail(ErrorKind::Io, "cannot open layout '" + csv_path.string() + "'");
  std::string line;
  std::getline(in, line);
  if (line.rfind("x_um,y_um,diameter_nm", 0) != 0)
    fail(ErrorKind::Parse, "layout CSV header must be 'x_um,y_um,diameter_nm'");
  struct Row {
    int i, j;
    double d;
  };
  std::vector<Row> rows;
  const double p_um = period * 1e6;
  int nx = 0, ny = 0, lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    double x, y, d;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &y, &d) != 3)
      fail(ErrorKind::Parse, "layout CSV: malformed row at line " + std::to_string(lineno));
    const int i = static_cast<int>(std::lround(x / p_um));
    const int j = static_cast<int>(std::lround(y / p_um));
    rows.push_back({i, j, d});
    nx = std::max(nx, i + 1);
    ny = std::max(ny, j + 1);
  }
  LayoutGrid g{nx, ny, std::vector<double>(static_cast<std::size_t>(nx) * ny, 0.0)};
  for (const auto& r : rows) g.diameter_nm[static_cast<std::size_t>(r.j) * nx + r.i] = r.d;
  return g;
}

}  // namespace metaradon
