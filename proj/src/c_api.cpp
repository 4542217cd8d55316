#include "metaradon/metaradon.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <new>
#include <string>
#include <utility>

#include "metaradon/bench.hpp"
#include "metaradon/classify.hpp"
#include "metaradon/error.hpp"
#include "metaradon/image.hpp"
#include "metaradon/metaoptic.hpp"
#include "metaradon/metrics.hpp"
#include "metaradon/parallel.hpp"
#include "metaradon/pgm.hpp"
#include "metaradon/projector.hpp"
#include "metaradon/reconstruction.hpp"

namespace mr = metaradon;

struct mr_image {
  mr::ImageGrid img;
};
struct mr_sinogram {
  mr::Sinogram sino;
};
struct mr_recon_report {
  mr::ReconReport report;
  std::vector<mr_image> snapshots;
};
struct mr_pillar_library {
  mr::PillarLibrary lib;
};
struct mr_lens_design {
  mr::LensDesign design;
};
struct mr_dataset {
  mr::Dataset data;
};
struct mr_model {
  mr::ClassifierModel model;
};

namespace {

thread_local std::string g_last_error;

mr_status status_of(mr::ErrorKind kind) {
  switch (kind) {
    case mr::ErrorKind::Validation: return MR_ERR_VALIDATION;
    case mr::ErrorKind::Io: return MR_ERR_IO;
    case mr::ErrorKind::Parse: return MR_ERR_PARSE;
    case mr::ErrorKind::Format: return MR_ERR_FORMAT;
    case mr::ErrorKind::Dimension: return MR_ERR_DIMENSION;
    case mr::ErrorKind::Data: return MR_ERR_DATA;
    case mr::ErrorKind::Range: return MR_ERR_RANGE;
    case mr::ErrorKind::InsufficientData: return MR_ERR_INSUFFICIENT_DATA;
  }
  return MR_ERR_INTERNAL;
}

template <class F>
mr_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return MR_OK;
  } catch (const mr::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return MR_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MR_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return MR_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) mr::fail(mr::ErrorKind::Validation, std::string(what) + " must not be null");
}

mr::RadonMethod to_method(mr_radon_method m) {
  switch (m) {
    case MR_RADON_ROTATE: return mr::RadonMethod::RotateSum;
    case MR_RADON_RAY: return mr::RadonMethod::RayDriven;
    case MR_RADON_FFTDC: return mr::RadonMethod::FftDc;
  }
  mr::fail(mr::ErrorKind::Validation, "unknown radon method");
}

mr::FbpFilter to_filter(mr_fbp_filter f) {
  switch (f) {
    case MR_FILTER_RAMLAK: return mr::FbpFilter::RamLak;
    case MR_FILTER_SHEPP_LOGAN: return mr::FbpFilter::SheppLogan;
    case MR_FILTER_NONE: return mr::FbpFilter::None;
  }
  mr::fail(mr::ErrorKind::Validation, "unknown filter");
}

mr::LensSpec to_lens(const mr_lens_spec* s) {
  need(s, "lens spec");
  mr::LensSpec out;
  out.wavelength = s->wavelength;
  out.focal_length = s->focal_length;
  out.aperture_w = s->aperture_w;
  out.aperture_h = s->aperture_h;
  out.period = s->period;
  switch (s->profile) {
    case MR_LENS_CYLINDRICAL: out.profile = mr::LensProfile::Cylindrical; break;
    case MR_LENS_HYPERBOLOID: out.profile = mr::LensProfile::Hyperboloid; break;
    default: mr::fail(mr::ErrorKind::Validation, "unknown lens profile");
  }
  return out;
}

mr_compression_result to_c(const mr::CompressionResult& r) {
  mr_compression_result out{};
  out.method = r.method == mr::CompressionMethod::Radon ? MR_COMPRESS_RADON : MR_COMPRESS_AVGPOOL;
  out.captured_pixels = r.captured_pixels;
  out.reconstructed_pixels = r.reconstructed_pixels;
  out.ratio = r.ratio;
  out.psnr = r.psnr;
  out.ssim = r.ssim;
  return out;
}

mr_image* wrap(mr::ImageGrid img) { return new mr_image{std::move(img)}; }

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class N>
bool in_range(int i, N n) {
  return i >= 0 && static_cast<std::size_t>(i) < static_cast<std::size_t>(n);
}

}  // namespace

extern "C" {

const char* mr_version(void) { return "1.0.0"; }

const char* mr_format_versions(void) { return "PGM/P5 RSG1/1 RCM1/1 layout-csv/1 library-csv/1"; }

const char* mr_last_error(void) { return g_last_error.c_str(); }

const char* mr_status_name(mr_status s) {
  switch (s) {
    case MR_OK: return "ok";
    case MR_ERR_VALIDATION: return "validation";
    case MR_ERR_IO: return "io";
    case MR_ERR_PARSE: return "parse";
    case MR_ERR_FORMAT: return "format";
    case MR_ERR_DIMENSION: return "dimension";
    case MR_ERR_DATA: return "data";
    case MR_ERR_RANGE: return "range";
    case MR_ERR_INSUFFICIENT_DATA: return "insufficient-data";
    case MR_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void mr_set_threads(int n) { mr::set_thread_count(n < 0 ? 0 : n); }

/* images */

mr_status mr_image_create(int width, int height, const double* data, mr_image** out) {
  return guard([&] {
    need(out, "out");
    mr::require(width > 0 && height > 0, "image dimensions must be positive");
    mr::ImageGrid img(width, height);
    if (data) std::memcpy(img.data().data(), data, img.size() * sizeof(double));
    *out = wrap(std::move(img));
  });
}

mr_status mr_image_load(const char* path, mr_image** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = wrap(mr::load_pgm(path));
  });
}

mr_status mr_image_save(const mr_image* img, const char* path, int depth, int clamp) {
  return guard([&] {
    need(img, "image");
    need(path, "path");
    mr::save_pgm(img->img, path, depth, clamp != 0);
  });
}

int mr_image_width(const mr_image* img) { return img->img.width(); }
int mr_image_height(const mr_image* img) { return img->img.height(); }
const double* mr_image_data(const mr_image* img) { return img->img.data().data(); }
void mr_image_free(mr_image* img) { delete img; }

mr_status mr_image_affine(const mr_image* img, const mr_affine* spec, mr_image** out) {
  return guard([&] {
    need(img, "image");
    need(spec, "affine spec");
    need(out, "out");
    mr::AffineSpec a{spec->rotation_deg, spec->translate_x, spec->translate_y, spec->scale};
    *out = wrap(mr::affine_transform(img->img, a));
  });
}

mr_status mr_image_noise(const mr_image* img, double sigma_frac, uint64_t seed, mr_image** out) {
  return guard([&] {
    need(img, "image");
    need(out, "out");
    *out = wrap(mr::add_gaussian_noise(img->img, mr::NoiseSpec{sigma_frac, seed}));
  });
}

mr_status mr_image_pad(const mr_image* img, int pad, double fill, mr_image** out) {
  return guard([&] {
    need(img, "image");
    need(out, "out");
    *out = wrap(mr::pad_image(img->img, pad, fill));
  });
}

mr_status mr_image_resize(const mr_image* img, int width, int height, mr_image** out) {
  return guard([&] {
    need(img, "image");
    need(out, "out");
    *out = wrap(mr::resize(img->img, width, height));
  });
}

/* projection */

int mr_auto_detector_count(int width, int height) {
  try {
    return mr::auto_detector_count(width, height);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return 0;
  }
}

mr_status mr_uniform_angles(int n, double lo_deg, double hi_deg, double* out) {
  return guard([&] {
    need(out, "out");
    auto a = mr::make_uniform_angles(n, lo_deg, hi_deg);
    std::memcpy(out, a.data(), a.size() * sizeof(double));
  });
}

mr_status mr_radon(const mr_image* img, const double* angles_deg, int n_angles, int n_detectors,
                   mr_radon_method method, mr_sinogram** out) {
  return guard([&] {
    need(img, "image");
    need(angles_deg, "angles");
    need(out, "out");
    mr::require(n_angles > 0, "n_angles must be positive");
    std::vector<double> angles(angles_deg, angles_deg + n_angles);
    auto geom = mr::ProjectionGeometry::for_image(img->img.width(), img->img.height(),
                                                  std::move(angles),
                                                  n_detectors > 0 ? n_detectors : 0);
    geom.pixel_pitch = img->img.pitch();
    *out = new mr_sinogram{mr::radon(img->img, geom, to_method(method))};
  });
}

mr_status mr_adjoint(const mr_sinogram* sino, mr_image** out) {
  return guard([&] {
    need(sino, "sinogram");
    need(out, "out");
    *out = wrap(mr::adjoint_apply(sino->sino));
  });
}

mr_status mr_sinogram_create(int n_angles, const double* angles_deg, int n_detectors,
                             int image_w, int image_h, const double* data, mr_sinogram** out) {
  return guard([&] {
    need(angles_deg, "angles");
    need(out, "out");
    mr::require(n_angles > 0 && n_detectors > 0, "sinogram dimensions must be positive");
    std::vector<double> angles(angles_deg, angles_deg + n_angles);
    auto geom = mr::ProjectionGeometry::for_image(image_w, image_h, std::move(angles), n_detectors);
    std::vector<double> values(static_cast<std::size_t>(n_angles) * n_detectors, 0.0);
    if (data) std::memcpy(values.data(), data, values.size() * sizeof(double));
    *out = new mr_sinogram{mr::Sinogram(std::move(geom), std::move(values))};
  });
}

mr_status mr_sinogram_load(const char* path, int image_w, int image_h, mr_sinogram** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new mr_sinogram{mr::load_rsg(path, image_w > 0 ? image_w : 0, image_h > 0 ? image_h : 0)};
  });
}

mr_status mr_sinogram_save(const mr_sinogram* sino, const char* path) {
  return guard([&] {
    need(sino, "sinogram");
    need(path, "path");
    mr::save_rsg(sino->sino, path);
  });
}

mr_status mr_sinogram_save_csv(const mr_sinogram* sino, const char* path) {
  return guard([&] {
    need(sino, "sinogram");
    need(path, "path");
    mr::save_sinogram_csv(sino->sino, path);
  });
}

mr_status mr_sinogram_to_image(const mr_sinogram* sino, mr_image** out) {
  return guard([&] {
    need(sino, "sinogram");
    need(out, "out");
    *out = wrap(mr::sinogram_image(sino->sino));
  });
}

int mr_sinogram_n_angles(const mr_sinogram* s) { return s->sino.n_angles(); }
int mr_sinogram_n_detectors(const mr_sinogram* s) { return s->sino.n_detectors(); }
int mr_sinogram_image_width(const mr_sinogram* s) { return s->sino.geometry().image_w; }
int mr_sinogram_image_height(const mr_sinogram* s) { return s->sino.geometry().image_h; }
const double* mr_sinogram_angles(const mr_sinogram* s) { return s->sino.geometry().angles_deg.data(); }
const double* mr_sinogram_data(const mr_sinogram* s) { return s->sino.data().data(); }
void mr_sinogram_free(mr_sinogram* s) { delete s; }

/* reconstruction */

void mr_sart_config_default(mr_sart_config* cfg) {
  static const int kSnapshots[] = {1, 20, 100, 150};
  cfg->n_iterations = 100;
  cfg->relaxation = 1.0;
  cfg->shuffled = 0;
  cfg->seed = 0;
  cfg->nonnegativity = 0;
  cfg->snapshot_iters = kSnapshots;
  cfg->n_snapshots = 4;
}

mr_status mr_sart(const mr_sinogram* sino, const mr_sart_config* cfg, mr_image** out,
                  mr_recon_report** report) {
  return guard([&] {
    need(sino, "sinogram");
    need(cfg, "config");
    need(out, "out");
    mr::require(cfg->n_snapshots >= 0, "n_snapshots must be non-negative");
    mr::require(cfg->n_snapshots == 0 || cfg->snapshot_iters, "snapshot list must not be null");
    mr::SartConfig c;
    c.n_iterations = cfg->n_iterations;
    c.relaxation = cfg->relaxation;
    c.ordering = cfg->shuffled ? mr::AngleOrder::Shuffled : mr::AngleOrder::Sequential;
    c.seed = cfg->seed;
    c.nonnegativity = cfg->nonnegativity != 0;
    c.snapshot_iters.assign(cfg->snapshot_iters, cfg->snapshot_iters + cfg->n_snapshots);
    auto res = mr::sart(sino->sino, c);
    mr_recon_report* rep = nullptr;
    if (report) {
      rep = new mr_recon_report{};
      for (auto& s : res.report.snapshots) rep->snapshots.push_back(mr_image{s.image});
      rep->report = std::move(res.report);
    }
    *out = wrap(std::move(res.image));
    if (report) *report = rep;
  });
}

int mr_report_n_iterations(const mr_recon_report* r) {
  return static_cast<int>(r->report.residuals.size());
}
double mr_report_residual(const mr_recon_report* r, int i) {
  if (!r || !in_range(i, r->report.residuals.size())) return kNaN;
  return r->report.residuals[i];
}
double mr_report_initial_residual(const mr_recon_report* r) { return r->report.initial_residual; }
double mr_report_elapsed_seconds(const mr_recon_report* r) { return r->report.elapsed_seconds; }
int mr_report_outside_support_pixels(const mr_recon_report* r) {
  return r->report.outside_support_pixels;
}
int mr_report_n_snapshots(const mr_recon_report* r) { return static_cast<int>(r->snapshots.size()); }

const mr_image* mr_report_snapshot(const mr_recon_report* r, int index, int* iteration) {
  if (!r || !in_range(index, r->snapshots.size())) return nullptr;
  if (iteration) *iteration = r->report.snapshots[index].iteration;
  return &r->snapshots[index];
}

void mr_report_free(mr_recon_report* r) { delete r; }

mr_status mr_fbp(const mr_sinogram* sino, mr_fbp_filter filter, mr_image** out) {
  return guard([&] {
    need(sino, "sinogram");
    need(out, "out");
    *out = wrap(mr::fbp(sino->sino, to_filter(filter)));
  });
}

mr_status mr_psnr(const mr_image* a, const mr_image* b, double* out) {
  return guard([&] {
    need(a, "image");
    need(b, "image");
    need(out, "out");
    *out = mr::psnr(a->img, b->img);
  });
}

mr_status mr_ssim(const mr_image* a, const mr_image* b, double* out) {
  return guard([&] {
    need(a, "image");
    need(b, "image");
    need(out, "out");
    *out = mr::ssim(a->img, b->img);
  });
}

/* metalens */

mr_status mr_phase_profile(const mr_lens_spec* spec, double x, double y, double* out) {
  return guard([&] {
    need(out, "out");
    auto s = to_lens(spec);
    *out = mr::phase_profile(s, x, y);
  });
}

double mr_wrap_phase(double phi) { return mr::wrap_phase(phi); }

mr_status mr_library_load(const char* csv_path, mr_pillar_library** out) {
  return guard([&] {
    need(csv_path, "path");
    need(out, "out");
    *out = new mr_pillar_library{mr::load_library(csv_path)};
  });
}

mr_status mr_library_synthetic(int n, mr_pillar_library** out) {
  return guard([&] {
    need(out, "out");
    *out = new mr_pillar_library{mr::synthetic_library(n)};
  });
}

mr_status mr_library_save(const mr_pillar_library* lib, const char* csv_path) {
  return guard([&] {
    need(lib, "library");
    need(csv_path, "path");
    mr::save_library(lib->lib, csv_path);
  });
}

int mr_library_size(const mr_pillar_library* l) { return static_cast<int>(l->lib.entries.size()); }

void mr_library_entry(const mr_pillar_library* l, int i, double* diameter_m, double* phase_rad,
                      double* amplitude) {
  if (!l || !in_range(i, l->lib.entries.size())) return;
  const auto& e = l->lib.entries[i];
  if (diameter_m) *diameter_m = e.diameter;
  if (phase_rad) *phase_rad = e.phase;
  if (amplitude) *amplitude = e.amplitude;
}

int mr_library_n_warnings(const mr_pillar_library* l) {
  return static_cast<int>(l->lib.warnings.size());
}
const char* mr_library_warning(const mr_pillar_library* l, int i) {
  if (!l || !in_range(i, l->lib.warnings.size())) return nullptr;
  return l->lib.warnings[i].c_str();
}
void mr_library_free(mr_pillar_library* l) { delete l; }

mr_status mr_lens_quantize(const mr_lens_spec* spec, const mr_pillar_library* lib,
                           mr_lens_design** out) {
  return guard([&] {
    need(lib, "library");
    need(out, "out");
    auto s = to_lens(spec);
    *out = new mr_lens_design{mr::quantize_lens(s, lib->lib)};
  });
}

int mr_design_nx(const mr_lens_design* d) { return d->design.nx; }
int mr_design_ny(const mr_lens_design* d) { return d->design.ny; }
double mr_design_diameter(const mr_lens_design* d, int i, int j) {
  if (!d || !in_range(i, d->design.nx) || !in_range(j, d->design.ny)) return kNaN;
  return d->design.diameter_at(i, j);
}
double mr_design_residual(const mr_lens_design* d, int i, int j) {
  if (!d || !in_range(i, d->design.nx) || !in_range(j, d->design.ny)) return kNaN;
  return d->design.residual_at(i, j);
}
double mr_design_max_residual(const mr_lens_design* d) { return d->design.max_residual(); }
int mr_design_n_warnings(const mr_lens_design* d) {
  return static_cast<int>(d->design.warnings.size());
}
const char* mr_design_warning(const mr_lens_design* d, int i) {
  if (!d || !in_range(i, d->design.warnings.size())) return nullptr;
  return d->design.warnings[i].c_str();
}

mr_status mr_design_export_layout(const mr_lens_design* d, const char* csv_path) {
  return guard([&] {
    need(d, "design");
    need(csv_path, "path");
    mr::export_layout(d->design, csv_path);
  });
}

mr_status mr_design_export_residuals(const mr_lens_design* d, const char* pgm_path) {
  return guard([&] {
    need(d, "design");
    need(pgm_path, "path");
    mr::export_residual_map(d->design, pgm_path);
  });
}

void mr_design_free(mr_lens_design* d) { delete d; }

/* compression study */

mr_status mr_digit_scene(int width, int height, int glyph_h, int glyph_w, uint64_t seed,
                         mr_image** out) {
  return guard([&] {
    need(out, "out");
    *out = wrap(mr::generate_digit_scene(width, height, glyph_h, glyph_w, seed));
  });
}

mr_status mr_average_pool(const mr_image* img, int k, mr_image** out) {
  return guard([&] {
    need(img, "image");
    need(out, "out");
    *out = wrap(mr::average_pool(img->img, k));
  });
}

void mr_study_options_default(mr_study_options* opts) {
  opts->use_sart = 0;
  opts->filter = MR_FILTER_RAMLAK;
  opts->sart_iterations = 20;
  opts->n_detectors = 0;
}

mr_status mr_compression_study(const mr_image* scene, int n_angles, int pool_k,
                               const mr_study_options* opts, mr_compression_result* radon,
                               mr_compression_result* pool, mr_image** radon_image,
                               mr_image** pool_image, mr_sinogram** sinogram) {
  return guard([&] {
    need(scene, "scene");
    mr::StudyOptions o;
    if (opts) {
      o.recon = opts->use_sart ? mr::StudyRecon::Sart : mr::StudyRecon::Fbp;
      o.filter = to_filter(opts->filter);
      o.sart_iterations = opts->sart_iterations;
      o.n_detectors = opts->n_detectors > 0 ? opts->n_detectors : 0;
    }
    auto res = mr::run_compression_study(scene->img, n_angles, pool_k, o);
    if (radon) *radon = to_c(res.radon);
    if (pool) *pool = to_c(res.pool);
    if (radon_image) *radon_image = wrap(std::move(res.radon_image));
    if (pool_image) *pool_image = wrap(std::move(res.pool_image));
    if (sinogram) *sinogram = new mr_sinogram{std::move(res.sinogram)};
  });
}

/* classification */

void mr_dataset_spec_default(mr_dataset_spec* spec) {
  mr::DatasetSpec d;
  spec->n_train = d.n_train;
  spec->n_test = d.n_test;
  spec->pad = d.pad;
  spec->target_dim = d.target_dim;
  spec->n_angles = d.n_angles;
  spec->augment = d.aug.enabled ? 1 : 0;
  spec->rot_deg = d.aug.rot_deg;
  spec->translate_lo = d.aug.translate_lo;
  spec->translate_hi = d.aug.translate_hi;
  spec->scale_lo = d.aug.scale_lo;
  spec->scale_hi = d.aug.scale_hi;
  spec->augment_test = d.augment_test ? 1 : 0;
  spec->noise_frac = d.noise_frac;
  spec->seed = d.seed;
  spec->domain = MR_DOMAIN_RADON;
  spec->method = MR_RADON_RAY;
}

namespace {
mr::DatasetSpec to_dataset_spec(const mr_dataset_spec* spec) {
  need(spec, "spec");
  mr::DatasetSpec d;
  d.n_train = spec->n_train;
  d.n_test = spec->n_test;
  d.pad = spec->pad;
  d.target_dim = spec->target_dim;
  d.n_angles = spec->n_angles;
  d.aug.enabled = spec->augment != 0;
  d.aug.rot_deg = spec->rot_deg;
  d.aug.translate_lo = spec->translate_lo;
  d.aug.translate_hi = spec->translate_hi;
  d.aug.scale_lo = spec->scale_lo;
  d.aug.scale_hi = spec->scale_hi;
  d.augment_test = spec->augment_test != 0;
  d.noise_frac = spec->noise_frac;
  d.seed = spec->seed;
  d.domain = spec->domain == MR_DOMAIN_PIXEL ? mr::FeatureDomain::Pixel : mr::FeatureDomain::Radon;
  d.method = to_method(spec->method);
  return d;
}
}  // namespace

mr_status mr_dataset_build(const char* mnist_dir, const mr_dataset_spec* spec, mr_dataset** train,
                           mr_dataset** test) {
  return guard([&] {
    need(mnist_dir, "mnist_dir");
    need(train, "train");
    need(test, "test");
    auto sets = mr::build_radon_dataset(mnist_dir, to_dataset_spec(spec));
    auto* tr = new mr_dataset{std::move(sets.train)};
    *test = new mr_dataset{std::move(sets.test)};
    *train = tr;
  });
}

mr_status mr_dataset_build_split(const char* mnist_dir, const mr_dataset_spec* spec, int split,
                                 mr_dataset** out) {
  return guard([&] {
    need(mnist_dir, "mnist_dir");
    need(out, "out");
    mr::require(split == 0 || split == 1, "split must be 0 (train) or 1 (test)");
    *out = new mr_dataset{mr::build_mnist_split(
        mnist_dir, to_dataset_spec(spec), split == 0 ? mr::MnistSplit::Train : mr::MnistSplit::Test)};
  });
}

mr_status mr_dataset_from_arrays(int n, int n_features, const double* features, const int* labels,
                                 mr_dataset** out) {
  return guard([&] {
    need(features, "features");
    need(labels, "labels");
    need(out, "out");
    mr::require(n > 0 && n_features > 0, "dataset dimensions must be positive");
    mr::Dataset d;
    d.n_features = n_features;
    d.features.assign(features, features + static_cast<std::size_t>(n) * n_features);
    d.labels.assign(labels, labels + n);
    *out = new mr_dataset{std::move(d)};
  });
}

mr_status mr_dataset_split(const mr_dataset* ds, double frac, uint64_t seed, mr_dataset** keep,
                           mr_dataset** held_out) {
  return guard([&] {
    need(ds, "dataset");
    need(keep, "keep");
    need(held_out, "held_out");
    mr::Dataset k, h;
    mr::split_dataset(ds->data, frac, seed, k, h);
    auto* kk = new mr_dataset{std::move(k)};
    *held_out = new mr_dataset{std::move(h)};
    *keep = kk;
  });
}

int mr_dataset_size(const mr_dataset* ds) { return ds->data.size(); }
int mr_dataset_n_features(const mr_dataset* ds) { return ds->data.n_features; }
const double* mr_dataset_features(const mr_dataset* ds) { return ds->data.features.data(); }
const int* mr_dataset_labels(const mr_dataset* ds) { return ds->data.labels.data(); }
void mr_dataset_free(mr_dataset* ds) { delete ds; }

void mr_train_config_default(mr_train_config* cfg) {
  mr::TrainConfig t;
  cfg->epochs = t.epochs;
  cfg->learning_rate = t.learning_rate;
  cfg->l2 = t.l2;
  cfg->batch_size = t.batch_size;
  cfg->n_classes = t.n_classes;
  cfg->seed = t.seed;
}

mr_status mr_train(const mr_dataset* ds, const mr_train_config* cfg, mr_model** out,
                   double* epoch_loss) {
  return guard([&] {
    need(ds, "dataset");
    need(cfg, "config");
    need(out, "out");
    mr::TrainConfig t;
    t.epochs = cfg->epochs;
    t.learning_rate = cfg->learning_rate;
    t.l2 = cfg->l2;
    t.batch_size = cfg->batch_size;
    t.n_classes = cfg->n_classes;
    t.seed = cfg->seed;
    auto res = mr::train_softmax(ds->data, t);
    if (epoch_loss)
      std::memcpy(epoch_loss, res.epoch_loss.data(), res.epoch_loss.size() * sizeof(double));
    *out = new mr_model{std::move(res.model)};
  });
}

void mr_model_set_shape(mr_model* m, int n_angles, int n_detectors) {
  m->model.n_angles = n_angles;
  m->model.n_detectors = n_detectors;
}
int mr_model_n_classes(const mr_model* m) { return m->model.n_classes; }
int mr_model_n_features(const mr_model* m) { return m->model.n_features; }

mr_status mr_model_save(const mr_model* m, const char* path) {
  return guard([&] {
    need(m, "model");
    need(path, "path");
    mr::save_model(m->model, path);
  });
}

mr_status mr_model_load(const char* path, mr_model** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new mr_model{mr::load_model(path)};
  });
}

void mr_model_free(mr_model* m) { delete m; }

mr_status mr_evaluate(const mr_model* m, const mr_dataset* ds, double* accuracy,
                      long long* confusion) {
  return guard([&] {
    need(m, "model");
    need(ds, "dataset");
    auto ev = mr::evaluate(m->model, ds->data);
    if (accuracy) *accuracy = ev.accuracy;
    if (confusion)
      std::memcpy(confusion, ev.confusion.counts.data(), ev.confusion.counts.size() * sizeof(long long));
  });
}

namespace {
mr::ConfusionMatrix to_confusion(const long long* counts, int n_classes) {
  need(counts, "counts");
  mr::require(n_classes > 0, "n_classes must be positive");
  mr::ConfusionMatrix cm;
  cm.n_classes = n_classes;
  cm.counts.assign(counts, counts + static_cast<std::size_t>(n_classes) * n_classes);
  return cm;
}
}  // namespace

mr_status mr_confusion_save_csv(const long long* counts, int n_classes, const char* path) {
  return guard([&] {
    need(path, "path");
    mr::save_confusion_csv(to_confusion(counts, n_classes), path);
  });
}

mr_status mr_confusion_heatmap(const long long* counts, int n_classes, mr_image** out) {
  return guard([&] {
    need(out, "out");
    *out = wrap(mr::confusion_heatmap(to_confusion(counts, n_classes)));
  });
}

}  // extern "C"
