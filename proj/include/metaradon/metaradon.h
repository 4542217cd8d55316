/* C interface to the metaradon library.
 *
 * Every object is an opaque handle created by a *_create / *_load / producer
 * call and released with the matching *_free. Functions returning mr_status
 * report failures through the code and a thread-local message available from
 * mr_last_error(). Output handles are only written on success. Accessors on a
 * handle never fail; passing NULL to them is undefined.
 */
#ifndef METARADON_H
#define METARADON_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(METARADON_BUILDING)
#    define MR_API __declspec(dllexport)
#  else
#    define MR_API __declspec(dllimport)
#  endif
#else
#  define MR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mr_status {
  MR_OK = 0,
  MR_ERR_VALIDATION = 1,
  MR_ERR_IO = 2,
  MR_ERR_PARSE = 3,
  MR_ERR_FORMAT = 4,
  MR_ERR_DIMENSION = 5,
  MR_ERR_DATA = 6,
  MR_ERR_RANGE = 7,
  MR_ERR_INSUFFICIENT_DATA = 8,
  MR_ERR_INTERNAL = 9
} mr_status;

typedef struct mr_image mr_image;
typedef struct mr_sinogram mr_sinogram;
typedef struct mr_recon_report mr_recon_report;
typedef struct mr_pillar_library mr_pillar_library;
typedef struct mr_lens_design mr_lens_design;
typedef struct mr_dataset mr_dataset;
typedef struct mr_model mr_model;

/* ---- library ----------------------------------------------------------- */

MR_API const char* mr_version(void);
/* e.g. "PGM/P5 RSG1/1 RCM1/1" */
MR_API const char* mr_format_versions(void);
MR_API const char* mr_last_error(void);
MR_API const char* mr_status_name(mr_status s);
/* 0 selects the hardware concurrency. Results do not depend on this value. */
MR_API void mr_set_threads(int n);

/* ---- images ------------------------------------------------------------ */

/* data may be NULL (zero image); otherwise width*height row-major values. */
MR_API mr_status mr_image_create(int width, int height, const double* data, mr_image** out);
MR_API mr_status mr_image_load(const char* path, mr_image** out);
/* depth 8 or 16; clamp != 0 saturates values outside [0,1] instead of failing. */
MR_API mr_status mr_image_save(const mr_image* img, const char* path, int depth, int clamp);
MR_API int mr_image_width(const mr_image* img);
MR_API int mr_image_height(const mr_image* img);
MR_API const double* mr_image_data(const mr_image* img);
MR_API void mr_image_free(mr_image* img);

typedef struct mr_affine {
  double rotation_deg;
  double translate_x; /* fraction of width  */
  double translate_y; /* fraction of height */
  double scale;
} mr_affine;

MR_API mr_status mr_image_affine(const mr_image* img, const mr_affine* spec, mr_image** out);
MR_API mr_status mr_image_noise(const mr_image* img, double sigma_frac, uint64_t seed,
                                mr_image** out);
MR_API mr_status mr_image_pad(const mr_image* img, int pad, double fill, mr_image** out);
MR_API mr_status mr_image_resize(const mr_image* img, int width, int height, mr_image** out);

/* ---- projection -------------------------------------------------------- */

typedef enum mr_radon_method {
  MR_RADON_ROTATE = 0,
  MR_RADON_RAY = 1,
  MR_RADON_FFTDC = 2
} mr_radon_method;

/* Detector bins covering the image diagonal for a width x height image. */
MR_API int mr_auto_detector_count(int width, int height);
/* Writes n angles evenly spaced in [lo, hi) to out. */
MR_API mr_status mr_uniform_angles(int n, double lo_deg, double hi_deg, double* out);
/* n_detectors <= 0 selects the automatic count. */
MR_API mr_status mr_radon(const mr_image* img, const double* angles_deg, int n_angles,
                          int n_detectors, mr_radon_method method, mr_sinogram** out);
/* Transpose of the ray-driven operator. */
MR_API mr_status mr_adjoint(const mr_sinogram* sino, mr_image** out);

MR_API mr_status mr_sinogram_create(int n_angles, const double* angles_deg, int n_detectors,
                                    int image_w, int image_h, const double* data,
                                    mr_sinogram** out);
/* image_w/image_h <= 0 infer a square image from the detector count. */
MR_API mr_status mr_sinogram_load(const char* path, int image_w, int image_h,
                                  mr_sinogram** out);
MR_API mr_status mr_sinogram_save(const mr_sinogram* sino, const char* path);
MR_API mr_status mr_sinogram_save_csv(const mr_sinogram* sino, const char* path);
/* Sinogram rendered as a normalized image, one row per angle. */
MR_API mr_status mr_sinogram_to_image(const mr_sinogram* sino, mr_image** out);
MR_API int mr_sinogram_n_angles(const mr_sinogram* sino);
MR_API int mr_sinogram_n_detectors(const mr_sinogram* sino);
MR_API int mr_sinogram_image_width(const mr_sinogram* sino);
MR_API int mr_sinogram_image_height(const mr_sinogram* sino);
MR_API const double* mr_sinogram_angles(const mr_sinogram* sino);
MR_API const double* mr_sinogram_data(const mr_sinogram* sino);
MR_API void mr_sinogram_free(mr_sinogram* sino);

/* ---- reconstruction ---------------------------------------------------- */

typedef struct mr_sart_config {
  int n_iterations;
  double relaxation;
  int shuffled; /* 0 sequential angle sweep, 1 seeded shuffle per iteration */
  uint64_t seed;
  int nonnegativity;
  const int* snapshot_iters; /* 1-based; may be NULL when n_snapshots == 0 */
  int n_snapshots;
} mr_sart_config;

/* 100 iterations, relaxation 1, sequential, no clamp, snapshots {1,20,100,150}. */
MR_API void mr_sart_config_default(mr_sart_config* cfg);
/* report may be NULL. */
MR_API mr_status mr_sart(const mr_sinogram* sino, const mr_sart_config* cfg, mr_image** out,
                         mr_recon_report** report);
MR_API int mr_report_n_iterations(const mr_recon_report* rep);
MR_API double mr_report_residual(const mr_recon_report* rep, int iteration_index);
MR_API double mr_report_initial_residual(const mr_recon_report* rep);
MR_API double mr_report_elapsed_seconds(const mr_recon_report* rep);
MR_API int mr_report_outside_support_pixels(const mr_recon_report* rep);
MR_API int mr_report_n_snapshots(const mr_recon_report* rep);
/* Borrowed image, valid until the report is freed. */
MR_API const mr_image* mr_report_snapshot(const mr_recon_report* rep, int index,
                                          int* iteration);
MR_API void mr_report_free(mr_recon_report* rep);

typedef enum mr_fbp_filter {
  MR_FILTER_RAMLAK = 0,
  MR_FILTER_SHEPP_LOGAN = 1,
  MR_FILTER_NONE = 2
} mr_fbp_filter;

MR_API mr_status mr_fbp(const mr_sinogram* sino, mr_fbp_filter filter, mr_image** out);
/* +infinity for identical images. */
MR_API mr_status mr_psnr(const mr_image* a, const mr_image* b, double* out);
MR_API mr_status mr_ssim(const mr_image* a, const mr_image* b, double* out);

/* ---- metalens design --------------------------------------------------- */

typedef enum mr_lens_profile { MR_LENS_CYLINDRICAL = 0, MR_LENS_HYPERBOLOID = 1 } mr_lens_profile;

typedef struct mr_lens_spec {
  double wavelength;   /* m */
  double focal_length; /* m */
  double aperture_w;   /* m */
  double aperture_h;   /* m */
  double period;       /* m */
  mr_lens_profile profile;
} mr_lens_spec;

MR_API mr_status mr_phase_profile(const mr_lens_spec* spec, double x, double y, double* out);
MR_API double mr_wrap_phase(double phi);

MR_API mr_status mr_library_load(const char* csv_path, mr_pillar_library** out);
MR_API mr_status mr_library_synthetic(int n, mr_pillar_library** out);
MR_API mr_status mr_library_save(const mr_pillar_library* lib, const char* csv_path);
MR_API int mr_library_size(const mr_pillar_library* lib);
MR_API void mr_library_entry(const mr_pillar_library* lib, int i, double* diameter_m,
                             double* phase_rad, double* amplitude);
MR_API int mr_library_n_warnings(const mr_pillar_library* lib);
MR_API const char* mr_library_warning(const mr_pillar_library* lib, int i);
MR_API void mr_library_free(mr_pillar_library* lib);

MR_API mr_status mr_lens_quantize(const mr_lens_spec* spec, const mr_pillar_library* lib,
                                  mr_lens_design** out);
MR_API int mr_design_nx(const mr_lens_design* d);
MR_API int mr_design_ny(const mr_lens_design* d);
MR_API double mr_design_diameter(const mr_lens_design* d, int i, int j);
MR_API double mr_design_residual(const mr_lens_design* d, int i, int j);
MR_API double mr_design_max_residual(const mr_lens_design* d);
MR_API int mr_design_n_warnings(const mr_lens_design* d);
MR_API const char* mr_design_warning(const mr_lens_design* d, int i);
MR_API mr_status mr_design_export_layout(const mr_lens_design* d, const char* csv_path);
MR_API mr_status mr_design_export_residuals(const mr_lens_design* d, const char* pgm_path);
MR_API void mr_design_free(mr_lens_design* d);

/* ---- compression study ------------------------------------------------- */

MR_API mr_status mr_digit_scene(int width, int height, int glyph_h, int glyph_w, uint64_t seed,
                                mr_image** out);
MR_API mr_status mr_average_pool(const mr_image* img, int k, mr_image** out);

typedef enum mr_compression_method { MR_COMPRESS_RADON = 0, MR_COMPRESS_AVGPOOL = 1 } mr_compression_method;

typedef struct mr_compression_result {
  mr_compression_method method;
  long long captured_pixels;
  long long reconstructed_pixels;
  double ratio;
  double psnr;
  double ssim;
} mr_compression_result;

typedef struct mr_study_options {
  int use_sart;        /* 0: FBP (default), 1: SART with nonnegativity */
  mr_fbp_filter filter;
  int sart_iterations;
  int n_detectors;     /* <= 0: scene width */
} mr_study_options;

MR_API void mr_study_options_default(mr_study_options* opts);
/* Any of the image / sinogram outputs may be NULL. */
MR_API mr_status mr_compression_study(const mr_image* scene, int n_angles, int pool_k,
                                      const mr_study_options* opts,
                                      mr_compression_result* radon,
                                      mr_compression_result* pool, mr_image** radon_image,
                                      mr_image** pool_image, mr_sinogram** sinogram);

/* ---- classification ---------------------------------------------------- */

typedef enum mr_feature_domain { MR_DOMAIN_RADON = 0, MR_DOMAIN_PIXEL = 1 } mr_feature_domain;

typedef struct mr_dataset_spec {
  int n_train;
  int n_test;
  int pad;
  int target_dim;
  int n_angles;
  int augment; /* random affine on/off */
  double rot_deg;
  double translate_lo;
  double translate_hi;
  double scale_lo;
  double scale_hi;
  int augment_test;
  double noise_frac;
  uint64_t seed;
  mr_feature_domain domain;
  mr_radon_method method;
} mr_dataset_spec;

MR_API void mr_dataset_spec_default(mr_dataset_spec* spec);
/* Reads the four standard MNIST IDX files from mnist_dir. */
MR_API mr_status mr_dataset_build(const char* mnist_dir, const mr_dataset_spec* spec,
                                  mr_dataset** train, mr_dataset** test);
/* split 0: training images (augmented), 1: test images (augmented if augment_test). */
MR_API mr_status mr_dataset_build_split(const char* mnist_dir, const mr_dataset_spec* spec,
                                        int split, mr_dataset** out);
MR_API mr_status mr_dataset_from_arrays(int n, int n_features, const double* features,
                                        const int* labels, mr_dataset** out);
/* held_out receives floor(n * frac) rows. */
MR_API mr_status mr_dataset_split(const mr_dataset* ds, double frac, uint64_t seed,
                                  mr_dataset** keep, mr_dataset** held_out);
MR_API int mr_dataset_size(const mr_dataset* ds);
MR_API int mr_dataset_n_features(const mr_dataset* ds);
MR_API const double* mr_dataset_features(const mr_dataset* ds);
MR_API const int* mr_dataset_labels(const mr_dataset* ds);
MR_API void mr_dataset_free(mr_dataset* ds);

typedef struct mr_train_config {
  int epochs;
  double learning_rate;
  double l2;
  int batch_size;
  int n_classes;
  uint64_t seed;
} mr_train_config;

MR_API void mr_train_config_default(mr_train_config* cfg);
/* epoch_loss may be NULL, else receives cfg->epochs values. */
MR_API mr_status mr_train(const mr_dataset* ds, const mr_train_config* cfg, mr_model** out,
                          double* epoch_loss);
MR_API void mr_model_set_shape(mr_model* m, int n_angles, int n_detectors);
MR_API int mr_model_n_classes(const mr_model* m);
MR_API int mr_model_n_features(const mr_model* m);
MR_API mr_status mr_model_save(const mr_model* m, const char* path);
MR_API mr_status mr_model_load(const char* path, mr_model** out);
MR_API void mr_model_free(mr_model* m);
/* confusion receives n_classes * n_classes counts, [true][predicted]; may be NULL. */
MR_API mr_status mr_evaluate(const mr_model* m, const mr_dataset* ds, double* accuracy,
                             long long* confusion);
MR_API mr_status mr_confusion_save_csv(const long long* counts, int n_classes, const char* path);
MR_API mr_status mr_confusion_heatmap(const long long* counts, int n_classes, mr_image** out);

#ifdef __cplusplus
}
#endif

#endif /* METARADON_H */
