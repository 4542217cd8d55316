#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "metaradon/metaradon.h"

namespace {

std::string tmp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "metaradon_c_api";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

mr_image* square(int n, double v) {
  std::vector<double> px(static_cast<std::size_t>(n) * n, 0.0);
  for (int r = n / 4; r < 3 * n / 4; ++r)
    for (int c = n / 4; c < 3 * n / 4; ++c) px[static_cast<std::size_t>(r) * n + c] = v;
  mr_image* img = nullptr;
  EXPECT_EQ(mr_image_create(n, n, px.data(), &img), MR_OK);
  return img;
}

}  // namespace

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STREQ(mr_version(), "1.0.0");
  EXPECT_NE(std::strstr(mr_format_versions(), "RSG1/1"), nullptr);
  EXPECT_STREQ(mr_status_name(MR_ERR_IO), "io");
  EXPECT_STREQ(mr_status_name(MR_OK), "ok");
}

TEST(CApi, NullArgumentsAreValidationErrors) {
  mr_image* img = nullptr;
  EXPECT_EQ(mr_image_create(4, 4, nullptr, &img), MR_OK);
  EXPECT_EQ(mr_image_create(4, 4, nullptr, nullptr), MR_ERR_VALIDATION);
  EXPECT_NE(std::strlen(mr_last_error()), 0u);
  EXPECT_EQ(mr_radon(nullptr, nullptr, 0, 0, MR_RADON_RAY, nullptr), MR_ERR_VALIDATION);
  mr_image_free(img);
  mr_image_free(nullptr);
  mr_sinogram_free(nullptr);
  mr_report_free(nullptr);
}

TEST(CApi, ImageIoAndErrors) {
  mr_image* img = square(8, 0.5);
  const auto path = tmp_path("sq.pgm");
  ASSERT_EQ(mr_image_save(img, path.c_str(), 8, 0), MR_OK);
  mr_image* back = nullptr;
  ASSERT_EQ(mr_image_load(path.c_str(), &back), MR_OK);
  EXPECT_EQ(mr_image_width(back), 8);
  EXPECT_NEAR(mr_image_data(back)[2 * 8 + 2], 128.0 / 255.0, 1e-12);
  EXPECT_EQ(mr_image_load("/nonexistent/x.pgm", &back), MR_ERR_IO);
  std::vector<double> hot(4, 2.0);
  mr_image* bright = nullptr;
  ASSERT_EQ(mr_image_create(2, 2, hot.data(), &bright), MR_OK);
  EXPECT_EQ(mr_image_save(bright, path.c_str(), 8, 0), MR_ERR_RANGE);
  EXPECT_EQ(mr_image_save(bright, path.c_str(), 8, 1), MR_OK);
  mr_image_free(bright);
  mr_image_free(back);
  mr_image_free(img);
}

TEST(CApi, RadonRoundTripThroughRsg) {
  mr_image* img = square(16, 1.0);
  std::vector<double> angles(30);
  ASSERT_EQ(mr_uniform_angles(30, 0.0, 180.0, angles.data()), MR_OK);
  mr_sinogram* s = nullptr;
  ASSERT_EQ(mr_radon(img, angles.data(), 30, 0, MR_RADON_FFTDC, &s), MR_OK);
  EXPECT_EQ(mr_sinogram_n_detectors(s), mr_auto_detector_count(16, 16));
  double mass = 0.0;
  for (int k = 0; k < mr_sinogram_n_detectors(s); ++k) mass += mr_sinogram_data(s)[k];
  EXPECT_NEAR(mass, 64.0, 1e-9);
  const auto path = tmp_path("s.rsg");
  ASSERT_EQ(mr_sinogram_save(s, path.c_str()), MR_OK);
  mr_sinogram* back = nullptr;
  ASSERT_EQ(mr_sinogram_load(path.c_str(), 0, 0, &back), MR_OK);
  EXPECT_EQ(mr_sinogram_image_width(back), 16);
  EXPECT_EQ(mr_sinogram_n_angles(back), 30);
  EXPECT_NEAR(mr_sinogram_data(back)[40], mr_sinogram_data(s)[40], 1e-5);

  mr_image* rec = nullptr;
  ASSERT_EQ(mr_fbp(back, MR_FILTER_RAMLAK, &rec), MR_OK);
  double p = 0.0;
  ASSERT_EQ(mr_psnr(rec, img, &p), MR_OK);
  EXPECT_GT(p, 15.0);
  mr_image_free(rec);

  mr_sart_config cfg;
  mr_sart_config_default(&cfg);
  EXPECT_EQ(cfg.n_iterations, 100);
  EXPECT_EQ(cfg.n_snapshots, 4);
  const int snaps[] = {1, 3};
  cfg.n_iterations = 3;
  cfg.snapshot_iters = snaps;
  cfg.n_snapshots = 2;
  mr_recon_report* rep = nullptr;
  ASSERT_EQ(mr_sart(back, &cfg, &rec, &rep), MR_OK);
  EXPECT_EQ(mr_report_n_iterations(rep), 3);
  EXPECT_LT(mr_report_residual(rep, 2), mr_report_initial_residual(rep));
  ASSERT_EQ(mr_report_n_snapshots(rep), 2);
  int it = 0;
  EXPECT_NE(mr_report_snapshot(rep, 1, &it), nullptr);
  EXPECT_EQ(it, 3);
  EXPECT_EQ(mr_report_snapshot(rep, 5, &it), nullptr);
  mr_report_free(rep);
  mr_image_free(rec);

  mr_image* bp = nullptr;
  ASSERT_EQ(mr_adjoint(back, &bp), MR_OK);
  EXPECT_EQ(mr_image_height(bp), 16);
  mr_image_free(bp);
  mr_sinogram_free(back);
  mr_sinogram_free(s);
  mr_image_free(img);
}

TEST(CApi, ReconstructionErrorsMapToStatus) {
  const double angle = 0.0;
  std::vector<double> data(10, 1.0);
  mr_sinogram* s = nullptr;
  ASSERT_EQ(mr_sinogram_create(1, &angle, 10, 6, 6, data.data(), &s), MR_OK);
  mr_image* out = nullptr;
  EXPECT_EQ(mr_fbp(s, MR_FILTER_RAMLAK, &out), MR_ERR_INSUFFICIENT_DATA);
  mr_sinogram_free(s);
  data[3] = std::nan("");
  const double two[] = {0.0, 90.0};
  data.resize(20, 0.0);
  ASSERT_EQ(mr_sinogram_create(2, two, 10, 6, 6, data.data(), &s), MR_OK);
  mr_sart_config cfg;
  mr_sart_config_default(&cfg);
  EXPECT_EQ(mr_sart(s, &cfg, &out, nullptr), MR_ERR_DATA);
  mr_sinogram_free(s);
  EXPECT_EQ(mr_sinogram_load("/nonexistent.rsg", 0, 0, &s), MR_ERR_IO);
}

TEST(CApi, LensDesign) {
  mr_lens_spec spec{780e-9, 20e-6, 5e-6, 1e-6, 330e-9, MR_LENS_CYLINDRICAL};
  double phi = 1.0;
  ASSERT_EQ(mr_phase_profile(&spec, 0.0, 0.0, &phi), MR_OK);
  EXPECT_EQ(phi, 0.0);
  EXPECT_NEAR(mr_wrap_phase(-M_PI / 2), 3 * M_PI / 2, 1e-15);
  mr_pillar_library* lib = nullptr;
  ASSERT_EQ(mr_library_synthetic(64, &lib), MR_OK);
  EXPECT_EQ(mr_library_size(lib), 64);
  double d = 0, p = 0, a = 0;
  mr_library_entry(lib, 0, &d, &p, &a);
  EXPECT_DOUBLE_EQ(d, 70e-9);
  mr_lens_design* design = nullptr;
  ASSERT_EQ(mr_lens_quantize(&spec, lib, &design), MR_OK);
  EXPECT_EQ(mr_design_nx(design), 15);
  EXPECT_EQ(mr_design_ny(design), 3);
  EXPECT_EQ(mr_design_diameter(design, 4, 0), mr_design_diameter(design, 4, 2));
  EXPECT_LE(mr_design_max_residual(design), M_PI);
  EXPECT_EQ(mr_design_export_layout(design, tmp_path("layout.csv").c_str()), MR_OK);
  mr_design_free(design);
  mr_library_free(lib);

  const auto bad = tmp_path("bad_lib.csv");
  FILE* f = std::fopen(bad.c_str(), "w");
  std::fputs("diameter_nm,phase_rad,amplitude\n250,0.1,0.9\n", f);
  std::fclose(f);
  EXPECT_EQ(mr_library_load(bad.c_str(), &lib), MR_ERR_VALIDATION);
  EXPECT_NE(std::strstr(mr_last_error(), "200"), nullptr);
}

TEST(CApi, CompressionStudy) {
  mr_image* scene = nullptr;
  ASSERT_EQ(mr_digit_scene(48, 48, 7, 4, 3, &scene), MR_OK);
  mr_study_options opts;
  mr_study_options_default(&opts);
  mr_compression_result radon{}, pool{};
  mr_image* rimg = nullptr;
  ASSERT_EQ(mr_compression_study(scene, 8, 3, &opts, &radon, &pool, &rimg, nullptr, nullptr),
            MR_OK);
  EXPECT_EQ(radon.method, MR_COMPRESS_RADON);
  EXPECT_DOUBLE_EQ(radon.ratio, 8.0 / 48.0);
  EXPECT_DOUBLE_EQ(pool.ratio, 1.0 / 9.0);
  EXPECT_EQ(mr_image_width(rimg), 48);
  mr_image_free(rimg);
  mr_image* pooled = nullptr;
  ASSERT_EQ(mr_average_pool(scene, 3, &pooled), MR_OK);
  EXPECT_EQ(mr_image_width(pooled), 16);
  mr_image_free(pooled);
  mr_image_free(scene);
}

TEST(CApi, TrainEvaluateSaveLoad) {
  std::vector<double> x;
  std::vector<int> y;
  for (int i = 0; i < 60; ++i) {
    const int c = i % 3;
    x.push_back(c * 4.0 + 0.1 * (i % 5));
    x.push_back(-c * 3.0 + 0.05 * (i % 7));
    y.push_back(c);
  }
  mr_dataset* ds = nullptr;
  ASSERT_EQ(mr_dataset_from_arrays(60, 2, x.data(), y.data(), &ds), MR_OK);
  mr_dataset *keep = nullptr, *held = nullptr;
  ASSERT_EQ(mr_dataset_split(ds, 0.25, 1, &keep, &held), MR_OK);
  EXPECT_EQ(mr_dataset_size(held), 15);
  EXPECT_EQ(mr_dataset_size(keep), 45);
  mr_train_config cfg;
  mr_train_config_default(&cfg);
  cfg.n_classes = 3;
  cfg.epochs = 40;
  cfg.batch_size = 8;
  std::vector<double> loss(40);
  mr_model* m = nullptr;
  ASSERT_EQ(mr_train(keep, &cfg, &m, loss.data()), MR_OK);
  EXPECT_LT(loss.back(), loss.front());
  double acc = 0.0;
  std::vector<long long> cm(9);
  ASSERT_EQ(mr_evaluate(m, held, &acc, cm.data()), MR_OK);
  EXPECT_DOUBLE_EQ(acc, 1.0);
  const auto path = tmp_path("m.rcm");
  mr_model_set_shape(m, 1, 2);
  ASSERT_EQ(mr_model_save(m, path.c_str()), MR_OK);
  mr_model* back = nullptr;
  ASSERT_EQ(mr_model_load(path.c_str(), &back), MR_OK);
  EXPECT_EQ(mr_model_n_features(back), 2);
  EXPECT_EQ(mr_model_n_classes(back), 3);
  mr_image* heat = nullptr;
  ASSERT_EQ(mr_confusion_heatmap(cm.data(), 3, &heat), MR_OK);
  EXPECT_EQ(mr_image_width(heat), 3);
  EXPECT_EQ(mr_confusion_save_csv(cm.data(), 3, tmp_path("cm.csv").c_str()), MR_OK);
  mr_image_free(heat);
  mr_model_free(back);
  mr_model_free(m);
  mr_dataset_free(keep);
  mr_dataset_free(held);
  mr_dataset_free(ds);
}
