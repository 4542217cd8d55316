#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "metaradon/metrics.hpp"
#include "metaradon/projector.hpp"
#include "metaradon/reconstruction.hpp"
#include "error_kind.hpp"
#include "phantoms.hpp"

using namespace metaradon;
using testing_util::kind_of;

namespace {

Sinogram project(const ImageGrid& img, int n_angles) {
  return forward_apply(img, ProjectionGeometry::for_image(img.width(), img.height(),
                                                          make_uniform_angles(n_angles)));
}

SartConfig iters(int n) {
  SartConfig cfg;
  cfg.n_iterations = n;
  cfg.snapshot_iters = {};
  return cfg;
}

}  // namespace

TEST(Sart, ZeroSinogramGivesZeroImage) {
  const auto sino = project(ImageGrid(16, 16), 20);
  SartConfig cfg = iters(5);
  cfg.nonnegativity = true;
  const auto res = sart(sino, cfg);
  for (double v : res.image.data()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(res.report.residuals.size(), 5u);
}

TEST(Sart, DiskReachesGoldenPsnr) {
  const auto disk = testing_util::disk_phantom(32, 0.6);
  const auto res = sart(project(disk, 60), iters(100));
  EXPECT_GE(psnr(res.image, disk), 25.0);
}

TEST(Sart, ResidualPlateausBetween100And150) {
  // Data from the rotation projector: the small model mismatch sets a floor.
  const auto disk = testing_util::disk_phantom(32, 0.6);
  const auto sino = radon(disk, ProjectionGeometry::for_image(32, 32, make_uniform_angles(60)),
                          RadonMethod::RotateSum);
  const auto res = sart(sino, iters(150));
  const double r100 = res.report.residuals[99];
  const double r150 = res.report.residuals[149];
  EXPECT_LT(std::abs(r150 - r100) / r100, 0.01);
}

TEST(Sart, ResidualNonIncreasingOnConsistentData) {
  const auto img = testing_util::smooth_phantom(24);
  const auto res = sart(project(img, 30), iters(40));
  double prev = res.report.initial_residual;
  for (double r : res.report.residuals) {
    EXPECT_LE(r, prev + 1e-9);
    prev = r;
  }
}

TEST(Sart, SmallCompleteSystemConverges) {
  const auto img = testing_util::random_image(8, 8, 11);
  const auto res = sart(project(img, 90), iters(200));
  EXPECT_LT(res.report.residuals.back(), 1e-3 * res.report.initial_residual);
}

TEST(Sart, NonnegativityNeverIncreasesResidual) {
  const auto img = testing_util::disk_phantom(24, 0.7);
  const auto sino = project(img, 24);
  SartConfig cfg = iters(30);
  cfg.nonnegativity = true;
  const auto res = sart(sino, cfg);
  double prev = res.report.initial_residual;
  for (double r : res.report.residuals) {
    EXPECT_LE(r, prev + 1e-9);
    prev = r;
  }
  for (double v : res.image.data()) EXPECT_GE(v, 0.0);
}

TEST(Sart, SnapshotsAtRequestedIterations) {
  const auto sino = project(testing_util::disk_phantom(16), 12);
  SartConfig cfg;
  cfg.n_iterations = 25;
  cfg.snapshot_iters = {1, 20, 100};
  const auto res = sart(sino, cfg);
  ASSERT_EQ(res.report.snapshots.size(), 2u);
  EXPECT_EQ(res.report.snapshots[0].iteration, 1);
  EXPECT_EQ(res.report.snapshots[1].iteration, 20);
}

TEST(Sart, ShuffledIsDeterministicPerSeed) {
  const auto sino = project(testing_util::smooth_phantom(20), 18);
  SartConfig cfg = iters(6);
  cfg.ordering = AngleOrder::Shuffled;
  cfg.seed = 42;
  const auto a = sart(sino, cfg);
  const auto b = sart(sino, cfg);
  ASSERT_EQ(a.image.data().size(), b.image.data().size());
  for (std::size_t i = 0; i < a.image.data().size(); ++i)
    EXPECT_EQ(a.image.data()[i], b.image.data()[i]);
  cfg.seed = 43;
  const auto c = sart(sino, cfg);
  EXPECT_NE(mse(a.image, c.image), 0.0);
}

TEST(Sart, RejectsBadConfigAndData) {
  auto sino = project(testing_util::disk_phantom(8), 4);
  SartConfig cfg;
  cfg.relaxation = 2.0;
  EXPECT_EQ(kind_of([&] { sart(sino, cfg); }), ErrorKind::Validation);
  cfg.relaxation = 1.0;
  cfg.n_iterations = 0;
  EXPECT_EQ(kind_of([&] { sart(sino, cfg); }), ErrorKind::Validation);
  sino.projection(1)[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(kind_of([&] { sart(sino, iters(2)); }), ErrorKind::Data);
}

TEST(Sart, FlagsPixelsOutsideDetectorCircle) {
  const auto img = testing_util::disk_phantom(16);
  auto geom = ProjectionGeometry::for_image(16, 16, make_uniform_angles(8), 10);
  const auto res = sart(forward_apply(img, geom), iters(1));
  EXPECT_GT(res.report.outside_support_pixels, 0);
  const auto full = sart(project(img, 8), iters(1));
  EXPECT_EQ(full.report.outside_support_pixels, 0);
}

TEST(Fbp, DiskReachesGoldenPsnr) {
  const auto disk = testing_util::disk_phantom(128, 0.6);
  const auto sino =
      radon(disk, ProjectionGeometry::for_image(128, 128, make_uniform_angles(180)),
            RadonMethod::RotateSum);
  EXPECT_GE(psnr(fbp(sino, FbpFilter::RamLak), disk), 25.0);
}

TEST(Fbp, UnfilteredBackProjectionIsWorse) {
  const auto disk = testing_util::disk_phantom(64, 0.6);
  const auto sino = project(disk, 90);
  EXPECT_LT(psnr(fbp(sino, FbpFilter::None), disk), psnr(fbp(sino, FbpFilter::RamLak), disk));
}

TEST(Fbp, ZeroSinogramGivesZeroImage) {
  const auto out = fbp(project(ImageGrid(16, 16), 10));
  for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(Fbp, SingleAngleIsInsufficient) {
  EXPECT_EQ(kind_of([] { fbp(project(testing_util::disk_phantom(8), 1)); }),
            ErrorKind::InsufficientData);
}

TEST(Fbp, PsnrGrowsWithAngleCount) {
  const auto disk = testing_util::disk_phantom(64, 0.6);
  double prev = -std::numeric_limits<double>::infinity();
  for (int n : {10, 45, 90, 180}) {
    const double p = psnr(fbp(project(disk, n)), disk);
    EXPECT_GT(p, prev) << n << " angles";
    prev = p;
  }
}

TEST(Fbp, FilterNamesParse) {
  EXPECT_EQ(parse_fbp_filter("ram-lak"), FbpFilter::RamLak);
  EXPECT_EQ(parse_fbp_filter("shepp-logan"), FbpFilter::SheppLogan);
  EXPECT_EQ(parse_fbp_filter("none"), FbpFilter::None);
  EXPECT_EQ(kind_of([] { parse_fbp_filter("hann"); }), ErrorKind::Validation);
}

TEST(Metrics, IdenticalImagesGiveInfinitePsnr) {
  const auto img = testing_util::random_image(12, 12, 1);
  EXPECT_TRUE(std::isinf(psnr(img, img)));
  EXPECT_NEAR(ssim(img, img), 1.0, 1e-12);
}

TEST(Metrics, ConstantHalfOffsetIsSixDecibels) {
  ImageGrid a(16, 16, 0.0), b(16, 16, 0.5);
  EXPECT_NEAR(psnr(a, b), 10.0 * std::log10(4.0), 1e-12);
}

TEST(Metrics, SsimDropsWithNoiseAndChecksDims) {
  const auto img = testing_util::smooth_phantom(32);
  auto noisy = img;
  auto n = testing_util::random_image(32, 32, 5);
  for (std::size_t i = 0; i < noisy.data().size(); ++i) noisy.data()[i] += 0.2 * (n.data()[i] - 0.5);
  const double s = ssim(img, noisy);
  EXPECT_LT(s, 0.95);
  EXPECT_GT(s, 0.0);
  EXPECT_EQ(kind_of([&] { psnr(img, ImageGrid(31, 32)); }), ErrorKind::Dimension);
  EXPECT_EQ(kind_of([&] { ssim(img, ImageGrid(31, 32)); }), ErrorKind::Dimension);
}
