#include "metaradon/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "metaradon/error.hpp"

namespace metaradon {

namespace {
void check_same(const ImageGrid& a, const ImageGrid& b) {
  if (a.width() != b.width() || a.height() != b.height())
    fail(ErrorKind::Dimension, "metric operands differ in size");
}
}  // namespace

double mse(const ImageGrid& a, const ImageGrid& b) {
  check_same(a, b);
  auto x = a.data();
  auto y = b.data();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return s / static_cast<double>(x.size());
}

double psnr(const ImageGrid& a, const ImageGrid& b) {
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / m);
}

double ssim(const ImageGrid& a, const ImageGrid& b) {
  check_same(a, b);
  const int w = a.width();
  const int h = a.height();
  int win = std::min({11, w, h});
  if (win % 2 == 0) --win;
  const int half = win / 2;
  const double sigma = 1.5;
  std::vector<double> g(static_cast<std::size_t>(win));
  double gs = 0.0;
  for (int i = 0; i < win; ++i) {
    const double t = i - half;
    g[i] = std::exp(-t * t / (2 * sigma * sigma));
    gs += g[i];
  }
  for (double& v : g) v /= gs;

  const int ow = w - win + 1;
  const int oh = h - win + 1;
  // Valid separable filtering: horizontal pass then vertical pass.
  auto filter = [&](const std::vector<double>& src) {
    std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < ow; ++c) {
        double s = 0.0;
        for (int i = 0; i < win; ++i) s += g[i] * src[static_cast<std::size_t>(r) * w + c + i];
        tmp[static_cast<std::size_t>(r) * ow + c] = s;
      }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int r = 0; r < oh; ++r)
      for (int c = 0; c < ow; ++c) {
        double s = 0.0;
        for (int i = 0; i < win; ++i) s += g[i] * tmp[static_cast<std::size_t>(r + i) * ow + c];
        out[static_cast<std::size_t>(r) * ow + c] = s;
      }
    return out;
  };

  const std::vector<double> x(a.data().begin(), a.data().end());
  const std::vector<double> y(b.data().begin(), b.data().end());
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mx = filter(x), my = filter(y), sxx = filter(xx), syy = filter(yy),
             sxy = filter(xy);
  const double c1 = 0.01 * 0.01;
  const double c2 = 0.03 * 0.03;
  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cxy = sxy[i] - mx[i] * my[i];
    total += ((2 * mx[i] * my[i] + c1) * (2 * cxy + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.size());
}

}  // namespace metaradon
