#pragma once

#include "metaradon/image.hpp"

namespace metaradon {

double mse(const ImageGrid& a, const ImageGrid& b);

// 10 log10(1 / MSE) for [0,1] images; +infinity when the images are equal.
double psnr(const ImageGrid& a, const ImageGrid& b);

// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
// L = 1, over positions where the window fits. Images smaller than 11 pixels
// use the largest odd window that fits.
double ssim(const ImageGrid& a, const ImageGrid& b);

}  // namespace metaradon
