#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "metaradon/image.hpp"

namespace metaradon {

// Reads P2 (ASCII) or P5 (binary) PGM, maxval 1..65535. Intensities are
// divided by maxval.
ImageGrid load_pgm(const std::filesystem::path& path);
ImageGrid parse_pgm(const std::vector<unsigned char>& bytes);

// Writes binary P5 with maxval 255 (depth 8) or 65535 (depth 16). Values are
// quantized as floor(v * maxval + 0.5). Out-of-range input throws a Range
// error unless `clamp` is set.
void save_pgm(const ImageGrid& img, const std::filesystem::path& path, int depth = 8,
              bool clamp = false);
std::vector<unsigned char> encode_pgm(const ImageGrid& img, int depth = 8,
                                      bool clamp = false);

}  // namespace metaradon
