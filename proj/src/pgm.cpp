#include "metaradon/pgm.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "metaradon/error.hpp"

namespace metaradon {

namespace {

class HeaderReader {
 public:
  HeaderReader(const std::vector<unsigned char>& bytes, std::size_t base)
      : b_(bytes), base_(base) {}

  std::size_t pos() const { return pos_; }

  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      const unsigned char c = b_[pos_];
      if (c == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  unsigned long read_uint(const char* field) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    unsigned long v = 0;
    while (pos_ < b_.size() && std::isdigit(b_[pos_])) {
      v = v * 10 + (b_[pos_] - '0');
      if (v > 1'000'000'000ul) break;
      ++pos_;
    }
    if (pos_ == start)
      fail(ErrorKind::Parse, std::string("PGM: expected ") + field + " at byte offset " +
                                 std::to_string(start + base_));
    return v;
  }

 private:
  const std::vector<unsigned char>& b_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

}  // namespace

ImageGrid parse_pgm(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P')
    fail(ErrorKind::Format, "not a PGM file (missing 'P' magic at byte offset 0)");
  const bool ascii = bytes[1] == '2';
  if (!ascii && bytes[1] != '5')
    fail(ErrorKind::Format, std::string("unsupported netpbm magic 'P") +
                                static_cast<char>(bytes[1]) + "' (only P2 and P5 are read)");

  // Offsets reported in errors are relative to the start of the file.
  std::vector<unsigned char> tail(bytes.begin() + 2, bytes.end());
  HeaderReader h(tail, 2);
  auto offset = [&](std::size_t p) { return p + 2; };
  if (tail.empty() || !std::isspace(tail[0]))
    fail(ErrorKind::Parse, "PGM: expected whitespace after magic at byte offset 2");

  const unsigned long width = h.read_uint("width");
  const unsigned long height = h.read_uint("height");
  const std::size_t maxval_pos = h.pos();
  const unsigned long maxval = h.read_uint("maxval");
  if (width == 0 || height == 0 || width > 1'000'000ul || height > 1'000'000ul)
    fail(ErrorKind::Parse, "PGM: invalid dimensions near byte offset " +
                               std::to_string(offset(maxval_pos)));
  if (maxval == 0 || maxval > 65535)
    fail(ErrorKind::Parse, "PGM: maxval must be in 1..65535 at byte offset " +
                               std::to_string(offset(maxval_pos)));

  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<double> data(n);
  const double scale = 1.0 / static_cast<double>(maxval);

  if (ascii) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t at = h.pos();
      const unsigned long v = h.read_uint("pixel value");
      if (v > maxval)
        fail(ErrorKind::Parse, "PGM: pixel value exceeds maxval at byte offset " +
                                   std::to_string(offset(at)));
      data[i] = static_cast<double>(v) * scale;
    }
  } else {
    std::size_t p = h.pos();
    if (p >= tail.size() || !std::isspace(tail[p]))
      fail(ErrorKind::Parse, "PGM: expected single whitespace before raster at byte offset " +
                                 std::to_string(offset(p)));
    ++p;
    const std::size_t bps = maxval > 255 ? 2 : 1;
    if (tail.size() - p < n * bps)
      fail(ErrorKind::Parse, "PGM: raster truncated at byte offset " +
                                 std::to_string(offset(tail.size())) + " (need " +
                                 std::to_string(n * bps) + " bytes from offset " +
                                 std::to_string(offset(p)) + ")");
    for (std::size_t i = 0; i < n; ++i) {
      unsigned long v = tail[p + i * bps];
      if (bps == 2) v = (v << 8) | tail[p + i * bps + 1];
      if (v > maxval)
        fail(ErrorKind::Parse, "PGM: pixel value exceeds maxval at byte offset " +
                                   std::to_string(offset(p + i * bps)));
      data[i] = static_cast<double>(v) * scale;
    }
  }
  return ImageGrid(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

ImageGrid load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open image '" + path.string() + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return parse_pgm(bytes);
}

std::vector<unsigned char> encode_pgm(const ImageGrid& img, int depth, bool clamp) {
  require(depth == 8 || depth == 16, "PGM depth must be 8 or 16");
  require(!img.empty(), "cannot encode an empty image");
  const unsigned maxval = depth == 8 ? 255u : 65535u;
  const std::string header = "P5\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n" + std::to_string(maxval) +
                             "\n";
  const std::size_t bps = depth / 8;
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(header.size() + img.size() * bps);
  for (double v : img.data()) {
    if (!std::isfinite(v)) fail(ErrorKind::Range, "non-finite intensity cannot be saved");
    if (v < 0.0 || v > 1.0) {
      if (!clamp)
        fail(ErrorKind::Range, "intensity " + std::to_string(v) +
                                   " outside [0,1]; pass clamp to saturate");
      v = v < 0.0 ? 0.0 : 1.0;
    }
    // round half up
    const unsigned q = static_cast<unsigned>(std::floor(v * maxval + 0.5));
    if (bps == 2) out.push_back(static_cast<unsigned char>(q >> 8));
    out.push_back(static_cast<unsigned char>(q & 0xFF));
  }
  return out;
}

void save_pgm(const ImageGrid& img, const std::filesystem::path& path, int depth,
              bool clamp) {
  const auto bytes = encode_pgm(img, depth, clamp);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot create image '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

}  // namespace metaradon
