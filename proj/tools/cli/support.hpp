#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "metaradon/metaradon.h"

namespace cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitIo = 3;

class CliError : public std::runtime_error {
 public:
  CliError(int code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

[[noreturn]] void validation(const std::string& msg);
[[noreturn]] void io_error(const std::string& msg);

int exit_code_for(mr_status s);
// Throws CliError carrying mr_last_error() when s is not MR_OK.
void check(mr_status s);

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

using Image = std::unique_ptr<mr_image, Deleter<mr_image, mr_image_free>>;
using Sinogram = std::unique_ptr<mr_sinogram, Deleter<mr_sinogram, mr_sinogram_free>>;
using Report = std::unique_ptr<mr_recon_report, Deleter<mr_recon_report, mr_report_free>>;
using Library = std::unique_ptr<mr_pillar_library, Deleter<mr_pillar_library, mr_library_free>>;
using Design = std::unique_ptr<mr_lens_design, Deleter<mr_lens_design, mr_design_free>>;
using Dataset = std::unique_ptr<mr_dataset, Deleter<mr_dataset, mr_dataset_free>>;
using Model = std::unique_ptr<mr_model, Deleter<mr_model, mr_model_free>>;

std::string sha256_file(const std::filesystem::path& path);

class Manifest {
 public:
  Manifest(std::string subcommand, std::vector<std::string> argv);

  void set_seed(std::optional<std::uint64_t> seed) { seed_ = seed; }
  void set_threads(int n) { threads_ = n; }
  void set_config(std::string path) { config_ = std::move(path); }
  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  // Digests are taken here, from the bytes on disk.
  void write(const std::filesystem::path& path) const;

 private:
  std::string subcommand_;
  std::vector<std::string> argv_;
  std::optional<std::uint64_t> seed_;
  int threads_ = 0;
  std::string config_;
  std::vector<std::filesystem::path> inputs_;
  std::vector<std::filesystem::path> outputs_;
  std::chrono::steady_clock::time_point start_;
};

// Plain key=value lines; '#' starts a comment. Keys may carry a leading "--".
std::map<std::string, std::string> read_config(const std::filesystem::path& path);

// Parses "AxB" into two numbers.
std::pair<double, double> parse_pair(const std::string& text, char sep, const std::string& what);

std::string format_double(double v);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace cli
