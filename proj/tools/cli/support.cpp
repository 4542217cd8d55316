#include "support.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

namespace cli {

void validation(const std::string& msg) { throw CliError(kExitValidation, msg); }
void io_error(const std::string& msg) { throw CliError(kExitIo, msg); }

int exit_code_for(mr_status s) {
  switch (s) {
    case MR_OK: return kExitOk;
    case MR_ERR_IO: return kExitIo;
    case MR_ERR_INTERNAL: return kExitInternal;
    default: return kExitValidation;
  }
}

void check(mr_status s) {
  if (s == MR_OK) return;
  throw CliError(exit_code_for(s), std::string(mr_status_name(s)) + " error: " + mr_last_error());
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_error("cannot read " + path.string() + " for digest");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

Manifest::Manifest(std::string subcommand, std::vector<std::string> argv)
    : subcommand_(std::move(subcommand)),
      argv_(std::move(argv)),
      start_(std::chrono::steady_clock::now()) {}

void Manifest::add_input(const std::filesystem::path& path) { inputs_.push_back(path); }
void Manifest::add_output(const std::filesystem::path& path) { outputs_.push_back(path); }

void Manifest::write(const std::filesystem::path& path) const {
  using nlohmann::ordered_json;
  auto files = [](const std::vector<std::filesystem::path>& list) {
    ordered_json arr = ordered_json::array();
    for (const auto& p : list)
      arr.push_back({{"path", p.generic_string()},
                     {"bytes", std::filesystem::file_size(p)},
                     {"sha256", sha256_file(p)}});
    return arr;
  };
  ordered_json j;
  j["subcommand"] = subcommand_;
  j["argv"] = argv_;
  j["seed"] = seed_ ? ordered_json(*seed_) : ordered_json(nullptr);
  j["tool_version"] = mr_version();
  j["format_versions"] = mr_format_versions();
  j["threads"] = threads_;
  j["config"] = config_.empty() ? ordered_json(nullptr) : ordered_json(config_);
  j["inputs"] = files(inputs_);
  j["outputs"] = files(outputs_);
  j["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  write_text(path, j.dump(2) + "\n");
}

namespace {
std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}
}  // namespace

std::map<std::string, std::string> read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) io_error("cannot open config file " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      validation(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    if (key.empty()) validation(path.string() + ":" + std::to_string(lineno) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::pair<double, double> parse_pair(const std::string& text, char sep, const std::string& what) {
  const auto p = text.find(sep);
  if (p == std::string::npos) validation(what + " must look like A" + sep + "B, got '" + text + "'");
  try {
    std::size_t n1 = 0, n2 = 0;
    const std::string a = text.substr(0, p), b = text.substr(p + 1);
    const double x = std::stod(a, &n1);
    const double y = std::stod(b, &n2);
    if (n1 != a.size() || n2 != b.size()) throw std::invalid_argument(text);
    return {x, y};
  } catch (const std::exception&) {
    validation(what + " must look like A" + sep + "B, got '" + text + "'");
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) io_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) io_error("write failed for " + path.string());
}

}  // namespace cli
