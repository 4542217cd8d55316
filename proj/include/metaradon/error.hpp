#pragma once

#include <stdexcept>
#include <string>

namespace metaradon {

enum class ErrorKind {
  Validation,        // argument or invariant violation
  Io,                // file cannot be opened, read or written
  Parse,             // malformed file content
  Format,            // unsupported magic / format variant
  Dimension,         // shape mismatch between operands
  Data,              // non-finite or otherwise unusable numeric data
  Range,             // value outside the representable range of a format
  InsufficientData,  // not enough samples for the requested operation
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::Validation, what);
}

}  // namespace metaradon
