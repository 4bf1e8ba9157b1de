#pragma once

#include <stdexcept>
#include <string>

namespace fictdet {

// Error categories. Mirrored one-to-one by fd_status in the C API.
enum class ErrorCode {
  InvalidArgument = 1,
  Io = 2,
  Parse = 3,
  VocabularyMismatch = 4,
  Numeric = 5,
  Transport = 6,
  MissingInput = 7,
  Internal = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace fictdet
