#pragma once

#include <stdexcept>
#include <string>

namespace oodgate {

// Coarse failure classes. The CLI maps them onto exit codes
// (data -> 2, numerical -> 3); usage problems never reach the library.
enum class ErrorKind { data, numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error data_error(const std::string& what) {
  return Error(ErrorKind::data, what);
}

inline Error numerical_error(const std::string& what) {
  return Error(ErrorKind::numerical, what);
}

// Re-raises `e` with a "stage: " prefix, keeping its kind.
[[noreturn]] inline void rethrow_tagged(const std::string& stage, const Error& e) {
  throw Error(e.kind(), stage + ": " + e.what());
}

}  // namespace oodgate
