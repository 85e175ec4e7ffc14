#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace treeweyl {

using cplx = std::complex<double>;

// Error with a stable machine-readable code ("CycleDetected", "RankDeficient",
// ...) next to the human-readable message. Codes are listed per operation in
// the docs; the CLI maps input-side codes to exit 2 and numeric ones to exit 3.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& msg)
      : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& msg) {
  throw Error(code, msg);
}

inline void require(bool ok, const std::string& code, const std::string& msg) {
  if (!ok) fail(code, msg);
}

}  // namespace treeweyl
