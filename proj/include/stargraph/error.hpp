#pragma once

#include <stdexcept>
#include <string>

namespace stargraph {

enum class ErrorCode {
  invalid_parameter,
  numeric_failure,
  domain_truncation_violation,
  checkpoint_version_mismatch,
  checkpoint_corrupt_header,
  checkpoint_shape_mismatch,
  io_failure,
};

const char* to_string(ErrorCode code) noexcept;

/// Library error. Every failure path carries a code so callers (and the CLI
/// exit status) can tell a bad argument from a certificate breach.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when mass reaches the far end of a truncated edge (or the rim of
/// a periodic line domain). `time` is the first checked time that failed.
class TruncationViolation : public Error {
 public:
  TruncationViolation(double time, double far_mass, double threshold);

  double time() const noexcept { return time_; }
  double far_mass() const noexcept { return far_mass_; }

 private:
  double time_;
  double far_mass_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::invalid_parameter, what);
}

}  // namespace stargraph
