#pragma once

#include <stdexcept>
#include <string>

namespace shelab {

// Numeric values are part of the C ABI (see shelab.h); append only.
enum class ErrorCode : int {
  Ok = 0,
  InvalidArgument = 1,
  Resolution = 2,
  Extent = 3,
  Underflow = 4,
  Divergent = 5,
  Inconclusive = 6,
  Nonconvergence = 7,
  Unsupported = 8,
  IllPosed = 9,
  NoCrossing = 10,
  Instability = 11,
  SizeLimit = 12,
  Io = 13,
  Config = 14,
  Internal = 15,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace shelab
