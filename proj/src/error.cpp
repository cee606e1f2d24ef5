#include "shelab/error.hpp"

namespace shelab {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Ok: return "ok";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::Resolution: return "resolution";
    case ErrorCode::Extent: return "extent";
    case ErrorCode::Underflow: return "underflow";
    case ErrorCode::Divergent: return "divergent";
    case ErrorCode::Inconclusive: return "inconclusive";
    case ErrorCode::Nonconvergence: return "nonconvergence";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::IllPosed: return "ill-posed";
    case ErrorCode::NoCrossing: return "no-crossing";
    case ErrorCode::Instability: return "instability";
    case ErrorCode::SizeLimit: return "size-limit";
    case ErrorCode::Io: return "io";
    case ErrorCode::Config: return "config";
    case ErrorCode::Internal: return "internal";
  }
  return "unknown";
}

}  // namespace shelab
