#include "refnet/error.hpp"

namespace refnet {

const char* ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kNotFactorable: return "mask not factorable by (1+z)";
    case ErrorCode::kNotConvergent: return "mask fails the convergence condition";
    case ErrorCode::kUnsupportedDegree: return "unsupported degree";
    case ErrorCode::kDomain: return "argument outside domain";
    case ErrorCode::kDegreeTooSmall: return "B smaller than activation degree";
    case ErrorCode::kNotRefinable: return "activation not refinable";
    case ErrorCode::kNoFollowingLayer: return "no following layer";
    case ErrorCode::kEmptyDataset: return "empty dataset";
    case ErrorCode::kPositionOutOfRange: return "position out of range";
    case ErrorCode::kEmptyArchitecture: return "empty architecture";
  }
  return "unknown error";
}

}  // namespace refnet
