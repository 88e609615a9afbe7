#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace osilab {

enum class ErrorCode {
  RankDeficient,
  NoConvergence,
  BadRank,
  BadExponent,
  NotOrthonormal,
  BadParams,
  BadTau,
  TooFewTrials,
  UnknownPreset,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::BadRank: return "BadRank";
    case ErrorCode::BadExponent: return "BadExponent";
    case ErrorCode::NotOrthonormal: return "NotOrthonormal";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::BadTau: return "BadTau";
    case ErrorCode::TooFewTrials: return "TooFewTrials";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
  }
  return "Unknown";
}

/// Every recoverable failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

namespace detail {

inline void require(bool cond, ErrorCode code, const char* what) {
  if (!cond) throw Error(code, what);
}

}  // namespace detail
}  // namespace osilab
