#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gaitscreen {

// Error taxonomy shared by every module. The C API maps these one-to-one
// onto gs_status values, so keep the order in sync with gaitscreen.h.
enum class ErrorCode {
  InvalidArgument = 1,
  Io,
  WrongColumnCount,
  NonMonotonicTime,
  EmptyFile,
  MalformedName,
  ScoreOutOfRange,
  BadTimestamp,
  ConflictingScore,
  EmptyDataset,
  UnknownCow,
  EvenOrder,
  OrderExceedsLength,
  TooShort,
  CutoffOutOfRange,
  EmptySignal,
  BadDimensions,
  DimensionMismatch,
  SingleClass,
  NonFiniteFeature,
  TooFewCows,
  EmptyConfusion,
  BadSpec,
  Config,
  Format,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(error_code_name(code)) + ": " + what);
}

}  // namespace gaitscreen
