#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sitesel {

enum class Errc {
  // hierarchy
  EmptyInput,
  DuplicateCode,
  UnknownParent,
  LevelSkip,
  CycleDetected,
  UnknownLevel,
  // snapshot / factors
  UnknownSite,
  UnknownFactor,
  DuplicateFactor,
  DuplicateObservation,
  YearOutOfRange,
  UnresolvableAtRoot,
  MissingFactor,
  ZeroNationalAverage,
  // ingest
  EmptyFile,
  MalformedRow,
  UnknownLevelName,
  NonNumericValue,
  FileNotFound,
  // profiles
  SchemaViolation,
  NonPositiveWeight,
  UnsortedBreakpoints,
  InconsistentProfile,
  EmptyFocus,
  UnknownFocus,
  // analysis
  LengthMismatch,
  InsufficientData,
  ZeroVariance,
  SetNotInUniverse,
  EmptyStoreSet,
  EmptySample,
  InvalidBuckets,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace sitesel
