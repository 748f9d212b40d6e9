#include "sitesel/error.hpp"

namespace sitesel {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::DuplicateCode: return "DuplicateCode";
    case Errc::UnknownParent: return "UnknownParent";
    case Errc::LevelSkip: return "LevelSkip";
    case Errc::CycleDetected: return "CycleDetected";
    case Errc::UnknownLevel: return "UnknownLevel";
    case Errc::UnknownSite: return "UnknownSite";
    case Errc::UnknownFactor: return "UnknownFactor";
    case Errc::DuplicateFactor: return "DuplicateFactor";
    case Errc::DuplicateObservation: return "DuplicateObservation";
    case Errc::YearOutOfRange: return "YearOutOfRange";
    case Errc::UnresolvableAtRoot: return "UnresolvableAtRoot";
    case Errc::MissingFactor: return "MissingFactor";
    case Errc::ZeroNationalAverage: return "ZeroNationalAverage";
    case Errc::EmptyFile: return "EmptyFile";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::UnknownLevelName: return "UnknownLevelName";
    case Errc::NonNumericValue: return "NonNumericValue";
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::NonPositiveWeight: return "NonPositiveWeight";
    case Errc::UnsortedBreakpoints: return "UnsortedBreakpoints";
    case Errc::InconsistentProfile: return "InconsistentProfile";
    case Errc::EmptyFocus: return "EmptyFocus";
    case Errc::UnknownFocus: return "UnknownFocus";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::SetNotInUniverse: return "SetNotInUniverse";
    case Errc::EmptyStoreSet: return "EmptyStoreSet";
    case Errc::EmptySample: return "EmptySample";
    case Errc::InvalidBuckets: return "InvalidBuckets";
  }
  return "Unknown";
}

}  // namespace sitesel
