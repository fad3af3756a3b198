#include "rejuv/sim/error.hpp"

#include <fmt/format.h>

namespace rejuv {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::kPastEvent: return "PastEvent";
    case Errc::kInvalidRange: return "InvalidRange";
    case Errc::kDuplicateTemplate: return "DuplicateTemplate";
    case Errc::kNoTemplate: return "NoTemplate";
    case Errc::kUnknownTemplate: return "UnknownTemplate";
    case Errc::kNoFreePblock: return "NoFreePblock";
    case Errc::kUnknownTile: return "UnknownTile";
    case Errc::kAlreadyDestroyed: return "AlreadyDestroyed";
    case Errc::kInvalidLifecycle: return "InvalidLifecycle";
    case Errc::kNegativeT: return "NegativeT";
    case Errc::kEmptyLibrary: return "EmptyLibrary";
    case Errc::kInvalidConfig: return "InvalidConfig";
    case Errc::kParseError: return "ParseError";
    case Errc::kValidationError: return "ValidationError";
    case Errc::kMalformedTrace: return "MalformedTrace";
    case Errc::kIo: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(fmt::format("{}: {}", errc_name(code), detail)), code_(code) {}

}  // namespace rejuv
