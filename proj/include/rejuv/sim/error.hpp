#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rejuv {

enum class Errc {
  kPastEvent,
  kInvalidRange,
  kDuplicateTemplate,
  kNoTemplate,
  kUnknownTemplate,
  kNoFreePblock,
  kUnknownTile,
  kAlreadyDestroyed,
  kInvalidLifecycle,
  kNegativeT,
  kEmptyLibrary,
  kInvalidConfig,
  kParseError,
  kValidationError,
  kMalformedTrace,
  kIo,
};

std::string_view errc_name(Errc code) noexcept;

/// Single exception type for the simulator; `code()` identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace rejuv
