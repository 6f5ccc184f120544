#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace speclog {

enum class Errc {
  address_out_of_range,
  encoding_overlap,
  malformed_log,
  capacity_exceeded,
  duplicate_id,
  len_overflow,
  invalid_spec,
  malformed_blockmem,
  too_many_specs,
  mode_mismatch,
  unknown_symbol,
  slice_too_small,
  invalid_config,
  malformed_cfg,
  path_explosion,
  parse_error,
  auth_error,
  malformed_message,
  io_error,
};

constexpr std::string_view errc_name(Errc c) noexcept {
  switch (c) {
    case Errc::address_out_of_range: return "AddressOutOfRange";
    case Errc::encoding_overlap: return "EncodingOverlap";
    case Errc::malformed_log: return "MalformedLog";
    case Errc::capacity_exceeded: return "CapacityExceeded";
    case Errc::duplicate_id: return "DuplicateId";
    case Errc::len_overflow: return "LenOverflow";
    case Errc::invalid_spec: return "InvalidSpec";
    case Errc::malformed_blockmem: return "MalformedBlockMem";
    case Errc::too_many_specs: return "TooManySpecs";
    case Errc::mode_mismatch: return "ModeMismatch";
    case Errc::unknown_symbol: return "UnknownSymbol";
    case Errc::slice_too_small: return "SliceTooSmall";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::malformed_cfg: return "MalformedCFG";
    case Errc::path_explosion: return "PathExplosion";
    case Errc::parse_error: return "ParseError";
    case Errc::auth_error: return "AuthError";
    case Errc::malformed_message: return "MalformedMessage";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

/// Every failure in the library surfaces as this exception; `code()` tells
/// callers which contract was violated. Parse failures also carry a 1-based
/// line number.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), line_(line) {}

  Errc code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  Errc code_;
  std::optional<std::size_t> line_;
};

}  // namespace speclog
