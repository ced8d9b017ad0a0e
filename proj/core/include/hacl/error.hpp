#pragma once

#include <stdexcept>
#include <string>

namespace hacl {

enum class Errc {
  MalformedHeader,
  DimensionMismatch,
  NonFiniteValue,
  ZeroVector,
  LengthMismatch,
  IterOutOfRange,
  EmptyMasks,
  CyclicCoverage,
  ParseError,
  InvalidConfig,
  MissingImage,
  Io,
};

const char* to_string(Errc code) noexcept;

// Every failure raised by the library carries one of the codes above so the
// CLI can map it to an exit status and callers can branch without string
// matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace hacl
