#include "hacl/error.hpp"

namespace hacl {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::IterOutOfRange: return "IterOutOfRange";
    case Errc::EmptyMasks: return "EmptyMasks";
    case Errc::CyclicCoverage: return "CyclicCoverage";
    case Errc::ParseError: return "ParseError";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::MissingImage: return "MissingImage";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace hacl
