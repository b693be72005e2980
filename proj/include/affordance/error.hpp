#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace affordance {

enum class ErrorKind {
  MissingDepth,
  NonPositiveDepth,
  BehindCamera,
  DegenerateView,
  DegeneratePose,
  EmptyLibrary,
  UnknownClass,
  RegionOutOfBounds,
  NoForeground,
  InvalidInput,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingDepth: return "MissingDepth";
    case ErrorKind::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorKind::BehindCamera: return "BehindCamera";
    case ErrorKind::DegenerateView: return "DegenerateView";
    case ErrorKind::DegeneratePose: return "DegeneratePose";
    case ErrorKind::EmptyLibrary: return "EmptyLibrary";
    case ErrorKind::UnknownClass: return "UnknownClass";
    case ErrorKind::RegionOutOfBounds: return "RegionOutOfBounds";
    case ErrorKind::NoForeground: return "NoForeground";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind; the
/// message always starts with the kind name so it survives being printed.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + (detail.empty() ? "" : ": " + detail)),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace affordance
