#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cfad {

enum class ErrorKind {
  InvalidArgument,
  FileNotFound,
  MalformedHeader,
  UnsupportedBitDepth,
  DegenerateInput,
  OutOfBounds,
  DimensionMismatch,
  DivisionDegenerate,
  EmptyCell,
  FormatVersion,
  Truncated,
  Checksum,
  Integrity,
  DegenerateSurface,
  SizeLimit,
  EmptyTestSet,
  IdentityOverlap,
  ConfigConflict,
  HashMismatch,
  Io,
};

/// Stable, machine-parsable name of an error class (used by the CLI).
std::string_view error_kind_name(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cfad
