#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qcwarp {

enum class ErrorKind {
  InvalidArgument,
  InvalidMesh,
  DegenerateMap,
  InadmissibleCoefficient,
  UnderdeterminedSystem,
  NumericalFailure,
  Fold,
  Format,
  Io,
};

/// Machine-parsable token for an error category ("invalid-argument", ...).
std::string_view to_token(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by compute_beltrami when |f_z| vanishes on a face.
class DegenerateMapError : public Error {
 public:
  DegenerateMapError(std::size_t face, const std::string& what)
      : Error(ErrorKind::DegenerateMap, what), face_(face) {}
  std::size_t face() const noexcept { return face_; }

 private:
  std::size_t face_;
};

/// Raised by the LBS solve when the iteration cap is hit.
class NumericalFailure : public Error {
 public:
  NumericalFailure(double residual, const std::string& what)
      : Error(ErrorKind::NumericalFailure, what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Raised when a bijective map was required but some faces are flipped.
/// Carries at most 10 offending face indices.
class FoldError : public Error {
 public:
  FoldError(std::vector<std::size_t> faces, const std::string& what)
      : Error(ErrorKind::Fold, what), faces_(std::move(faces)) {}
  const std::vector<std::size_t>& faces() const noexcept { return faces_; }

 private:
  std::vector<std::size_t> faces_;
};

}  // namespace qcwarp
