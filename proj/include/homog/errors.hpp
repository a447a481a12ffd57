#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace homog {

/// Base class of every domain error raised by the library. Precondition
/// failures on plain arguments use std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An inverse DFT produced a non-negligible imaginary part, i.e. the spectral
/// data was not the transform of a real field.
class SymmetryError : public Error {
 public:
  SymmetryError(const std::string& what, double residue)
      : Error(what), residue_(residue) {}
  double residue() const { return residue_; }

 private:
  double residue_;
};

/// Input violates an operator contract (e.g. nonzero polarization on a
/// masked-out voxel, non-commuting reference medium).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A truncated lattice series did not reach the requested tolerance.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double estimate)
      : Error(what), estimate_(estimate) {}
  double estimate() const { return estimate_; }

 private:
  double estimate_;
};

/// Hard-sphere packing ran out of budget before placing every sphere.
class PackingError : public Error {
 public:
  PackingError(const std::string& what, std::size_t achieved)
      : Error(what), achieved_(achieved) {}
  std::size_t achieved() const { return achieved_; }

 private:
  std::size_t achieved_;
};

/// A phase violates the contrast bound |A - A0| >= c0 required by the
/// integral formulation.
class ContrastError : public Error {
 public:
  ContrastError(const std::string& what, std::size_t phase)
      : Error(what), phase_(phase) {}
  std::size_t phase() const { return phase_; }

 private:
  std::size_t phase_;
};

/// Fixed-point iterations blew up; the reference medium is unsuitable.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Dense assembly requested beyond the configured row limit.
class SizeLimitError : public Error {
 public:
  using Error::Error;
};

}  // namespace homog
