/**
 * @file   green.hpp
 *
 * @brief  Fourier symbols of the discrete periodic Green operators for a
 *         constant reference medium.
 *
 * The continuous symbol maps a polarization to minus the gradient (strain)
 * it induces in the reference medium. Four grid discretizations are offered:
 *
 *  - Consistent: the Galerkin projection onto voxelwise-constant fields, a
 *    lattice series weighted by sinc^2 and truncated to a cube of
 *    half-width n_max. Tabulated once per grid; meant for small grids.
 *  - Truncated: the continuous symbol at the centered frequency, replaced
 *    by the inverse reference tensor at Nyquist indices.
 *  - Filtered: a cos^2-weighted sum of 2^d aliases of the continuous symbol.
 *  - FiniteDifference: the exact projector of the forward-difference
 *    gradient on the voxel grid.
 *
 * Every symbol is an m x m Hermitian positive semi-definite matrix (m = d
 * for conduction, m = d(d+1)/2 for elasticity in orthonormal symmetric
 * coordinates) and vanishes at k = 0.
 */
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "homog/grid.hpp"
#include "homog/physics.hpp"

namespace homog {

enum class GreenKind { Consistent, Truncated, Filtered, FiniteDifference };

/// "consistent" | "truncated" | "filtered" | "fd"
std::string to_string(GreenKind kind);
GreenKind parse_green_kind(const std::string& name);

struct ConsistentOptions {
  int n_max = 4;
  /// Bound on the relative change of the symbol between cube half-widths
  /// n_max - 1 and n_max.
  double tol = 1e-3;
};

struct GreenOptions {
  ConsistentOptions consistent;
  /// Replace the truncated symbol by A0^{-1} at Nyquist indices. Disabling
  /// it exists only to exhibit the resulting loss of Hermitian symmetry.
  bool nyquist_fix = true;
};

/// Continuous symbol at a real frequency vector of length d. Conduction:
/// xi xi^T / (xi^T A0 xi). Elasticity (isotropic A0): the strain Green
/// operator in symmetric coordinates. Zero at xi = 0.
Eigen::MatrixXd gamma_continuous(const Eigen::VectorXd& freq, const ReferenceMedium& ref);

struct SeriesValue {
  Eigen::MatrixXd symbol;
  /// Relative change between half-widths n_max - 1 and n_max.
  double estimate = 0.0;
};

/// Consistent symbol at an arbitrary integer frequency, without the
/// tolerance check. The alias window is centered on k reduced into
/// (-N/2, N/2], so the result depends on k only modulo N.
SeriesValue consistent_series(const MultiIndex& k, const Grid& grid, const ReferenceMedium& ref,
                              int n_max);

class GreenOperator {
 public:
  /// @throws std::invalid_argument on a physics/dimension mismatch or
  ///         n_max < 1 (Consistent).
  /// @throws NonConvergence if the Consistent series estimate exceeds tol at
  ///         any frequency; carries the worst estimate.
  GreenOperator(GreenKind kind, ReferenceMedium ref, const Grid& grid,
                GreenOptions options = {});

  GreenKind kind() const { return kind_; }
  const ReferenceMedium& reference() const { return ref_; }
  const Grid& grid() const { return grid_; }
  int components() const { return ref_.components(); }
  const GreenOptions& options() const { return options_; }
  /// Worst series estimate over the grid (Consistent), 0 otherwise.
  double series_estimate() const { return series_estimate_; }

  /// Symbol at frequency k, each entry reduced modulo N.
  Eigen::MatrixXcd symbol(const MultiIndex& k) const;

  /// Multiplies every spectral coefficient by its symbol, in place.
  void apply_spectral(SpectralField& spectrum) const;

 private:
  GreenKind kind_;
  ReferenceMedium ref_;
  Grid grid_;
  GreenOptions options_;
  double series_estimate_ = 0.0;
  /// Consistent only: real m x m blocks, column-major, one per frequency.
  std::vector<double> table_;
};

}  // namespace homog
