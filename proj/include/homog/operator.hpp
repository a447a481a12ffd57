/**
 * @file   operator.hpp
 *
 * @brief  The matrix-free Lippmann-Schwinger system operator
 *           tau |-> K_beta tau_beta + (Gamma * tau)_beta   on masked-in voxels,
 *         its right-hand side, and a dense assembly used as an oracle on
 *         small grids.
 *
 * All inner products carry the voxel volume h^d so that they approximate
 * integrals over the unit cell. The operator is symmetric in that product.
 */
#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "homog/green.hpp"
#include "homog/grid.hpp"
#include "homog/microstructure.hpp"

namespace homog {

/// h^d-weighted Euclidean inner product of two fields on the same grid.
double weighted_dot(const VoxelField& a, const VoxelField& b);
double weighted_norm(const VoxelField& a);

/// Periodic convolution with the Green operator: inverse DFT of the
/// symbol times the DFT of tau. The result has zero mean.
VoxelField apply_green_field(const VoxelField& tau, const GreenOperator& green);
/// Same, reusing caller-owned spectral storage.
void apply_green_field(const VoxelField& tau, const GreenOperator& green, SpectralField& work,
                       VoxelField& out);

class SystemOperator {
 public:
  /// @throws std::invalid_argument if the coefficient and Green grids or
  ///         component counts differ.
  SystemOperator(CoefficientField coeffs, GreenOperator green);

  const CoefficientField& coefficients() const { return coeffs_; }
  const GreenOperator& green() const { return green_; }
  const Grid& grid() const { return coeffs_.grid(); }
  int components() const { return coeffs_.components(); }

  /// @throws ContractViolation if tau is nonzero on a masked-out voxel.
  VoxelField apply(const VoxelField& tau) const;
  void apply(const VoxelField& tau, SpectralField& work, VoxelField& out) const;

  /// Loading p on masked-in voxels, zero elsewhere.
  VoxelField rhs(const Eigen::VectorXd& loading) const;

 private:
  CoefficientField coeffs_;
  GreenOperator green_;
};

inline VoxelField apply_system(const VoxelField& tau, const SystemOperator& op) {
  return op.apply(tau);
}
inline VoxelField rhs(const Eigen::VectorXd& loading, const SystemOperator& op) {
  return op.rhs(loading);
}

inline constexpr std::size_t kDefaultDenseLimit = 4096;

struct DenseSystem {
  /// Unknown ordering: masked-in voxels by increasing linear index, m
  /// components each.
  Eigen::MatrixXd matrix;
  std::vector<std::size_t> voxels;
  int components = 0;

  /// Restriction of a field to the unknown vector and back.
  Eigen::VectorXd gather(const VoxelField& field) const;
  VoxelField scatter(const Eigen::VectorXd& values, const Grid& grid) const;
};

/// Block (beta, gamma) = delta_{beta gamma} K_beta + g_{beta - gamma}, with g
/// the inverse DFT of the tabulated symbol.
/// @throws SizeLimitError if m |I0| exceeds `max_rows`.
DenseSystem assemble_dense(const SystemOperator& op, std::size_t max_rows = kDefaultDenseLimit);

}  // namespace homog
