/**
 * @file   physics.hpp
 *
 * @brief  Physics kinds and constant coefficient tensors (phases and
 *         reference media).
 *
 * Every coefficient is held as a symmetric positive-definite m x m matrix
 * acting on per-voxel unknowns: m = d for conduction (the conductivity
 * matrix), m = d(d+1)/2 for elasticity (the stiffness in symmetric-tensor
 * coordinates, see elasticity.hpp).
 */
#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "homog/elasticity.hpp"

namespace homog {

enum class Physics { Conduction, Elasticity };

std::string to_string(Physics physics);
Physics parse_physics(const std::string& name);

/// Unknowns per voxel for the given physics and dimension.
int component_count(Physics physics, int dim);

class PhaseTensor {
 public:
  /// @throws std::invalid_argument unless A is square, symmetric and
  ///         positive definite.
  static PhaseTensor conduction(const Eigen::MatrixXd& conductivity);
  static PhaseTensor isotropic_conduction(int dim, double conductivity);
  static PhaseTensor elasticity(int dim, double mu, double nu);

  Physics physics() const { return physics_; }
  int dim() const { return dim_; }
  int components() const { return static_cast<int>(matrix_.rows()); }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  /// Isotropic moduli; present only for elasticity.
  const std::optional<IsotropicStiffness>& isotropic() const { return stiffness_; }
  double min_eigenvalue() const;
  Eigen::MatrixXd inverse() const;

  /// Same physics, dimension and bit-identical matrix.
  bool operator==(const PhaseTensor& other) const;

  std::string describe() const;

 private:
  PhaseTensor(Physics physics, int dim, Eigen::MatrixXd matrix,
              std::optional<IsotropicStiffness> stiffness);

  Physics physics_;
  int dim_;
  Eigen::MatrixXd matrix_;
  std::optional<IsotropicStiffness> stiffness_;
};

/// The reference medium A0 of the integral formulation is an ordinary
/// constant coefficient.
using ReferenceMedium = PhaseTensor;

}  // namespace homog
