/**
 * @file   elasticity.hpp
 *
 * @brief  Symmetric second-order tensors in orthonormal coordinates and
 *         isotropic stiffness algebra.
 *
 * A symmetric d x d tensor is stored as a vector of length d(d+1)/2: the
 * diagonal entries first, then the off-diagonal pairs scaled by sqrt(2)
 * (d = 2: xx, yy, xy; d = 3: xx, yy, zz, yz, xz, xy). The map is an
 * isometry from the Frobenius product to the Euclidean one, so fourth-order
 * tensors with minor symmetries become plain symmetric matrices.
 */
#pragma once

#include <Eigen/Dense>

namespace homog {

int sym_components(int dim);

struct SymPair {
  int i;
  int j;
};

/// Tensor indices (i <= j) carried by coordinate I.
SymPair sym_pair(int dim, int coord);
/// Coordinate carrying tensor entry (i, j), in either order.
int sym_coord(int dim, int i, int j);
/// 1 on diagonal coordinates, sqrt(2) on shear ones.
double sym_weight(int dim, int coord);

Eigen::VectorXd to_coords(const Eigen::MatrixXd& tensor);
Eigen::MatrixXd from_coords(const Eigen::VectorXd& coords, int dim);
Eigen::VectorXd identity_coords(int dim);

/// Isotropic Hooke law sigma = lambda tr(eps) I + 2 mu eps.
class IsotropicStiffness {
 public:
  /// @throws std::invalid_argument unless mu > 0 and -1 < nu < 1/2.
  IsotropicStiffness(double mu, double nu);

  double mu() const { return mu_; }
  double nu() const { return nu_; }
  double lambda() const { return 2.0 * mu_ * nu_ / (1.0 - 2.0 * nu_); }

  /// Matrix in symmetric-tensor coordinates.
  Eigen::MatrixXd matrix(int dim) const;
  /// Eigenvalue on the hydrostatic direction, d lambda + 2 mu.
  double hydrostatic_eigenvalue(int dim) const { return dim * lambda() + 2.0 * mu_; }
  /// Eigenvalue on every deviatoric direction.
  double deviatoric_eigenvalue() const { return 2.0 * mu_; }

 private:
  double mu_;
  double nu_;
};

/// Unit engineering shear in the (a, b) plane: entries (a,b) = (b,a) = 1.
/// @throws std::invalid_argument if a == b or an axis is out of range.
Eigen::VectorXd shear_loading(int dim, int axis_a, int axis_b);

/// p : A : p, computed in coordinates as p^T A p.
double project_component(const Eigen::MatrixXd& tensor, const Eigen::VectorXd& p);

/// p : (A p) when only the column A p is known.
double project_column(const Eigen::VectorXd& column, const Eigen::VectorXd& p);

}  // namespace homog
