#include "homog/physics.hpp"

#include <sstream>
#include <stdexcept>

namespace homog {

std::string to_string(Physics physics) {
  return physics == Physics::Conduction ? "conduction" : "elasticity";
}

Physics parse_physics(const std::string& name) {
  if (name == "conduction") return Physics::Conduction;
  if (name == "elasticity") return Physics::Elasticity;
  throw std::invalid_argument("unknown physics '" + name + "'");
}

int component_count(Physics physics, int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
  return physics == Physics::Conduction ? dim : sym_components(dim);
}

PhaseTensor::PhaseTensor(Physics physics, int dim, Eigen::MatrixXd matrix,
                         std::optional<IsotropicStiffness> stiffness)
    : physics_(physics), dim_(dim), matrix_(std::move(matrix)), stiffness_(stiffness) {}

PhaseTensor PhaseTensor::conduction(const Eigen::MatrixXd& conductivity) {
  const auto dim = conductivity.rows();
  if (dim < 1 || dim > 3 || conductivity.cols() != dim) {
    throw std::invalid_argument("conductivity must be a square 1x1, 2x2 or 3x3 matrix");
  }
  if (!conductivity.allFinite()) throw std::invalid_argument("conductivity is not finite");
  const double scale = conductivity.cwiseAbs().maxCoeff();
  if ((conductivity - conductivity.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale) {
    throw std::invalid_argument("conductivity must be symmetric");
  }
  // Symmetrize exactly so downstream eigen-solvers see a symmetric matrix.
  Eigen::MatrixXd sym = 0.5 * (conductivity + conductivity.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw std::invalid_argument("conductivity must be positive definite");
  }
  return PhaseTensor(Physics::Conduction, static_cast<int>(dim), sym, std::nullopt);
}

PhaseTensor PhaseTensor::isotropic_conduction(int dim, double conductivity) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
  return conduction(conductivity * Eigen::MatrixXd::Identity(dim, dim));
}

PhaseTensor PhaseTensor::elasticity(int dim, double mu, double nu) {
  IsotropicStiffness stiffness(mu, nu);
  return PhaseTensor(Physics::Elasticity, dim, stiffness.matrix(dim), stiffness);
}

double PhaseTensor::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(matrix_, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

Eigen::MatrixXd PhaseTensor::inverse() const {
  Eigen::MatrixXd inv = matrix_.inverse();
  return 0.5 * (inv + inv.transpose());
}

bool PhaseTensor::operator==(const PhaseTensor& other) const {
  return physics_ == other.physics_ && dim_ == other.dim_ &&
         matrix_.rows() == other.matrix_.rows() && matrix_ == other.matrix_;
}

std::string PhaseTensor::describe() const {
  std::ostringstream out;
  out.precision(17);
  if (stiffness_) {
    out << "mu=" << stiffness_->mu() << " nu=" << stiffness_->nu();
    return out.str();
  }
  const bool isotropic =
      matrix_ == Eigen::MatrixXd(matrix_(0, 0) * Eigen::MatrixXd::Identity(dim_, dim_));
  if (isotropic) {
    out << "a=" << matrix_(0, 0);
    return out.str();
  }
  out << "A=";
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      if (i || j) out << ',';
      out << matrix_(i, j);
    }
  }
  return out.str();
}

}  // namespace homog
