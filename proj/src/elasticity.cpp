#include "homog/elasticity.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace homog {

namespace {

constexpr SymPair kPairs2[] = {{0, 0}, {1, 1}, {0, 1}};
constexpr SymPair kPairs3[] = {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};

void check_dim(int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
}

}  // namespace

int sym_components(int dim) {
  check_dim(dim);
  return dim * (dim + 1) / 2;
}

SymPair sym_pair(int dim, int coord) {
  if (coord < 0 || coord >= sym_components(dim)) {
    throw std::invalid_argument("symmetric coordinate out of range");
  }
  if (dim == 1) return {0, 0};
  return dim == 2 ? kPairs2[coord] : kPairs3[coord];
}

int sym_coord(int dim, int i, int j) {
  if (i > j) std::swap(i, j);
  const int m = sym_components(dim);
  for (int c = 0; c < m; ++c) {
    const SymPair p = sym_pair(dim, c);
    if (p.i == i && p.j == j) return c;
  }
  throw std::invalid_argument("tensor index out of range");
}

double sym_weight(int dim, int coord) {
  const SymPair p = sym_pair(dim, coord);
  return p.i == p.j ? 1.0 : std::sqrt(2.0);
}

Eigen::VectorXd to_coords(const Eigen::MatrixXd& tensor) {
  const int dim = static_cast<int>(tensor.rows());
  if (tensor.cols() != dim) throw std::invalid_argument("tensor must be square");
  const int m = sym_components(dim);
  Eigen::VectorXd out(m);
  for (int c = 0; c < m; ++c) {
    const SymPair p = sym_pair(dim, c);
    // Average the two off-diagonal entries so slightly asymmetric input maps
    // to its symmetric part.
    out(c) = sym_weight(dim, c) * 0.5 * (tensor(p.i, p.j) + tensor(p.j, p.i));
  }
  return out;
}

Eigen::MatrixXd from_coords(const Eigen::VectorXd& coords, int dim) {
  const int m = sym_components(dim);
  if (coords.size() != m) throw std::invalid_argument("coordinate vector has wrong length");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
  for (int c = 0; c < m; ++c) {
    const SymPair p = sym_pair(dim, c);
    const double v = coords(c) / sym_weight(dim, c);
    out(p.i, p.j) = v;
    out(p.j, p.i) = v;
  }
  return out;
}

Eigen::VectorXd identity_coords(int dim) {
  return to_coords(Eigen::MatrixXd::Identity(dim, dim));
}

IsotropicStiffness::IsotropicStiffness(double mu, double nu) : mu_(mu), nu_(nu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw std::invalid_argument("shear modulus must be positive");
  }
  if (!(nu > -1.0 && nu < 0.5)) {
    throw std::invalid_argument("Poisson ratio must lie in (-1, 1/2)");
  }
}

Eigen::MatrixXd IsotropicStiffness::matrix(int dim) const {
  const int m = sym_components(dim);
  const Eigen::VectorXd id = identity_coords(dim);
  return lambda() * id * id.transpose() + 2.0 * mu_ * Eigen::MatrixXd::Identity(m, m);
}

Eigen::VectorXd shear_loading(int dim, int axis_a, int axis_b) {
  check_dim(dim);
  if (axis_a < 0 || axis_b < 0 || axis_a >= dim || axis_b >= dim) {
    throw std::invalid_argument("shear plane axis out of range");
  }
  if (axis_a == axis_b) {
    throw std::invalid_argument("shear plane needs two distinct axes");
  }
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(dim, dim);
  p(axis_a, axis_b) = 1.0;
  p(axis_b, axis_a) = 1.0;
  return to_coords(p);
}

double project_component(const Eigen::MatrixXd& tensor, const Eigen::VectorXd& p) {
  if (tensor.rows() != p.size() || tensor.cols() != p.size()) {
    throw std::invalid_argument("project_component: size mismatch");
  }
  return p.dot(tensor * p);
}

double project_column(const Eigen::VectorXd& column, const Eigen::VectorXd& p) {
  if (column.size() != p.size()) throw std::invalid_argument("project_column: size mismatch");
  return p.dot(column);
}

}  // namespace homog
