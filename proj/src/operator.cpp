#include "homog/operator.hpp"

#include <sstream>
#include <stdexcept>

#include "homog/errors.hpp"

namespace homog {

double weighted_dot(const VoxelField& a, const VoxelField& b) {
  if (!(a.grid() == b.grid()) || a.components() != b.components()) {
    throw std::invalid_argument("weighted_dot: field shapes differ");
  }
  auto x = a.data();
  auto y = b.data();
  // Fixed blocked order so the value does not depend on threading.
  constexpr std::size_t kBlock = 1024;
  double total = 0.0;
  for (std::size_t start = 0; start < x.size(); start += kBlock) {
    const std::size_t end = std::min(x.size(), start + kBlock);
    double partial = 0.0;
    for (std::size_t i = start; i < end; ++i) partial += x[i] * y[i];
    total += partial;
  }
  return total * a.grid().cell_volume();
}

double weighted_norm(const VoxelField& a) { return std::sqrt(weighted_dot(a, a)); }

void apply_green_field(const VoxelField& tau, const GreenOperator& green, SpectralField& work,
                       VoxelField& out) {
  if (!(tau.grid() == green.grid()) || tau.components() != green.components()) {
    throw std::invalid_argument("polarization shape does not match the Green operator");
  }
  dft_forward_into(tau, work);
  green.apply_spectral(work);
  dft_inverse_into(work, out);
}

VoxelField apply_green_field(const VoxelField& tau, const GreenOperator& green) {
  if (!tau.all_finite()) throw std::invalid_argument("apply_green_field: non-finite input");
  SpectralField work(tau.grid(), tau.components());
  VoxelField out(tau.grid(), tau.components());
  apply_green_field(tau, green, work, out);
  return out;
}

SystemOperator::SystemOperator(CoefficientField coeffs, GreenOperator green)
    : coeffs_(std::move(coeffs)), green_(std::move(green)) {
  if (!(coeffs_.grid() == green_.grid())) {
    throw std::invalid_argument("coefficient and Green operator grids differ");
  }
  if (coeffs_.components() != green_.components()) {
    throw std::invalid_argument("coefficient and Green operator component counts differ");
  }
}

void SystemOperator::apply(const VoxelField& tau, SpectralField& work, VoxelField& out) const {
  if (!(tau.grid() == grid()) || tau.components() != components()) {
    throw std::invalid_argument("polarization shape does not match the operator");
  }
  const int m = components();
  for (std::size_t lin = 0; lin < grid().size(); ++lin) {
    if (coeffs_.masked_in(lin)) continue;
    for (double v : tau.voxel(lin)) {
      if (v != 0.0) {
        throw ContractViolation("polarization is nonzero on masked-out voxel " +
                                std::to_string(lin));
      }
    }
  }
  apply_green_field(tau, green_, work, out);
  for (std::size_t lin = 0; lin < grid().size(); ++lin) {
    auto dst = out.voxel(lin);
    if (!coeffs_.masked_in(lin)) {
      std::fill(dst.begin(), dst.end(), 0.0);
      continue;
    }
    const auto local = coeffs_.local(lin);
    const auto src = tau.voxel(lin);
    for (int r = 0; r < m; ++r) {
      double acc = 0.0;
      for (int c = 0; c < m; ++c) acc += local(r, c) * src[c];
      dst[r] += acc;
    }
  }
}

VoxelField SystemOperator::apply(const VoxelField& tau) const {
  if (!tau.all_finite()) throw std::invalid_argument("apply_system: non-finite input");
  SpectralField work(grid(), components());
  VoxelField out(grid(), components());
  apply(tau, work, out);
  return out;
}

VoxelField SystemOperator::rhs(const Eigen::VectorXd& loading) const {
  if (loading.size() != components()) {
    throw std::invalid_argument("loading has " + std::to_string(loading.size()) +
                                " components, expected " + std::to_string(components()));
  }
  VoxelField out(grid(), components());
  for (std::size_t lin = 0; lin < grid().size(); ++lin) {
    if (!coeffs_.masked_in(lin)) continue;
    for (int c = 0; c < components(); ++c) out.at(lin, c) = loading(c);
  }
  return out;
}

Eigen::VectorXd DenseSystem::gather(const VoxelField& field) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(voxels.size()) * components);
  for (std::size_t i = 0; i < voxels.size(); ++i) {
    for (int c = 0; c < components; ++c) out(i * components + c) = field.at(voxels[i], c);
  }
  return out;
}

VoxelField DenseSystem::scatter(const Eigen::VectorXd& values, const Grid& grid) const {
  VoxelField out(grid, components);
  for (std::size_t i = 0; i < voxels.size(); ++i) {
    for (int c = 0; c < components; ++c) out.at(voxels[i], c) = values(i * components + c);
  }
  return out;
}

DenseSystem assemble_dense(const SystemOperator& op, std::size_t max_rows) {
  const Grid& grid = op.grid();
  const CoefficientField& coeffs = op.coefficients();
  const int m = op.components();
  DenseSystem dense;
  dense.components = m;
  for (std::size_t lin = 0; lin < grid.size(); ++lin) {
    if (coeffs.masked_in(lin)) dense.voxels.push_back(lin);
  }
  const std::size_t rows = dense.voxels.size() * static_cast<std::size_t>(m);
  if (rows > max_rows) {
    std::ostringstream msg;
    msg << "dense system would have " << rows << " rows, limit is " << max_rows;
    throw SizeLimitError(msg.str());
  }

  // Real-space kernel g_delta (m x m per delta) from the symbol table.
  SpectralField table(grid, m * m);
  for (std::size_t lin = 0; lin < grid.size(); ++lin) {
    const Eigen::MatrixXcd symbol = op.green().symbol(grid.multi(lin));
    auto coef = table.coef(lin);
    for (int c = 0; c < m; ++c) {
      for (int r = 0; r < m; ++r) coef[c * m + r] = symbol(r, c);
    }
  }
  const VoxelField kernel = dft_inverse(table);

  dense.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows),
                                       static_cast<Eigen::Index>(rows));
  for (std::size_t bi = 0; bi < dense.voxels.size(); ++bi) {
    const MultiIndex beta = grid.multi(dense.voxels[bi]);
    for (std::size_t gi = 0; gi < dense.voxels.size(); ++gi) {
      const MultiIndex gamma = grid.multi(dense.voxels[gi]);
      MultiIndex delta{0, 0, 0};
      for (int i = 0; i < grid.dim(); ++i) delta[i] = beta[i] - gamma[i];
      const auto block = kernel.voxel(grid.linear(delta));
      for (int c = 0; c < m; ++c) {
        for (int r = 0; r < m; ++r) dense.matrix(bi * m + r, gi * m + c) = block[c * m + r];
      }
    }
    dense.matrix.block(bi * m, bi * m, m, m) += coeffs.local(dense.voxels[bi]);
  }
  return dense;
}

}  // namespace homog
