#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "homog/elasticity.hpp"
#include "homog/errors.hpp"
#include "homog/operator.hpp"
#include "support.hpp"

using namespace homog;
using namespace homog::testing;

namespace {

constexpr GreenKind kAllKinds[] = {GreenKind::Consistent, GreenKind::Truncated,
                                   GreenKind::Filtered, GreenKind::FiniteDifference};

/// Operator matrix assembled pair by pair: each Green block is the naive
/// inverse DFT sum of symbol() at the offset beta - gamma.
Eigen::MatrixXd pairwise_matrix(const SystemOperator& op) {
  const Grid& g = op.grid();
  const int m = op.components();
  std::vector<std::size_t> voxels;
  for (std::size_t lin = 0; lin < g.size(); ++lin) {
    if (op.coefficients().masked_in(lin)) voxels.push_back(lin);
  }
  std::vector<Eigen::MatrixXcd> symbols;
  for (std::size_t lin = 0; lin < g.size(); ++lin) symbols.push_back(op.green().symbol(g.multi(lin)));

  const auto n = static_cast<Eigen::Index>(voxels.size()) * m;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t a = 0; a < voxels.size(); ++a) {
    const MultiIndex beta = g.multi(voxels[a]);
    for (std::size_t b = 0; b < voxels.size(); ++b) {
      const MultiIndex gamma = g.multi(voxels[b]);
      Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(m, m);
      for (std::size_t lin = 0; lin < g.size(); ++lin) {
        const MultiIndex k = g.multi(lin);
        double phase = 0.0;
        for (int i = 0; i < g.dim(); ++i) phase += static_cast<double>(k[i] * (beta[i] - gamma[i]));
        phase *= 2.0 * std::numbers::pi / g.side();
        block += symbols[lin] * Complex(std::cos(phase), std::sin(phase));
      }
      block /= static_cast<double>(g.size());
      out.block(a * m, b * m, m, m) = block.real();
    }
    out.block(a * m, a * m, m, m) += op.coefficients().local(voxels[a]);
  }
  return out;
}

Microstructure two_phase(int dim, int side, double a, double b, std::uint64_t seed) {
  return make_random(Grid(dim, side), scalar(dim, a), scalar(dim, b), 0.5, seed);
}

}  // namespace

TEST(WeightedInnerProduct, CarriesVoxelVolume) {
  const Grid g(2, 4);
  VoxelField a(g, 1), b(g, 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    a.at(i, 0) = 1.0;
    b.at(i, 0) = static_cast<double>(i);
  }
  EXPECT_DOUBLE_EQ(weighted_dot(a, b), 120.0 / 16.0);
  EXPECT_DOUBLE_EQ(weighted_norm(a), 1.0);
  EXPECT_THROW(weighted_dot(a, VoxelField(g, 2)), std::invalid_argument);
}

TEST(ApplyGreenField, ConstantIsAnnihilatedAndOutputHasZeroMean) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Grid g(2, 8);
  for (GreenKind kind : kAllKinds) {
    const GreenOperator green(kind, scalar(2, 0.7), g, series_options());
    VoxelField constant(g, 2);
    for (std::size_t lin = 0; lin < g.size(); ++lin) {
      constant.at(lin, 0) = 1.5;
      constant.at(lin, 1) = -0.5;
    }
    EXPECT_LE(max_abs(apply_green_field(constant, green)), 1e-14) << to_string(kind);

    VoxelField tau(g, 2);
    for (double& v : tau.data()) v = u(rng);
    const VoxelField out = apply_green_field(tau, green);
    const double norm = weighted_norm(tau);
    for (double mean : out.mean()) EXPECT_LE(std::abs(mean), 1e-12 * norm);
    EXPECT_GE(weighted_dot(tau, out), -1e-12 * norm * norm);
  }
}

TEST(SystemOperator, UniformMediumExamples) {
  const Grid g(1, 8);
  const SystemOperator op = make_operator(make_uniform(g, scalar(1, 2.0)), scalar(1, 1.0), 8,
                                          GreenKind::Filtered);
  VoxelField c(g, 1);
  for (double& v : c.data()) v = 0.75;
  EXPECT_LE(max_abs_diff(op.apply(c), c), 1e-15);
  EXPECT_EQ(max_abs(op.apply(VoxelField(g, 1))), 0.0);
}

TEST(SystemOperator, RhsExamples) {
  const Grid g(2, 4);
  const SystemOperator full = make_operator(make_uniform(g, scalar(2, 2.0)), scalar(2, 1.0), 4,
                                            GreenKind::Truncated);
  const VoxelField e1 = full.rhs(Eigen::Vector2d(1, 0));
  for (std::size_t lin = 0; lin < g.size(); ++lin) {
    EXPECT_EQ(e1.at(lin, 0), 1.0);
    EXPECT_EQ(e1.at(lin, 1), 0.0);
  }
  const SystemOperator empty = make_operator(make_uniform(g, scalar(2, 1.0)), scalar(2, 1.0), 4,
                                             GreenKind::Truncated);
  EXPECT_EQ(max_abs(empty.rhs(Eigen::Vector2d(1, 0))), 0.0);
  EXPECT_THROW(full.rhs(Eigen::Vector3d(1, 0, 0)), std::invalid_argument);

  const Grid g3(3, 2);
  const SystemOperator elastic =
      make_operator(make_uniform(g3, PhaseTensor::elasticity(3, 1.0, 0.3)),
                    PhaseTensor::elasticity(3, 0.5, 0.3), 2, GreenKind::Filtered);
  const Eigen::VectorXd p = shear_loading(3, 0, 1);
  const VoxelField shear = elastic.rhs(p);
  for (std::size_t lin = 0; lin < g3.size(); ++lin) {
    Eigen::Matrix3d t = from_coords(Eigen::Map<const Eigen::VectorXd>(shear.voxel(lin).data(), 6), 3);
    EXPECT_NEAR(t(0, 1), 1.0, 1e-15);
    EXPECT_NEAR(t(1, 0), 1.0, 1e-15);
    EXPECT_NEAR(t.norm(), std::sqrt(2.0), 1e-15);
  }
}

TEST(SystemOperator, RejectsPolarizationOnMaskedOutVoxels) {
  const Grid fine(1, 4);
  const Microstructure m(fine, {0, 0, 1, 1}, {scalar(1, 1.0), scalar(1, 3.0)});
  const SystemOperator op = make_operator(m, scalar(1, 1.0), 4, GreenKind::Filtered);
  VoxelField tau(fine, 1);
  tau.at(std::size_t{2}, 0) = 1.0;
  EXPECT_NO_THROW(op.apply(tau));
  tau.at(std::size_t{0}, 0) = 1e-300;
  EXPECT_THROW(op.apply(tau), ContractViolation);
}

TEST(DenseSystem, TinyUniformSystemMatchesApply) {
  const Grid g(1, 2);
  const SystemOperator op = make_operator(make_uniform(g, scalar(1, 2.0)), scalar(1, 1.0), 2,
                                          GreenKind::Filtered);
  const DenseSystem dense = assemble_dense(op);
  ASSERT_EQ(dense.matrix.rows(), 2);
  for (int j = 0; j < 2; ++j) {
    VoxelField e(g, 1);
    e.at(static_cast<std::size_t>(j), 0) = 1.0;
    const Eigen::VectorXd fast = dense.gather(op.apply(e));
    EXPECT_LE((fast - dense.matrix.col(j)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(DenseSystem, ApplyMatchesBothDenseRoutes) {
  std::mt19937_64 rng(2);
  for (int dim = 1; dim <= 2; ++dim) {
    for (int side : {2, 4, 8}) {
      const Microstructure micro = two_phase(dim, side, 1.0, 10.0, 100 * dim + side);
      for (GreenKind kind : kAllKinds) {
        const SystemOperator op = make_operator(micro, scalar(dim, 0.5), side, kind);
        const DenseSystem dense = assemble_dense(op);
        const Eigen::MatrixXd pairwise = pairwise_matrix(op);
        const double scale = dense.matrix.cwiseAbs().maxCoeff();
        EXPECT_LE((dense.matrix - pairwise).cwiseAbs().maxCoeff(), 1e-12 * scale);
        EXPECT_LE((dense.matrix - dense.matrix.transpose()).cwiseAbs().maxCoeff(), 1e-10 * scale);
        for (int trial = 0; trial < 3; ++trial) {
          const VoxelField tau = random_polarization(op, rng);
          const Eigen::VectorXd fast = dense.gather(op.apply(tau));
          const Eigen::VectorXd slow = dense.matrix * dense.gather(tau);
          EXPECT_LE((fast - slow).cwiseAbs().maxCoeff(), 1e-12 * (1 + slow.cwiseAbs().maxCoeff()))
              << "d=" << dim << " N=" << side << ' ' << to_string(kind);
        }
      }
    }
  }
}

TEST(DenseSystem, GreenBlocksSumToZeroSymbol) {
  const Grid g(2, 4);
  const SystemOperator op = make_operator(make_uniform(g, scalar(2, 3.0)), scalar(2, 1.0), 4,
                                          GreenKind::FiniteDifference);
  const DenseSystem dense = assemble_dense(op);
  const int m = 2;
  for (Eigen::Index row = 0; row < dense.matrix.rows(); ++row) {
    for (int c = 0; c < m; ++c) {
      double sum = 0.0;
      for (Eigen::Index col = c; col < dense.matrix.cols(); col += m) sum += dense.matrix(row, col);
      // Only the local block (K = 1/2 on the diagonal) survives.
      EXPECT_NEAR(sum, row % m == c ? 0.5 : 0.0, 1e-13);
    }
  }
}

TEST(DenseSystem, SizeLimitIsEnforced) {
  const Grid g(2, 8);
  const SystemOperator op = make_operator(make_uniform(g, scalar(2, 2.0)), scalar(2, 1.0), 8,
                                          GreenKind::Filtered);
  EXPECT_THROW(assemble_dense(op, 127), SizeLimitError);
  EXPECT_NO_THROW(assemble_dense(op, 128));
}

TEST(SystemOperator, SymmetricInWeightedProduct) {
  std::mt19937_64 rng(3);
  const std::vector<std::pair<Microstructure, PhaseTensor>> cases = {
      {two_phase(2, 8, 1.0, 10.0, 4), scalar(2, 0.5)},
      {two_phase(3, 4, 0.5, 2.0, 5), scalar(3, 1.0)},
      {make_random(Grid(3, 4), PhaseTensor::elasticity(3, 1.0, 0.3),
                   PhaseTensor::elasticity(3, 1000.0, 0.2), 0.3, 6),
       PhaseTensor::elasticity(3, 0.5, 0.3)},
  };
  for (const auto& [micro, ref] : cases) {
    for (GreenKind kind : kAllKinds) {
      if (kind == GreenKind::Consistent && micro.grid().dim() == 3) continue;
      const SystemOperator op = make_operator(micro, ref, micro.grid().side(), kind);
      for (int trial = 0; trial < 5; ++trial) {
        const VoxelField t = random_polarization(op, rng);
        const VoxelField s = random_polarization(op, rng);
        const double lhs = weighted_dot(op.apply(t), s);
        const double rhs = weighted_dot(t, op.apply(s));
        const double scale = weighted_norm(op.apply(t)) * weighted_norm(s) +
                             weighted_norm(t) * weighted_norm(op.apply(s));
        EXPECT_LE(std::abs(lhs - rhs), 1e-11 * scale) << to_string(kind);
      }
    }
  }
}

TEST(SystemOperator, PositiveDefiniteWithSoftReference) {
  for (GreenKind kind : kAllKinds) {
    const SystemOperator op = make_operator(two_phase(2, 6, 1.0, 10.0, 7), scalar(2, 0.5), 6, kind);
    const DenseSystem dense = assemble_dense(op);
    const Eigen::MatrixXd sym = 0.5 * (dense.matrix + dense.matrix.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
    // K >= 1 / (10 - 0.5) on every voxel and the Green part is PSD.
    EXPECT_GE(eig.eigenvalues().minCoeff(), 1.0 / 9.5 - 1e-10) << to_string(kind);
  }
}

TEST(SystemOperator, TruncatedConductionOutputIsAGradient) {
  std::mt19937_64 rng(8);
  const Grid g(2, 8);
  const GreenOperator green(GreenKind::Truncated, scalar(2, 0.7), g);
  VoxelField tau(g, 2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : tau.data()) v = u(rng);
  const SpectralField out = dft_forward(apply_green_field(tau, green));
  for (std::size_t lin = 0; lin < g.size(); ++lin) {
    const MultiIndex k = g.multi(lin);
    const CenteredFrequency f0 = centered_freq(k[0], 8), f1 = centered_freq(k[1], 8);
    if (f0.nyquist || f1.nyquist) continue;
    // Cross product of the coefficient with the centered frequency vector.
    const Complex cross = out.at(lin, 0) * static_cast<double>(f1.value) -
                          out.at(lin, 1) * static_cast<double>(f0.value);
    EXPECT_LE(std::abs(cross), 1e-12 * (1 + std::abs(out.at(lin, 0)) + std::abs(out.at(lin, 1))));
  }
}
