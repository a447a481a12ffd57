// Small builders shared by the test binaries.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "homog/microstructure.hpp"
#include "homog/operator.hpp"

namespace homog::testing {

inline PhaseTensor scalar(int dim, double a) { return PhaseTensor::isotropic_conduction(dim, a); }

inline GreenOptions series_options(int n_max = 12, double tol = 1e-3) {
  GreenOptions o;
  o.consistent.n_max = n_max;
  o.consistent.tol = tol;
  return o;
}

inline SystemOperator make_operator(const Microstructure& micro, const ReferenceMedium& ref,
                                    int side, GreenKind kind,
                                    const GreenOptions& options = series_options()) {
  CoefficientField coeffs = build_coefficients(micro, ref, side);
  GreenOperator green(kind, ref, coeffs.grid(), options);
  return SystemOperator(std::move(coeffs), std::move(green));
}

/// Uniform random values on masked-in voxels, zero elsewhere.
inline VoxelField random_polarization(const SystemOperator& op, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VoxelField tau(op.grid(), op.components());
  for (std::size_t lin = 0; lin < op.grid().size(); ++lin) {
    if (!op.coefficients().masked_in(lin)) continue;
    for (double& v : tau.voxel(lin)) v = u(rng);
  }
  return tau;
}

inline double max_abs_diff(const VoxelField& a, const VoxelField& b) {
  double out = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out = std::max(out, std::abs(a.data()[i] - b.data()[i]));
  }
  return out;
}

inline double max_abs(const VoxelField& a) {
  double out = 0.0;
  for (double v : a.data()) out = std::max(out, std::abs(v));
  return out;
}

}  // namespace homog::testing
