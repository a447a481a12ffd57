/**
 * @file   solvers.hpp
 *
 * @brief  Iterative solution of the Lippmann-Schwinger system, effective
 *         coefficients A* p = A0 p + mean(tau), and strain recovery.
 *
 * Residuals are relative, |apply(tau) - rhs| / |rhs|, in the h^d-weighted
 * norm. Both solvers start from tau = 0.
 */
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "homog/operator.hpp"

namespace homog {

enum class SolverKind { ConjugateGradient, FixedPoint };

/// "cg" | "fixed-point"
std::string to_string(SolverKind kind);
SolverKind parse_solver_kind(const std::string& name);

struct SolveConfig {
  SolverKind solver = SolverKind::ConjugateGradient;
  double rel_tol = 1e-5;
  int max_iter = 1000;
  Eigen::VectorXd loading;

  /// @throws std::invalid_argument unless 0 < rel_tol < 1 and max_iter >= 1.
  void validate() const;
};

struct SolveReport {
  int side = 0;
  std::string variant;
  std::string solver;
  int iterations = 0;
  /// Relative residual after each iteration; entry 0 is the initial guess.
  std::vector<double> residuals;
  double wall_time_s = 0.0;
  bool converged = false;
  /// A*_h p.
  Eigen::VectorXd column;

  double residual() const { return residuals.empty() ? 0.0 : residuals.back(); }
};

struct SolveResult {
  VoxelField polarization;
  SolveReport report;
};

/// Plain conjugate gradients. Valid for systems that are definite of either
/// sign (a reference softer or stiffer than every phase). Reaching max_iter
/// is reported, not thrown.
/// @throws std::runtime_error on non-finite iterates.
SolveResult solve_cg(const SystemOperator& op, const SolveConfig& config);

/// Basic scheme tau <- (A_h - A0)(p - Gamma * tau) on masked-in voxels.
/// @throws DivergenceError if the residual grows more than tenfold over ten
///         iterations.
SolveResult solve_fixed_point(const SystemOperator& op, const SolveConfig& config);

/// Dispatches on config.solver.
SolveResult solve(const SystemOperator& op, const SolveConfig& config);

/// A0 p + h^d sum_beta tau_beta.
Eigen::VectorXd homogenized_column(const VoxelField& tau, const Eigen::VectorXd& loading,
                                   const ReferenceMedium& ref);

struct HomogenizedTensor {
  Physics physics = Physics::Conduction;
  /// Symmetrized effective tensor.
  Eigen::MatrixXd matrix;
  /// max |A - A^T| / max |A| before symmetrization.
  double asymmetry = 0.0;
  /// False if any column solve did not converge.
  bool complete = true;
  std::vector<SolveReport> reports;
};

/// Solves for each unit loading (config.loading is ignored).
HomogenizedTensor homogenized_tensor(const SystemOperator& op, const SolveConfig& config);

/// e = p - Gamma * tau, the voxelwise estimate of p + grad w_p. Its mean is p.
VoxelField reconstruct_strain(const VoxelField& tau, const Eigen::VectorXd& loading,
                              const GreenOperator& green);

/// CSV columns: N,variant,solver,iterations,wall_time_s,residual,A_0..A_{m-1}.
std::string report_csv_header(int components);
std::string report_csv_row(const SolveReport& report);

}  // namespace homog
