/**
 * @file   study.hpp
 *
 * @brief  Verification and measurement harness: sign split of a
 *         polarization, dense inf-sup estimates, grid-refinement sweeps with
 *         rate fits, and timing/parallel-efficiency tables.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "homog/microstructure.hpp"
#include "homog/solvers.hpp"

namespace homog {

struct SignSplit {
  VoxelField plus;   ///< components where A_h exceeds A0
  VoxelField minus;  ///< components where A_h is below A0
  VoxelField test;   ///< plus - minus
};

/// Splits tau voxelwise along the common eigenvectors of A_h and A0.
/// @throws ContractViolation naming the first masked-in voxel where A_h and
///         A0 do not commute to 1e-10 (relative).
SignSplit sign_split(const VoxelField& tau, const CoefficientField& coeffs,
                     const ReferenceMedium& ref);

struct InfSupRow {
  int side = 0;
  /// Extreme singular values of the bilinear form in the h^d-weighted norm.
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  /// min over the samples of a(tau, s) / (|tau| |s|) with s from sign_split.
  double constructive_bound = 0.0;
  /// Lower bound on the constructive ratio implied by the voxel spectra and
  /// Gamma <= A0^{-1}; may be negative when voxels mix phases.
  double floor = 0.0;
};

struct InfSupOptions {
  int samples = 100;
  std::uint64_t seed = 1;
  std::size_t dense_limit = kDefaultDenseLimit;
};

InfSupRow infsup_row(const SystemOperator& op, const InfSupOptions& options = {});

/// One row per side, each built from `micro` with the given reference and
/// Green operator.
/// @throws SizeLimitError if a dense system exceeds the limit.
std::vector<InfSupRow> infsup_check(const Microstructure& micro, const ReferenceMedium& ref,
                                    GreenKind kind, const std::vector<int>& sides,
                                    const InfSupOptions& options = {},
                                    const GreenOptions& green = {});

struct RateFit {
  double exponent = 0.0;   ///< slope of log(error) against log(h)
  double intercept = 0.0;
  double residual = 0.0;   ///< RMS of the log-log fit
  std::vector<double> h;
  std::vector<double> error;
};

/// Ordinary least squares on (log h, log error).
/// @throws std::invalid_argument with fewer than 3 points or a non-positive
///         error.
RateFit fit_rate(const std::vector<double>& h, const std::vector<double>& error);

struct SweepOptions {
  GreenKind kind = GreenKind::Filtered;
  GreenOptions green;
  CoefficientOptions coefficients;
  SolveConfig solve;
  /// Exact effective value p^T A* p when known; otherwise errors are taken
  /// against the finest grid.
  std::optional<double> oracle;
};

struct SweepRow {
  int side = 0;
  double value = 0.0;  ///< p^T A*_h p
  double error = 0.0;
  SolveReport report;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<RateFit> fit;
  /// True when an unconverged solve stopped the sweep; rows hold the
  /// completed grids.
  bool aborted = false;
  double reference = 0.0;
};

/// @throws std::invalid_argument if sides are not strictly ascending
///         divisors of the microstructure grid, or too few for a fit (3 with
///         an oracle, 4 without).
SweepResult convergence_sweep(const Microstructure& micro, const ReferenceMedium& ref,
                              const std::vector<int>& sides, const SweepOptions& options);

std::string sweep_csv(const SweepResult& result);

struct BenchTiming {
  int side = 0;
  int dim = 3;
  int threads = 1;
  int iterations = 0;
  double wall_time_s = 0.0;
};

struct BenchRow {
  BenchTiming timing;
  /// T_1 / (P T_P); absent for P = 1 or when T_1 was not measured.
  std::optional<double> efficiency;
  /// T / (iterations N^d log N); absent when no iteration was run.
  std::optional<double> ratio;
};

/// Derives efficiencies and cost ratios from raw timings.
std::vector<BenchRow> bench_table(const std::vector<BenchTiming>& timings);

struct BenchOptions {
  std::vector<int> sides;
  std::vector<int> threads{1, 2, 4};
  GreenKind kind = GreenKind::Filtered;
  SolveConfig solve;
};

/// Times one solve per (side, thread count), pinning the FFT thread count
/// for each run and restoring it afterwards.
std::vector<BenchRow> bench(const Microstructure& micro, const ReferenceMedium& ref,
                            const BenchOptions& options);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace homog
