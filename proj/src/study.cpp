#include "homog/study.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "homog/errors.hpp"

namespace homog {

SignSplit sign_split(const VoxelField& tau, const CoefficientField& coeffs,
                     const ReferenceMedium& ref) {
  const Grid& grid = coeffs.grid();
  const int m = coeffs.components();
  if (!(tau.grid() == grid) || tau.components() != m || ref.components() != m) {
    throw std::invalid_argument("sign_split: shape mismatch");
  }
  SignSplit out{VoxelField(grid, m), VoxelField(grid, m), VoxelField(grid, m)};
  const Eigen::MatrixXd& a0 = ref.matrix();
  const double a0_norm = a0.norm();

  for (std::size_t lin = 0; lin < grid.size(); ++lin) {
    if (!coeffs.masked_in(lin)) continue;
    // K = (A_h - A0)^{-1} commutes with A0 iff A_h does, and its sign
    // pattern is that of A_h - A0 on the shared eigenvectors.
    const Eigen::MatrixXd k = coeffs.local(lin);
    const double defect = (k * a0 - a0 * k).norm();
    if (defect > 1e-10 * k.norm() * a0_norm) {
      std::ostringstream msg;
      msg << "voxel " << lin << ": coefficient does not commute with the reference medium"
          << " (defect " << defect << ")";
      throw ContractViolation(msg.str());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
    const Eigen::VectorXd& values = eig.eigenvalues();
    const auto src = tau.voxel(lin);
    auto plus = out.plus.voxel(lin);
    auto minus = out.minus.voxel(lin);
    const Eigen::Map<const Eigen::VectorXd> t(src.data(), m);
    if (values.minCoeff() >= 0.0) {
      std::copy(src.begin(), src.end(), plus.begin());
    } else if (values.maxCoeff() < 0.0) {
      std::copy(src.begin(), src.end(), minus.begin());
    } else {
      const Eigen::MatrixXd& vec = eig.eigenvectors();
      Eigen::VectorXd coords = vec.transpose() * t;
      for (int i = 0; i < m; ++i) {
        if (values(i) < 0.0) coords(i) = 0.0;
      }
      const Eigen::VectorXd p = vec * coords;
      for (int c = 0; c < m; ++c) {
        plus[c] = p(c);
        minus[c] = src[c] - p(c);
      }
    }
    auto test = out.test.voxel(lin);
    for (int c = 0; c < m; ++c) test[c] = plus[c] - minus[c];
  }
  return out;
}

namespace {

double uniform_symmetric(std::mt19937_64& rng) {
  return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
}

}  // namespace

InfSupRow infsup_row(const SystemOperator& op, const InfSupOptions& options) {
  if (options.samples < 1) throw std::invalid_argument("infsup needs at least one sample");
  const DenseSystem dense = assemble_dense(op, options.dense_limit);
  InfSupRow row;
  row.side = op.grid().side();
  if (dense.voxels.empty()) return row;

  // h^d cancels between the form and the two weighted norms, so the
  // weighted singular values are those of the plain matrix.
  const Eigen::MatrixXd sym = 0.5 * (dense.matrix + dense.matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd magnitudes = eig.eigenvalues().cwiseAbs();
  row.sigma_min = magnitudes.minCoeff();
  row.sigma_max = magnitudes.maxCoeff();

  const CoefficientField& coeffs = op.coefficients();
  const ReferenceMedium& ref = op.green().reference();
  const double gamma_bound = 1.0 / ref.min_eigenvalue();
  row.floor = std::numeric_limits<double>::infinity();
  for (std::size_t lin : dense.voxels) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> local(coeffs.local(lin),
                                                         Eigen::EigenvaluesOnly);
    for (double v : local.eigenvalues()) {
      row.floor = std::min(row.floor, v >= 0.0 ? v : -v - gamma_bound);
    }
  }

  std::mt19937_64 rng(options.seed);
  VoxelField tau(op.grid(), op.components());
  row.constructive_bound = std::numeric_limits<double>::infinity();
  for (int sample = 0; sample < options.samples; ++sample) {
    for (std::size_t lin : dense.voxels) {
      for (double& v : tau.voxel(lin)) v = uniform_symmetric(rng);
    }
    const SignSplit split = sign_split(tau, coeffs, ref);
    const Eigen::VectorXd t = dense.gather(tau);
    const Eigen::VectorXd s = dense.gather(split.test);
    const double ratio = t.dot(dense.matrix * s) / (t.norm() * s.norm());
    row.constructive_bound = std::min(row.constructive_bound, ratio);
  }
  return row;
}

std::vector<InfSupRow> infsup_check(const Microstructure& micro, const ReferenceMedium& ref,
                                    GreenKind kind, const std::vector<int>& sides,
                                    const InfSupOptions& options, const GreenOptions& green) {
  std::vector<InfSupRow> rows;
  for (int side : sides) {
    CoefficientField coeffs = build_coefficients(micro, ref, side);
    GreenOperator gamma(kind, ref, coeffs.grid(), green);
    const SystemOperator op(std::move(coeffs), std::move(gamma));
    rows.push_back(infsup_row(op, options));
  }
  return rows;
}

RateFit fit_rate(const std::vector<double>& h, const std::vector<double>& error) {
  if (h.size() != error.size()) throw std::invalid_argument("fit_rate: length mismatch");
  if (h.size() < 3) {
    throw std::invalid_argument("degenerate rate fit: need at least 3 (h, error) points, got " +
                                std::to_string(h.size()));
  }
  const auto n = static_cast<double>(h.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0) || !(error[i] > 0.0)) {
      throw std::invalid_argument("fit_rate: h and error must be positive");
    }
    const double x = std::log(h[i]);
    const double y = std::log(error[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("degenerate rate fit: all h are equal");
  RateFit fit;
  fit.exponent = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.exponent * sx) / n;
  double sq = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double r = std::log(error[i]) - (fit.intercept + fit.exponent * std::log(h[i]));
    sq += r * r;
  }
  fit.residual = std::sqrt(sq / n);
  fit.h = h;
  fit.error = error;
  return fit;
}

SweepResult convergence_sweep(const Microstructure& micro, const ReferenceMedium& ref,
                              const std::vector<int>& sides, const SweepOptions& options) {
  const std::size_t needed = options.oracle ? 3 : 4;
  if (sides.size() < needed) {
    throw std::invalid_argument("degenerate rate fit: a sweep needs at least " +
                                std::to_string(needed) + " grid sizes, got " +
                                std::to_string(sides.size()));
  }
  for (std::size_t i = 0; i < sides.size(); ++i) {
    if (sides[i] < 2 || micro.grid().side() % sides[i] != 0) {
      throw std::invalid_argument("sweep side " + std::to_string(sides[i]) +
                                  " does not divide the reference side");
    }
    if (i > 0 && sides[i] <= sides[i - 1]) {
      throw std::invalid_argument("sweep sides must be strictly ascending");
    }
  }
  options.solve.validate();

  SweepResult result;
  for (int side : sides) {
    CoefficientField coeffs = build_coefficients(micro, ref, side, options.coefficients);
    GreenOperator green(options.kind, ref, coeffs.grid(), options.green);
    const SystemOperator op(std::move(coeffs), std::move(green));
    SolveResult solved = solve(op, options.solve);
    SweepRow row;
    row.side = side;
    row.value = project_column(solved.report.column, options.solve.loading);
    row.report = std::move(solved.report);
    const bool converged = row.report.converged;
    result.rows.push_back(std::move(row));
    if (!converged) {
      result.aborted = true;
      return result;
    }
  }

  result.reference = options.oracle ? *options.oracle : result.rows.back().value;
  for (auto& row : result.rows) row.error = std::abs(row.value - result.reference);

  std::vector<double> h;
  std::vector<double> error;
  const std::size_t used = options.oracle ? result.rows.size() : result.rows.size() - 1;
  for (std::size_t i = 0; i < used; ++i) {
    h.push_back(1.0 / result.rows[i].side);
    error.push_back(result.rows[i].error);
  }
  bool positive = true;
  for (double e : error) positive = positive && e > 0.0;
  if (positive) result.fit = fit_rate(h, error);
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out.precision(17);
  out << "N,h,value,error,iterations,wall_time_s,residual,converged\n";
  for (const auto& row : result.rows) {
    out << row.side << ',' << 1.0 / row.side << ',' << row.value << ',' << row.error << ','
        << row.report.iterations << ',' << row.report.wall_time_s << ','
        << row.report.residual() << ',' << (row.report.converged ? 1 : 0) << '\n';
  }
  return out.str();
}

std::vector<BenchRow> bench_table(const std::vector<BenchTiming>& timings) {
  std::map<std::pair<int, int>, double> baseline;
  for (const auto& t : timings) {
    if (t.threads == 1) baseline[{t.dim, t.side}] = t.wall_time_s;
  }
  std::vector<BenchRow> rows;
  for (const auto& t : timings) {
    if (t.threads < 1 || t.side < 2 || t.dim < 1) {
      throw std::invalid_argument("bench timing has invalid side, dimension or thread count");
    }
    BenchRow row{t, std::nullopt, std::nullopt};
    const auto it = baseline.find({t.dim, t.side});
    if (t.threads > 1 && it != baseline.end() && t.wall_time_s > 0.0) {
      row.efficiency = it->second / (t.threads * t.wall_time_s);
    }
    if (t.iterations > 0) {
      const double n = t.side;
      row.ratio = t.wall_time_s / (t.iterations * std::pow(n, t.dim) * std::log(n));
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<BenchRow> bench(const Microstructure& micro, const ReferenceMedium& ref,
                            const BenchOptions& options) {
  options.solve.validate();
  const int saved = fft_threads();
  std::vector<BenchTiming> timings;
  try {
    for (int side : options.sides) {
      CoefficientField coeffs = build_coefficients(micro, ref, side);
      GreenOperator green(options.kind, ref, coeffs.grid());
      const SystemOperator op(std::move(coeffs), std::move(green));
      for (int threads : options.threads) {
        set_fft_threads(threads);
        const SolveResult solved = solve(op, options.solve);
        timings.push_back({side, micro.grid().dim(), threads, solved.report.iterations,
                           solved.report.wall_time_s});
      }
    }
  } catch (...) {
    set_fft_threads(saved);
    throw;
  }
  set_fft_threads(saved);
  return bench_table(timings);
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "N,P,iterations,T_P,E,ratio\n";
  for (const auto& row : rows) {
    out << row.timing.side << ',' << row.timing.threads << ',' << row.timing.iterations << ','
        << row.timing.wall_time_s << ',';
    if (row.efficiency) out << *row.efficiency;
    out << ',';
    if (row.ratio) out << *row.ratio;
    out << '\n';
  }
  return out.str();
}

}  // namespace homog
