#include "homog/solvers.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "homog/errors.hpp"

namespace homog {

std::string to_string(SolverKind kind) {
  return kind == SolverKind::ConjugateGradient ? "cg" : "fixed-point";
}

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "cg") return SolverKind::ConjugateGradient;
  if (name == "fixed-point" || name == "fixed_point") return SolverKind::FixedPoint;
  throw std::invalid_argument("unknown solver '" + name + "' (expected cg or fixed-point)");
}

void SolveConfig::validate() const {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw std::invalid_argument("rel_tol must lie in (0, 1)");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// y += alpha x
void axpy(double alpha, const VoxelField& x, VoxelField& y) {
  auto src = x.data();
  auto dst = y.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += alpha * src[i];
}

SolveReport start_report(const SystemOperator& op, SolverKind kind) {
  SolveReport report;
  report.side = op.grid().side();
  report.variant = to_string(op.green().kind());
  report.solver = to_string(kind);
  return report;
}

void check_finite(const VoxelField& field, const char* where) {
  if (!field.all_finite()) {
    throw std::runtime_error(std::string(where) + ": non-finite iterate");
  }
}

}  // namespace

SolveResult solve_cg(const SystemOperator& op, const SolveConfig& config) {
  config.validate();
  const auto start = Clock::now();
  SolveReport report = start_report(op, SolverKind::ConjugateGradient);
  const Grid& grid = op.grid();
  const int m = op.components();

  const VoxelField b = op.rhs(config.loading);
  VoxelField x(grid, m);
  const double b_norm = weighted_norm(b);
  if (b_norm == 0.0) {
    report.residuals.push_back(0.0);
    report.converged = true;
    report.column = homogenized_column(x, config.loading, op.green().reference());
    report.wall_time_s = seconds_since(start);
    return {std::move(x), std::move(report)};
  }

  SpectralField work(grid, m);
  VoxelField r = b;
  VoxelField dir = r;
  VoxelField q(grid, m);
  double rr = weighted_dot(r, r);
  report.residuals.push_back(1.0);

  while (report.iterations < config.max_iter) {
    op.apply(dir, work, q);
    const double dq = weighted_dot(dir, q);
    if (!std::isfinite(dq)) throw std::runtime_error("solve_cg: non-finite iterate");
    // Breakdown only happens on indefinite systems.
    if (dq == 0.0) break;
    const double alpha = rr / dq;
    axpy(alpha, dir, x);
    axpy(-alpha, q, r);
    ++report.iterations;
    double rr_new = weighted_dot(r, r);
    double rel = std::sqrt(rr_new) / b_norm;
    if (!std::isfinite(rel)) throw std::runtime_error("solve_cg: non-finite iterate");

    if (rel <= config.rel_tol) {
      // Confirm against the true residual; restart from it if the
      // recurrence has drifted.
      op.apply(x, work, q);
      auto rd = r.data();
      auto bd = b.data();
      auto qd = q.data();
      for (std::size_t i = 0; i < rd.size(); ++i) rd[i] = bd[i] - qd[i];
      rr_new = weighted_dot(r, r);
      rel = std::sqrt(rr_new) / b_norm;
      report.residuals.push_back(rel);
      if (rel <= config.rel_tol) {
        report.converged = true;
        break;
      }
      dir = r;
      rr = rr_new;
      continue;
    }
    report.residuals.push_back(rel);
    const double beta = rr_new / rr;
    rr = rr_new;
    auto dd = dir.data();
    auto rd = r.data();
    for (std::size_t i = 0; i < dd.size(); ++i) dd[i] = rd[i] + beta * dd[i];
  }
  check_finite(x, "solve_cg");
  report.column = homogenized_column(x, config.loading, op.green().reference());
  report.wall_time_s = seconds_since(start);
  return {std::move(x), std::move(report)};
}

SolveResult solve_fixed_point(const SystemOperator& op, const SolveConfig& config) {
  config.validate();
  const auto start = Clock::now();
  SolveReport report = start_report(op, SolverKind::FixedPoint);
  const Grid& grid = op.grid();
  const int m = op.components();
  const CoefficientField& coeffs = op.coefficients();

  const VoxelField b = op.rhs(config.loading);
  VoxelField tau(grid, m);
  const double b_norm = weighted_norm(b);
  if (b_norm == 0.0) {
    report.residuals.push_back(0.0);
    report.converged = true;
    report.column = homogenized_column(tau, config.loading, op.green().reference());
    report.wall_time_s = seconds_since(start);
    return {std::move(tau), std::move(report)};
  }

  // (A_h - A0) per voxel is the inverse of the stored K.
  const auto mm = static_cast<std::size_t>(m) * m;
  std::vector<double> contrast(grid.size() * mm, 0.0);
  for (std::size_t lin = 0; lin < grid.size(); ++lin) {
    if (!coeffs.masked_in(lin)) continue;
    Eigen::Map<Eigen::MatrixXd>(contrast.data() + lin * mm, m, m) = coeffs.local(lin).inverse();
  }

  SpectralField work(grid, m);
  VoxelField green_term(grid, m);
  VoxelField residual(grid, m);
  while (true) {
    apply_green_field(tau, op.green(), work, green_term);
    for (std::size_t lin = 0; lin < grid.size(); ++lin) {
      auto res = residual.voxel(lin);
      if (!coeffs.masked_in(lin)) {
        std::fill(res.begin(), res.end(), 0.0);
        continue;
      }
      const auto local = coeffs.local(lin);
      const auto t = tau.voxel(lin);
      const auto g = green_term.voxel(lin);
      for (int r = 0; r < m; ++r) {
        double acc = g[r] - config.loading(r);
        for (int c = 0; c < m; ++c) acc += local(r, c) * t[c];
        res[r] = acc;
      }
    }
    const double rel = weighted_norm(residual) / b_norm;
    if (!std::isfinite(rel)) throw std::runtime_error("solve_fixed_point: non-finite iterate");
    report.residuals.push_back(rel);
    const std::size_t n = report.residuals.size();
    if (n > 10 && rel > 10.0 * report.residuals[n - 11]) {
      std::ostringstream msg;
      msg << "fixed-point iterations diverge (residual " << report.residuals[n - 11] << " -> "
          << rel << " over 10 iterations); choose a reference medium between the extreme "
          << "phase moduli";
      throw DivergenceError(msg.str());
    }
    if (rel <= config.rel_tol) {
      report.converged = true;
      break;
    }
    if (report.iterations >= config.max_iter) break;

    for (std::size_t lin = 0; lin < grid.size(); ++lin) {
      if (!coeffs.masked_in(lin)) continue;
      const double* block = contrast.data() + lin * mm;
      auto t = tau.voxel(lin);
      const auto g = green_term.voxel(lin);
      double rhs_local[6];
      for (int c = 0; c < m; ++c) rhs_local[c] = config.loading(c) - g[c];
      for (int r = 0; r < m; ++r) {
        double acc = 0.0;
        for (int c = 0; c < m; ++c) acc += block[c * m + r] * rhs_local[c];
        t[r] = acc;
      }
    }
    ++report.iterations;
  }
  report.column = homogenized_column(tau, config.loading, op.green().reference());
  report.wall_time_s = seconds_since(start);
  return {std::move(tau), std::move(report)};
}

SolveResult solve(const SystemOperator& op, const SolveConfig& config) {
  return config.solver == SolverKind::ConjugateGradient ? solve_cg(op, config)
                                                        : solve_fixed_point(op, config);
}

Eigen::VectorXd homogenized_column(const VoxelField& tau, const Eigen::VectorXd& loading,
                                   const ReferenceMedium& ref) {
  if (loading.size() != tau.components() || ref.components() != tau.components()) {
    throw std::invalid_argument("homogenized_column: component count mismatch");
  }
  const std::vector<double> mean = tau.mean();
  Eigen::VectorXd out = ref.matrix() * loading;
  for (int c = 0; c < tau.components(); ++c) out(c) += mean[c];
  return out;
}

HomogenizedTensor homogenized_tensor(const SystemOperator& op, const SolveConfig& config) {
  const int m = op.components();
  HomogenizedTensor out;
  out.physics = op.green().reference().physics();
  out.matrix = Eigen::MatrixXd::Zero(m, m);
  for (int c = 0; c < m; ++c) {
    SolveConfig column_config = config;
    column_config.loading = Eigen::VectorXd::Unit(m, c);
    SolveResult result = solve(op, column_config);
    out.matrix.col(c) = result.report.column;
    out.complete = out.complete && result.report.converged;
    out.reports.push_back(std::move(result.report));
  }
  const double scale = out.matrix.cwiseAbs().maxCoeff();
  const Eigen::MatrixXd skew = out.matrix - out.matrix.transpose();
  out.asymmetry = scale > 0.0 ? skew.cwiseAbs().maxCoeff() / scale : 0.0;
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  return out;
}

VoxelField reconstruct_strain(const VoxelField& tau, const Eigen::VectorXd& loading,
                              const GreenOperator& green) {
  if (loading.size() != tau.components()) {
    throw std::invalid_argument("reconstruct_strain: loading size mismatch");
  }
  VoxelField out = apply_green_field(tau, green);
  for (std::size_t lin = 0; lin < out.grid().size(); ++lin) {
    auto v = out.voxel(lin);
    for (int c = 0; c < out.components(); ++c) v[c] = loading(c) - v[c];
  }
  return out;
}

std::string report_csv_header(int components) {
  std::ostringstream out;
  out << "N,variant,solver,iterations,wall_time_s,residual";
  for (int c = 0; c < components; ++c) out << ",A_" << c;
  return out.str();
}

std::string report_csv_row(const SolveReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << report.side << ',' << report.variant << ',' << report.solver << ','
      << report.iterations << ',' << report.wall_time_s << ',' << report.residual();
  for (Eigen::Index c = 0; c < report.column.size(); ++c) out << ',' << report.column(c);
  return out.str();
}

}  // namespace homog
