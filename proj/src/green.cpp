#include "homog/green.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "homog/errors.hpp"

namespace homog {

std::string to_string(GreenKind kind) {
  switch (kind) {
    case GreenKind::Consistent: return "consistent";
    case GreenKind::Truncated: return "truncated";
    case GreenKind::Filtered: return "filtered";
    case GreenKind::FiniteDifference: return "fd";
  }
  return "unknown";
}

GreenKind parse_green_kind(const std::string& name) {
  if (name == "consistent") return GreenKind::Consistent;
  if (name == "truncated") return GreenKind::Truncated;
  if (name == "filtered") return GreenKind::Filtered;
  if (name == "fd") return GreenKind::FiniteDifference;
  throw std::invalid_argument("unknown Green operator '" + name +
                              "' (expected consistent, truncated, filtered or fd)");
}

namespace {

using SmallMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 6>;

/// Flattened reference data for the per-frequency kernels.
struct Kernel {
  Physics physics;
  int d;
  int m;
  double a[3][3] = {};  // conductivity
  double mu = 0.0;
  double coupling = 0.0;  // (lambda + mu) / (mu (lambda + 2 mu))
  int pi[6] = {};
  int pj[6] = {};
  double w[6] = {};
  Eigen::MatrixXd matrix;   // A0
  Eigen::MatrixXd inverse;  // A0^{-1}, for the Nyquist fix

  explicit Kernel(const ReferenceMedium& ref)
      : physics(ref.physics()),
        d(ref.dim()),
        m(ref.components()),
        matrix(ref.matrix()),
        inverse(ref.inverse()) {
    if (physics == Physics::Conduction) {
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) a[i][j] = ref.matrix()(i, j);
      }
      return;
    }
    if (!ref.isotropic()) {
      throw std::invalid_argument("elastic reference medium must be isotropic");
    }
    mu = ref.isotropic()->mu();
    const double lambda = ref.isotropic()->lambda();
    coupling = (lambda + mu) / (mu * (lambda + 2.0 * mu));
    for (int c = 0; c < m; ++c) {
      const SymPair p = sym_pair(d, c);
      pi[c] = p.i;
      pj[c] = p.j;
      w[c] = sym_weight(d, c);
    }
  }

  /// out += weight * Gamma0(xi) in. Gamma0 is homogeneous of degree zero
  /// so xi need not be normalized; xi = 0 contributes nothing.
  template <typename S>
  void add_continuous(const double* xi, double weight, const S* in, S* out) const {
    if (physics == Physics::Conduction) {
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) s += xi[i] * a[i][j] * xi[j];
      }
      if (s == 0.0) return;
      S dot = S(0);
      for (int i = 0; i < d; ++i) dot += xi[i] * in[i];
      const S coef = dot * (weight / s);
      for (int i = 0; i < d; ++i) out[i] += coef * xi[i];
      return;
    }
    double n2 = 0.0;
    for (int i = 0; i < d; ++i) n2 += xi[i] * xi[i];
    if (n2 == 0.0) return;
    const double inv = 1.0 / std::sqrt(n2);
    double n[3] = {0.0, 0.0, 0.0};
    for (int i = 0; i < d; ++i) n[i] = xi[i] * inv;
    S t[3][3] = {};
    for (int c = 0; c < m; ++c) {
      const S v = in[c] / w[c];
      t[pi[c]][pj[c]] = v;
      t[pj[c]][pi[c]] = v;
    }
    S an[3] = {S(0), S(0), S(0)};
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) an[i] += t[i][j] * n[j];
    }
    S nan = S(0);
    for (int i = 0; i < d; ++i) nan += n[i] * an[i];
    const double half_compliance = 0.5 / mu;
    for (int c = 0; c < m; ++c) {
      const int i = pi[c];
      const int j = pj[c];
      const S r = (n[i] * an[j] + an[i] * n[j]) * half_compliance - coupling * nan * n[i] * n[j];
      out[c] += (weight * w[c]) * r;
    }
  }

  Eigen::MatrixXd continuous_matrix(const double* xi, double weight = 1.0) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
    double unit[6] = {};
    for (int c = 0; c < m; ++c) {
      unit[c] = 1.0;
      add_continuous(xi, weight, unit, out.col(c).data());
      unit[c] = 0.0;
    }
    return out;
  }

  /// Strain (gradient) of a displacement (potential) amplitude u along the
  /// complex difference vector v, as an m x (d or 1) matrix.
  SmallMatrix difference_map(const Complex* v) const {
    if (physics == Physics::Conduction) {
      SmallMatrix b(d, 1);
      for (int i = 0; i < d; ++i) b(i, 0) = v[i];
      return b;
    }
    SmallMatrix b = SmallMatrix::Zero(m, d);
    for (int c = 0; c < m; ++c) {
      const int i = pi[c];
      const int j = pj[c];
      // sym(v (x) u)_ij = (v_i u_j + v_j u_i) / 2, scaled to coordinates.
      b(c, j) += 0.5 * w[c] * v[i];
      b(c, i) += 0.5 * w[c] * v[j];
    }
    return b;
  }

  SmallMatrix stiffness() const { return SmallMatrix(matrix.cast<Complex>()); }

  /// B (B^H A0 B)^{-1} B^H for the forward-difference vector v; zero at v = 0.
  SmallMatrix difference_projector(const Complex* v, const SmallMatrix& a0) const {
    double norm2 = 0.0;
    for (int i = 0; i < d; ++i) norm2 += std::norm(v[i]);
    if (norm2 == 0.0) return SmallMatrix::Zero(m, m);
    const SmallMatrix b = difference_map(v);
    const SmallMatrix gram = b.adjoint() * a0 * b;
    const SmallMatrix solved = gram.ldlt().solve(b.adjoint());
    SmallMatrix out = b * solved;
    // Exact Hermitian part; the LDLT solve leaves rounding-level skew.
    return 0.5 * (out + out.adjoint());
  }
};

double sinc_squared(double x) {
  if (x == 0.0) return 1.0;
  const double s = std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
  return s * s;
}

/// cos^2(pi x / 2), exactly zero at odd integers.
double cos_squared_half(double x) {
  const double r = std::remainder(x, 2.0);
  if (std::abs(r) == 1.0) return 0.0;
  const double c = std::cos(0.5 * std::numbers::pi * x);
  return c * c;
}

long floor_mod(long k, long n) {
  long r = k % n;
  return r < 0 ? r + n : r;
}

void fd_vector(const MultiIndex& k, int d, int side, Complex* v) {
  for (int i = 0; i < d; ++i) {
    const long kr = floor_mod(k[i], side);
    if (kr == 0) {
      v[i] = Complex(0.0, 0.0);
      continue;
    }
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(kr) / side;
    v[i] = Complex(std::cos(angle) - 1.0, std::sin(angle));
  }
}

}  // namespace

Eigen::MatrixXd gamma_continuous(const Eigen::VectorXd& freq, const ReferenceMedium& ref) {
  if (freq.size() != ref.dim()) {
    throw std::invalid_argument("frequency length does not match the reference dimension");
  }
  const Kernel kernel(ref);
  return kernel.continuous_matrix(freq.data());
}

SeriesValue consistent_series(const MultiIndex& k, const Grid& grid, const ReferenceMedium& ref,
                              int n_max) {
  if (n_max < 1) throw std::invalid_argument("consistent series needs n_max >= 1");
  if (ref.dim() != grid.dim()) throw std::invalid_argument("reference/grid dimension mismatch");
  const Kernel kernel(ref);
  const int d = grid.dim();
  const int m = kernel.m;
  const double side = grid.side();

  // Axes where k is a multiple of N carry only the x = 0 alias: every other
  // term has sinc^2(integer) = 0. The window is centered on the reduced
  // frequency, so the truncated sum is exactly periodic in k and even under
  // k -> -k (real outputs). A Nyquist axis takes the symmetric half-integer
  // set +-1/2, ..., +-(n_max + 1/2).
  int lo[3] = {0, 0, 0};
  int hi[3] = {0, 0, 0};
  bool nyquist[3] = {false, false, false};
  double base[3] = {0.0, 0.0, 0.0};
  for (int i = 0; i < d; ++i) {
    const long reduced = floor_mod(k[i], grid.side());
    if (reduced == 0) continue;
    const CenteredFrequency c = centered_freq(reduced, grid.side());
    base[i] = static_cast<double>(c.value) / side;
    nyquist[i] = c.nyquist;
    lo[i] = c.nyquist ? -n_max - 1 : -n_max;
    hi[i] = n_max;
  }

  std::vector<Eigen::MatrixXd> shell_sum(n_max + 1, Eigen::MatrixXd::Zero(m, m));
  std::vector<double> shell_weight(n_max + 1, 0.0);
  double xi[3] = {0.0, 0.0, 0.0};
  for (int n2 = lo[2]; n2 <= hi[2]; ++n2) {
    for (int n1 = lo[1]; n1 <= hi[1]; ++n1) {
      for (int n0 = lo[0]; n0 <= hi[0]; ++n0) {
        const int n[3] = {n0, n1, n2};
        double weight = 1.0;
        int shell = 0;
        for (int i = 0; i < d; ++i) {
          xi[i] = base[i] + n[i];
          weight *= sinc_squared(xi[i]);
          shell = std::max(shell, nyquist[i] && n[i] < 0 ? -n[i] - 1 : std::abs(n[i]));
        }
        shell_weight[shell] += weight;
        if (weight == 0.0) continue;
        shell_sum[shell] += kernel.continuous_matrix(xi, weight);
      }
    }
  }

  // Aliases outside the cube carry total weight 1 - W (the sinc^2 weights
  // form a partition of unity); assign them the weighted mean of the outer
  // shell.
  auto partial = [&](int half_width) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(m, m);
    double weight = 0.0;
    for (int s = 0; s <= half_width; ++s) {
      sum += shell_sum[s];
      weight += shell_weight[s];
    }
    if (shell_weight[half_width] > 0.0) {
      sum += (1.0 - weight) / shell_weight[half_width] * shell_sum[half_width];
    }
    return sum;
  };

  SeriesValue out;
  out.symbol = partial(n_max);
  out.symbol = 0.5 * (out.symbol + out.symbol.transpose()).eval();
  const double norm = out.symbol.norm();
  if (norm > 0.0) out.estimate = (out.symbol - partial(n_max - 1)).norm() / norm;
  return out;
}

GreenOperator::GreenOperator(GreenKind kind, ReferenceMedium ref, const Grid& grid,
                             GreenOptions options)
    : kind_(kind), ref_(std::move(ref)), grid_(grid), options_(options) {
  if (ref_.dim() != grid_.dim()) {
    throw std::invalid_argument("reference medium dimension does not match the grid");
  }
  // Validates isotropy of an elastic reference.
  const Kernel check(ref_);
  (void)check;
  if (kind_ != GreenKind::Consistent) return;

  const ConsistentOptions& opts = options_.consistent;
  if (opts.n_max < 1) throw std::invalid_argument("consistent series needs n_max >= 1");
  const auto m = static_cast<std::size_t>(components());
  table_.assign(grid_.size() * m * m, 0.0);
  for (std::size_t lin = 0; lin < grid_.size(); ++lin) {
    const SeriesValue value = consistent_series(grid_.multi(lin), grid_, ref_, opts.n_max);
    series_estimate_ = std::max(series_estimate_, value.estimate);
    Eigen::Map<Eigen::MatrixXd>(table_.data() + lin * m * m, m, m) = value.symbol;
  }
  if (series_estimate_ > opts.tol) {
    std::ostringstream msg;
    msg << "consistent Green series not converged at n_max = " << opts.n_max
        << ": estimate " << series_estimate_ << " > tol " << opts.tol;
    throw NonConvergence(msg.str(), series_estimate_);
  }
}

Eigen::MatrixXcd GreenOperator::symbol(const MultiIndex& k) const {
  const Kernel kernel(ref_);
  const int d = grid_.dim();
  const int m = kernel.m;
  const int side = grid_.side();
  MultiIndex kr{0, 0, 0};
  for (int i = 0; i < d; ++i) kr[i] = floor_mod(k[i], side);

  switch (kind_) {
    case GreenKind::Consistent: {
      const auto mm = static_cast<std::size_t>(m) * m;
      return Eigen::Map<const Eigen::MatrixXd>(table_.data() + grid_.linear(kr) * mm, m, m)
          .cast<Complex>();
    }
    case GreenKind::Truncated: {
      double xi[3] = {0.0, 0.0, 0.0};
      bool nyquist = false;
      for (int i = 0; i < d; ++i) {
        const CenteredFrequency f = centered_freq(kr[i], side);
        xi[i] = static_cast<double>(f.value);
        nyquist = nyquist || f.nyquist;
      }
      if (nyquist && options_.nyquist_fix) return kernel.inverse.cast<Complex>();
      return kernel.continuous_matrix(xi).cast<Complex>();
    }
    case GreenKind::Filtered: {
      Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(m, m);
      double xi[3] = {0.0, 0.0, 0.0};
      for (int combo = 0; combo < (1 << d); ++combo) {
        double weight = 1.0;
        for (int i = 0; i < d; ++i) {
          xi[i] = static_cast<double>(kr[i]) / side - ((combo >> i) & 1);
          weight *= cos_squared_half(xi[i]);
        }
        if (weight != 0.0) sum += kernel.continuous_matrix(xi, weight);
      }
      return sum.cast<Complex>();
    }
    case GreenKind::FiniteDifference: {
      Complex v[3];
      fd_vector(kr, d, side, v);
      return Eigen::MatrixXcd(kernel.difference_projector(v, kernel.stiffness()));
    }
  }
  return Eigen::MatrixXcd::Zero(m, m);
}

void GreenOperator::apply_spectral(SpectralField& spectrum) const {
  if (!(spectrum.grid() == grid_) || spectrum.components() != components()) {
    throw std::invalid_argument("spectrum shape does not match the Green operator");
  }
  const Kernel kernel(ref_);
  const int d = grid_.dim();
  const int m = kernel.m;
  const int side = grid_.side();
  Complex in[6];

  if (kind_ == GreenKind::Consistent) {
    const auto mm = static_cast<std::size_t>(m) * m;
    for (std::size_t lin = 0; lin < grid_.size(); ++lin) {
      auto coef = spectrum.coef(lin);
      std::copy(coef.begin(), coef.end(), in);
      const double* block = table_.data() + lin * mm;
      for (int r = 0; r < m; ++r) {
        Complex acc(0.0, 0.0);
        for (int c = 0; c < m; ++c) acc += block[c * m + r] * in[c];
        coef[r] = acc;
      }
    }
    return;
  }

  // Per-axis lookup tables: aliases and weights depend on one index each.
  std::vector<double> centered(side);
  std::vector<char> nyquist(side);
  std::vector<double> alias(2 * side);
  std::vector<double> alias_weight(2 * side);
  std::vector<Complex> difference(side);
  for (long k = 0; k < side; ++k) {
    const CenteredFrequency f = centered_freq(k, side);
    centered[k] = static_cast<double>(f.value);
    nyquist[k] = f.nyquist;
    for (int s = 0; s < 2; ++s) {
      const double x = static_cast<double>(k) / side - s;
      alias[2 * k + s] = x;
      alias_weight[2 * k + s] = cos_squared_half(x);
    }
    const MultiIndex one{k, 0, 0};
    fd_vector(one, 1, side, &difference[k]);
  }
  const SmallMatrix a0 = kernel.stiffness();

  for (std::size_t lin = 0; lin < grid_.size(); ++lin) {
    const MultiIndex k = grid_.multi(lin);
    auto coef = spectrum.coef(lin);
    std::copy(coef.begin(), coef.end(), in);
    std::fill(coef.begin(), coef.end(), Complex(0.0, 0.0));
    switch (kind_) {
      case GreenKind::Truncated: {
        double xi[3] = {0.0, 0.0, 0.0};
        bool at_nyquist = false;
        for (int i = 0; i < d; ++i) {
          xi[i] = centered[k[i]];
          at_nyquist = at_nyquist || nyquist[k[i]];
        }
        if (at_nyquist && options_.nyquist_fix) {
          for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) coef[r] += kernel.inverse(r, c) * in[c];
          }
        } else {
          kernel.add_continuous(xi, 1.0, in, coef.data());
        }
        break;
      }
      case GreenKind::Filtered: {
        double xi[3] = {0.0, 0.0, 0.0};
        for (int combo = 0; combo < (1 << d); ++combo) {
          double weight = 1.0;
          for (int i = 0; i < d; ++i) {
            const std::size_t slot = 2 * k[i] + ((combo >> i) & 1);
            xi[i] = alias[slot];
            weight *= alias_weight[slot];
          }
          if (weight != 0.0) kernel.add_continuous(xi, weight, in, coef.data());
        }
        break;
      }
      case GreenKind::FiniteDifference: {
        Complex v[3];
        for (int i = 0; i < d; ++i) v[i] = difference[k[i]];
        if (kernel.physics == Physics::Conduction) {
          Complex dot(0.0, 0.0);
          double denom = 0.0;
          for (int i = 0; i < d; ++i) {
            dot += std::conj(v[i]) * in[i];
            for (int j = 0; j < d; ++j) denom += (std::conj(v[i]) * kernel.a[i][j] * v[j]).real();
          }
          if (denom == 0.0) break;
          for (int i = 0; i < d; ++i) coef[i] = v[i] * (dot / denom);
        } else {
          const SmallMatrix proj = kernel.difference_projector(v, a0);
          for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) coef[r] += proj(r, c) * in[c];
          }
        }
        break;
      }
      case GreenKind::Consistent:
        break;
    }
  }
}

}  // namespace homog
