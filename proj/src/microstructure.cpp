#include "homog/microstructure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "homog/errors.hpp"

namespace homog {

double periodic_distance(const Point3& a, const Point3& b) {
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    double d = a[i] - b[i];
    d -= std::round(d);
    sum += d * d;
  }
  return std::sqrt(sum);
}

double SpherePack::volume_fraction() const {
  return static_cast<double>(centers.size()) * 4.0 / 3.0 * std::numbers::pi * radius *
         radius * radius;
}

namespace {

/// Uniform double in [0, 1) from the top 53 bits; identical on every
/// platform, unlike std::uniform_real_distribution.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by multiply-shift.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

double wrap01(double x) {
  x -= std::floor(x);
  return x >= 1.0 ? 0.0 : x;
}

/// Bucket grid over the unit cube with cells at least one exclusion
/// diameter wide; falls back to a single bucket when fewer than three cells
/// fit per axis (neighbour stencils would alias).
class CellList {
 public:
  explicit CellList(double exclusion) {
    cells_ = static_cast<int>(std::floor(1.0 / exclusion));
    if (cells_ < 3) cells_ = 1;
    buckets_.resize(static_cast<std::size_t>(cells_) * cells_ * cells_);
  }

  std::size_t bucket(const Point3& p) const {
    std::size_t idx = 0;
    for (int i = 2; i >= 0; --i) {
      int c = static_cast<int>(p[i] * cells_);
      c = std::clamp(c, 0, cells_ - 1);
      idx = idx * cells_ + c;
    }
    return idx;
  }

  void insert(std::size_t id, const Point3& p) { buckets_[bucket(p)].push_back(id); }

  void erase(std::size_t id, const Point3& p) {
    auto& b = buckets_[bucket(p)];
    b.erase(std::find(b.begin(), b.end(), id));
  }

  template <typename Fn>
  bool all_neighbours(const Point3& p, Fn&& fn) const {
    if (cells_ == 1) {
      for (std::size_t id : buckets_[0]) {
        if (!fn(id)) return false;
      }
      return true;
    }
    int c[3];
    for (int i = 0; i < 3; ++i) c[i] = std::clamp(static_cast<int>(p[i] * cells_), 0, cells_ - 1);
    for (int dz = -1; dz <= 1; ++dz) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int x = (c[0] + dx + cells_) % cells_;
          const int y = (c[1] + dy + cells_) % cells_;
          const int z = (c[2] + dz + cells_) % cells_;
          const auto idx = (static_cast<std::size_t>(z) * cells_ + y) * cells_ + x;
          for (std::size_t id : buckets_[idx]) {
            if (!fn(id)) return false;
          }
        }
      }
    }
    return true;
  }

 private:
  int cells_;
  std::vector<std::vector<std::size_t>> buckets_;
};

}  // namespace

SpherePack generate_hard_spheres(std::size_t count, double radius, double gap,
                                 std::uint64_t seed, std::size_t max_steps) {
  if (!(radius > 0.0) || !(radius < 0.5)) {
    throw std::invalid_argument("sphere radius must lie in (0, 1/2)");
  }
  if (!(gap >= 0.0)) throw std::invalid_argument("gap must be non-negative");
  const double target = static_cast<double>(count) * 4.0 / 3.0 * std::numbers::pi *
                        radius * radius * radius;
  if (target >= kMaxPackingFraction) {
    std::ostringstream msg;
    msg << "infeasible packing: volume fraction " << target << " >= "
        << kMaxPackingFraction;
    throw std::invalid_argument(msg.str());
  }

  SpherePack pack;
  pack.radius = radius;
  pack.gap = gap;
  pack.seed = seed;
  if (count == 0) return pack;

  const double exclusion = 2.0 * radius + gap;
  if (exclusion >= 0.5 && count > 1) {
    throw std::invalid_argument("infeasible packing: exclusion diameter >= 1/2");
  }
  const double exclusion2 = exclusion * exclusion;
  std::mt19937_64 rng(seed);
  CellList cells(exclusion);
  auto& centers = pack.centers;
  centers.reserve(count);

  auto fits = [&](const Point3& p, std::size_t skip) {
    return cells.all_neighbours(p, [&](std::size_t id) {
      if (id == skip) return true;
      const double d = periodic_distance(p, centers[id]);
      return d * d >= exclusion2;
    });
  };

  constexpr std::size_t kStallWindow = 1000;
  std::size_t steps = 0;
  std::size_t failures = 0;
  const std::size_t none = static_cast<std::size_t>(-1);

  while (centers.size() < count) {
    if (steps >= max_steps) {
      std::ostringstream msg;
      msg << "hard-sphere packing exhausted " << max_steps << " steps after placing "
          << centers.size() << " of " << count << " spheres";
      throw PackingError(msg.str(), centers.size());
    }
    ++steps;
    Point3 p{uniform01(rng), uniform01(rng), uniform01(rng)};
    if (fits(p, none)) {
      cells.insert(centers.size(), p);
      centers.push_back(p);
      failures = 0;
      continue;
    }
    if (++failures < kStallWindow) continue;

    // Insertion stalled: one sweep of displacement moves relaxes the
    // configuration before insertions resume.
    failures = 0;
    const double half_width = 0.5 * radius;
    for (std::size_t move = 0; move < centers.size() && steps < max_steps; ++move) {
      ++steps;
      const std::size_t id = uniform_index(rng, centers.size());
      Point3 trial;
      for (int i = 0; i < 3; ++i) {
        trial[i] = wrap01(centers[id][i] + half_width * (2.0 * uniform01(rng) - 1.0));
      }
      if (fits(trial, id)) {
        cells.erase(id, centers[id]);
        centers[id] = trial;
        cells.insert(id, trial);
      }
    }
  }
  return pack;
}

Microstructure::Microstructure(Grid grid, std::vector<std::uint8_t> phases,
                               std::vector<PhaseTensor> catalog)
    : grid_(grid), phases_(std::move(phases)), catalog_(std::move(catalog)) {
  if (catalog_.empty()) throw std::invalid_argument("phase catalog is empty");
  if (catalog_.size() > 256) throw std::invalid_argument("at most 256 phases are supported");
  for (const auto& phase : catalog_) {
    if (phase.physics() != catalog_.front().physics() || phase.dim() != grid_.dim()) {
      throw std::invalid_argument("catalog phases must share physics and grid dimension");
    }
  }
  if (phases_.size() != grid_.size()) {
    throw std::invalid_argument("phase map length does not match the grid");
  }
  for (std::uint8_t p : phases_) {
    if (p >= catalog_.size()) {
      throw std::invalid_argument("phase index " + std::to_string(p) + " not in catalog");
    }
  }
}

std::vector<double> Microstructure::volume_fractions() const {
  std::vector<std::size_t> counts(catalog_.size(), 0);
  for (std::uint8_t p : phases_) ++counts[p];
  std::vector<double> out(catalog_.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out[i] = static_cast<double>(counts[i]) / static_cast<double>(grid_.size());
  }
  return out;
}

Microstructure voxelize(const SpherePack& pack, int n_ref, std::vector<PhaseTensor> catalog) {
  Grid grid(3, n_ref);
  std::vector<std::uint8_t> phases(grid.size(), 0);
  const double h = grid.h();
  const double r = pack.radius;
  for (const Point3& c : pack.centers) {
    long lo[3];
    long hi[3];
    for (int i = 0; i < 3; ++i) {
      lo[i] = static_cast<long>(std::floor((c[i] - r) / h - 0.5));
      hi[i] = static_cast<long>(std::ceil((c[i] + r) / h - 0.5));
      // A sphere cannot cover more than the whole axis.
      if (hi[i] - lo[i] >= n_ref) hi[i] = lo[i] + n_ref - 1;
    }
    for (long z = lo[2]; z <= hi[2]; ++z) {
      for (long y = lo[1]; y <= hi[1]; ++y) {
        for (long x = lo[0]; x <= hi[0]; ++x) {
          const Point3 center{(x + 0.5) * h, (y + 0.5) * h, (z + 0.5) * h};
          if (periodic_distance(center, c) <= r) phases[grid.linear({x, y, z})] = 1;
        }
      }
    }
  }
  if (!pack.centers.empty() && catalog.size() < 2) {
    throw std::invalid_argument("voxelize needs a catalog with matrix and inclusion phases");
  }
  return Microstructure(grid, std::move(phases), std::move(catalog));
}

Microstructure make_uniform(const Grid& grid, const PhaseTensor& phase) {
  return Microstructure(grid, std::vector<std::uint8_t>(grid.size(), 0), {phase});
}

Microstructure make_laminate(const Grid& grid, const PhaseTensor& first,
                             const PhaseTensor& second, int axis) {
  if (axis < 0 || axis >= grid.dim()) throw std::invalid_argument("laminate axis out of range");
  std::vector<std::uint8_t> phases(grid.size());
  for (std::size_t lin = 0; lin < grid.size(); ++lin) {
    phases[lin] = grid.multi(lin)[axis] < grid.side() / 2 ? 0 : 1;
  }
  return Microstructure(grid, std::move(phases), {first, second});
}

Microstructure make_checkerboard(const Grid& grid, const PhaseTensor& first,
                                 const PhaseTensor& second) {
  if (grid.dim() < 2) throw std::invalid_argument("checkerboard needs d >= 2");
  if (grid.side() % 2) throw std::invalid_argument("checkerboard needs an even grid side");
  std::vector<std::uint8_t> phases(grid.size());
  const long half = grid.side() / 2;
  for (std::size_t lin = 0; lin < grid.size(); ++lin) {
    const MultiIndex b = grid.multi(lin);
    phases[lin] = ((b[0] < half) == (b[1] < half)) ? 0 : 1;
  }
  return Microstructure(grid, std::move(phases), {first, second});
}

Microstructure make_random(const Grid& grid, const PhaseTensor& first, const PhaseTensor& second,
                           double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("random fraction must lie in [0, 1]");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> phases(grid.size());
  for (auto& p : phases) p = uniform01(rng) < fraction ? 1 : 0;
  return Microstructure(grid, std::move(phases), {first, second});
}

CoefficientField::CoefficientField(Grid grid, int components, std::vector<double> operators,
                                   std::vector<std::uint8_t> mask, double contrast_bound)
    : grid_(grid),
      components_(components),
      operators_(std::move(operators)),
      mask_(std::move(mask)),
      contrast_bound_(contrast_bound) {
  const auto m = static_cast<std::size_t>(components);
  if (operators_.size() != grid.size() * m * m || mask_.size() != grid.size()) {
    throw std::invalid_argument("coefficient field storage does not match the grid");
  }
}

std::size_t CoefficientField::active_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

CoefficientField build_coefficients(const Microstructure& micro, const ReferenceMedium& reference,
                                    int side, const CoefficientOptions& options) {
  const Grid& fine = micro.grid();
  if (reference.physics() != micro.physics() || reference.dim() != fine.dim()) {
    throw std::invalid_argument("reference medium does not match the microstructure physics");
  }
  if (side < 2 || fine.side() % side != 0) {
    throw std::invalid_argument("solve side " + std::to_string(side) +
                                " must divide the reference side " +
                                std::to_string(fine.side()));
  }
  const Grid coarse(fine.dim(), side);
  const int m = micro.components();
  const auto& catalog = micro.catalog();
  const std::size_t n_phases = catalog.size();

  std::vector<std::size_t> present(n_phases, 0);
  for (std::uint8_t p : micro.phases()) ++present[p];

  // Per-phase inverse contrast and the gap min |eig(A_p - A0)|.
  std::vector<bool> equal(n_phases, false);
  std::vector<Eigen::MatrixXd> inverse(n_phases, Eigen::MatrixXd::Zero(m, m));
  std::vector<double> gaps(n_phases, 0.0);
  const double scale = reference.matrix().cwiseAbs().maxCoeff();
  double c0 = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < n_phases; ++p) {
    if (!present[p]) continue;
    if (catalog[p] == reference) {
      equal[p] = true;
      continue;
    }
    const Eigen::MatrixXd diff = catalog[p].matrix() - reference.matrix();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(diff);
    gaps[p] = eig.eigenvalues().cwiseAbs().minCoeff();
    if (gaps[p] <= 1e-12 * scale) {
      throw ContrastError("phase " + std::to_string(p) +
                              " has A - A0 singular; choose a different reference medium",
                          p);
    }
    const auto& vec = eig.eigenvectors();
    inverse[p] = vec * eig.eigenvalues().cwiseInverse().asDiagonal() * vec.transpose();
    inverse[p] = 0.5 * (inverse[p] + inverse[p].transpose());
    c0 = std::min(c0, gaps[p]);
  }
  if (options.contrast_bound) {
    const double bound = *options.contrast_bound;
    if (!(bound > 0.0)) throw std::invalid_argument("contrast bound must be positive");
    for (std::size_t p = 0; p < n_phases; ++p) {
      if (present[p] && !equal[p] && gaps[p] < bound * (1.0 - 1e-12)) {
        std::ostringstream msg;
        msg << "phase " << p << " violates the contrast bound: min |eig(A - A0)| = "
            << gaps[p] << " < c0 = " << bound;
        throw ContrastError(msg.str(), p);
      }
    }
    c0 = bound;
  }

  // Phase histogram of every coarse voxel.
  const long ratio = fine.side() / side;
  std::vector<std::uint32_t> counts(coarse.size() * n_phases, 0);
  const auto phases = micro.phases();
  for (std::size_t lin = 0; lin < fine.size(); ++lin) {
    MultiIndex b = fine.multi(lin);
    for (int i = 0; i < fine.dim(); ++i) b[i] /= ratio;
    ++counts[coarse.linear(b) * n_phases + phases[lin]];
  }

  double cells_per_voxel = 1.0;
  for (int i = 0; i < fine.dim(); ++i) cells_per_voxel *= static_cast<double>(ratio);
  const auto mm = static_cast<std::size_t>(m) * m;
  std::vector<double> operators(coarse.size() * mm, 0.0);
  std::vector<std::uint8_t> mask(coarse.size(), 0);
  const double norm_limit = std::isfinite(c0) ? (1.0 / c0) * (1.0 + 1e-10) : 0.0;

  for (std::size_t lin = 0; lin < coarse.size(); ++lin) {
    const std::uint32_t* hist = counts.data() + lin * n_phases;
    bool inside = true;
    for (std::size_t p = 0; p < n_phases; ++p) {
      if (hist[p] && equal[p]) inside = false;
    }
    if (!inside) continue;
    mask[lin] = 1;
    Eigen::Map<Eigen::MatrixXd> k(operators.data() + lin * mm, m, m);
    for (std::size_t p = 0; p < n_phases; ++p) {
      if (hist[p]) k += (static_cast<double>(hist[p]) / cells_per_voxel) * inverse[p];
    }
    // Discrete contrast bound: the average of operators of norm <= 1/c0.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k, Eigen::EigenvaluesOnly);
    const double norm = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (norm > norm_limit) {
      std::ostringstream msg;
      msg << "voxel " << lin << " violates |K| <= 1/c0 (" << norm << " > " << norm_limit << ")";
      throw ContrastError(msg.str(), lin);
    }
  }
  return CoefficientField(coarse, m, std::move(operators), std::move(mask),
                          std::isfinite(c0) ? c0 : 0.0);
}

MeanBounds voigt_reuss_bounds(const Microstructure& micro) {
  const auto fractions = micro.volume_fractions();
  const int m = micro.components();
  Eigen::MatrixXd voigt = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd compliance = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t p = 0; p < fractions.size(); ++p) {
    if (fractions[p] == 0.0) continue;
    voigt += fractions[p] * micro.catalog()[p].matrix();
    compliance += fractions[p] * micro.catalog()[p].inverse();
  }
  Eigen::MatrixXd reuss = compliance.inverse();
  return {voigt, 0.5 * (reuss + reuss.transpose())};
}

}  // namespace homog
