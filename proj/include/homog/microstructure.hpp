/**
 * @file   microstructure.hpp
 *
 * @brief  Periodic hard-sphere packs, voxel phase maps on a fine reference
 *         grid, and the per-voxel coefficient data of a solve grid.
 *
 * The coefficient field stores, for every solve voxel C_beta,
 *   K_beta = h^{-d} int_{C_beta} (A_per - A0)^{-1},
 * evaluated exactly as an average over the fine voxels it contains, together
 * with the mask of voxels lying entirely inside Q0 = {A_per != A0}.
 */
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "homog/grid.hpp"
#include "homog/physics.hpp"

namespace homog {

using Point3 = std::array<double, 3>;

/// Minimum-image distance in the periodic unit cube.
double periodic_distance(const Point3& a, const Point3& b);

struct SpherePack {
  std::vector<Point3> centers;
  double radius = 0.0;
  double gap = 0.0;
  std::uint64_t seed = 0;

  /// Analytic volume fraction n (4/3) pi r^3 (no overlaps by construction).
  double volume_fraction() const;
};

/// Largest n (4/3) pi r^3 accepted by generate_hard_spheres.
inline constexpr double kMaxPackingFraction = 0.5;

/// Random sequential addition; once insertions stall, alternates sweeps of
/// hard-core Metropolis displacement moves (uniform in a cube of half-width
/// r/2) with further insertion attempts. Every insertion attempt and every
/// move counts as one step. The only randomness is one std::mt19937_64
/// stream seeded with `seed`, consumed in program order, so packs are
/// reproducible across platforms.
///
/// @throws std::invalid_argument if r >= 1/2, gap < 0 or the target volume
///         fraction reaches kMaxPackingFraction.
/// @throws PackingError when max_steps is exhausted; carries the achieved
///         sphere count.
SpherePack generate_hard_spheres(std::size_t count, double radius, double gap,
                                 std::uint64_t seed, std::size_t max_steps);

class Microstructure {
 public:
  /// @throws std::invalid_argument on an empty catalog, mixed physics or
  ///         dimensions, or a phase index outside the catalog.
  Microstructure(Grid grid, std::vector<std::uint8_t> phases,
                 std::vector<PhaseTensor> catalog);

  const Grid& grid() const { return grid_; }
  std::span<const std::uint8_t> phases() const { return phases_; }
  const std::vector<PhaseTensor>& catalog() const { return catalog_; }
  Physics physics() const { return catalog_.front().physics(); }
  int components() const { return catalog_.front().components(); }

  /// Voxel count of each catalog phase divided by N_ref^d.
  std::vector<double> volume_fractions() const;

 private:
  Grid grid_;
  std::vector<std::uint8_t> phases_;
  std::vector<PhaseTensor> catalog_;
};

/// Phase 1 where the voxel center h(beta + 1/2) lies within periodic
/// distance r of a sphere center, phase 0 elsewhere.
Microstructure voxelize(const SpherePack& pack, int n_ref, std::vector<PhaseTensor> catalog);

Microstructure make_uniform(const Grid& grid, const PhaseTensor& phase);
/// Two layers normal to `axis`: phase 0 on the first half, phase 1 on the
/// second.
Microstructure make_laminate(const Grid& grid, const PhaseTensor& first,
                             const PhaseTensor& second, int axis = 0);
/// 2 x 2 checkerboard in the (x, y) plane, phase 0 on the diagonal squares.
Microstructure make_checkerboard(const Grid& grid, const PhaseTensor& first,
                                 const PhaseTensor& second);
/// Independent Bernoulli(fraction) choice of phase 1 per voxel.
Microstructure make_random(const Grid& grid, const PhaseTensor& first,
                           const PhaseTensor& second, double fraction, std::uint64_t seed);

struct CoefficientOptions {
  /// Required lower bound c0 on |eig(A_p - A0)| for phases differing from
  /// A0. When unset it is taken as the smallest such gap.
  std::optional<double> contrast_bound;
};

class CoefficientField {
 public:
  CoefficientField(Grid grid, int components, std::vector<double> operators,
                   std::vector<std::uint8_t> mask, double contrast_bound);

  const Grid& grid() const { return grid_; }
  int components() const { return components_; }
  double contrast_bound() const { return contrast_bound_; }

  bool masked_in(std::size_t lin) const { return mask_[lin] != 0; }
  std::span<const std::uint8_t> mask() const { return mask_; }
  std::size_t active_count() const;

  /// K_beta as a column-major m x m block (zero on masked-out voxels).
  Eigen::Map<const Eigen::MatrixXd> local(std::size_t lin) const {
    const auto m = static_cast<std::size_t>(components_);
    return {operators_.data() + lin * m * m, components_, components_};
  }

 private:
  Grid grid_;
  int components_;
  std::vector<double> operators_;
  std::vector<std::uint8_t> mask_;
  double contrast_bound_;
};

/// @throws std::invalid_argument if N does not divide N_ref or the
///         reference medium does not match the catalog physics.
/// @throws ContrastError naming the first phase whose gap to A0 is below
///         the contrast bound (or is singular).
CoefficientField build_coefficients(const Microstructure& micro, const ReferenceMedium& reference,
                                    int side, const CoefficientOptions& options = {});

struct MeanBounds {
  Eigen::MatrixXd voigt;  ///< arithmetic mean of the phase tensors
  Eigen::MatrixXd reuss;  ///< harmonic mean of the phase tensors
};

MeanBounds voigt_reuss_bounds(const Microstructure& micro);

}  // namespace homog
