/**
 * @file   config.hpp
 *
 * @brief  Run configuration: a flat key=value schema, validated before any
 *         computation and written back in fully resolved form next to every
 *         run's outputs.
 *
 * Keys (defaults in brackets):
 *   physics          conduction | elasticity                    [conduction]
 *   dim              1 | 2 | 3                                  [2]
 *   microstructure   uniform | laminate | checkerboard | random | spheres |
 *                    path to a phase-index voxel file           [checkerboard]
 *   nref             reference grid side                        [64]
 *   laminate.axis    layer normal                               [0]
 *   random.fraction, random.seed                                [0.5, 1]
 *   spheres.count, spheres.radius, spheres.gap, spheres.seed,
 *   spheres.max_steps, spheres.file (pack file; overrides generation)
 *   phase.<i>        "a=<v>" | "A=<row-major entries>" | "mu=<v> nu=<v>"
 *   reference        same syntax as a phase
 *   green            consistent | truncated | filtered | fd     [filtered]
 *   consistent.n_max, consistent.tol                            [4, 1e-3]
 *   solver           cg | fixed-point                           [cg]
 *   rel_tol, max_iter                                           [1e-5, 1000]
 *   loading          axis:<x|y|z> | shear:<xy|xz|yz> | comma list
 *   N                solve side                                 [nref]
 *   Ns               comma list of sweep/bench sides
 *   threads          FFT threads                                [1]
 *   bench.threads    comma list of thread counts                [1,2,4]
 *   output_dir                                                  [out]
 *   write_fields     0 | 1                                      [0]
 *
 * HOMOG_OUTPUT_DIR and HOMOG_THREADS override output_dir and threads.
 */
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "homog/green.hpp"
#include "homog/microstructure.hpp"
#include "homog/solvers.hpp"

namespace homog {

using ConfigMap = std::map<std::string, std::string>;

/// Reads key=value lines; '#' starts a comment, blank lines are skipped.
/// @throws std::runtime_error on unreadable files or lines without '='.
ConfigMap read_config_file(const std::filesystem::path& path);

/// Applies "key=value" overrides in order.
void apply_overrides(ConfigMap& map, const std::vector<std::string>& assignments);

/// Applies HOMOG_OUTPUT_DIR / HOMOG_THREADS when set.
void apply_environment(ConfigMap& map);

/// Parses "a=..", "A=..", or "mu=.. nu=..".
PhaseTensor parse_phase(const std::string& spec, Physics physics, int dim);

/// Parses "axis:x", "shear:xy" or explicit coordinates.
Eigen::VectorXd parse_loading(const std::string& spec, Physics physics, int dim);

struct RunConfig {
  Physics physics = Physics::Conduction;
  int dim = 2;
  std::string microstructure = "checkerboard";
  int nref = 64;
  int laminate_axis = 0;
  double random_fraction = 0.5;
  std::uint64_t random_seed = 1;
  std::size_t sphere_count = 0;
  double sphere_radius = 0.1;
  double sphere_gap = 0.0;
  std::uint64_t sphere_seed = 1;
  std::size_t sphere_max_steps = 10'000'000;
  std::string sphere_file;
  std::vector<std::string> phases;
  std::string reference;
  GreenKind green = GreenKind::Filtered;
  GreenOptions green_options;
  SolverKind solver = SolverKind::ConjugateGradient;
  double rel_tol = 1e-5;
  int max_iter = 1000;
  std::string loading = "axis:x";
  int side = 0;
  std::vector<int> sides;
  int threads = 1;
  std::vector<int> bench_threads{1, 2, 4};
  std::string output_dir = "out";
  bool write_fields = false;

  /// @throws std::invalid_argument on unknown keys or invalid values.
  static RunConfig from_map(const ConfigMap& map);
  /// Every key with its effective value.
  ConfigMap resolved() const;

  std::vector<PhaseTensor> phase_catalog() const;
  ReferenceMedium reference_medium() const;
  Eigen::VectorXd loading_vector() const;
  SolveConfig solve_config() const;
  /// Builds (or loads) the reference-grid microstructure.
  Microstructure build_microstructure() const;
};

void write_config_file(const std::filesystem::path& path, const ConfigMap& map);

}  // namespace homog
