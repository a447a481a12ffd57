// Command-line front end: generate -> voxelize -> solve -> sweep -> bench.
//
// Exit codes: 0 success (every solve converged), 2 finished with an
// unconverged solve, 1 error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "homog/config.hpp"
#include "homog/errors.hpp"
#include "homog/io.hpp"
#include "homog/study.hpp"

namespace fs = std::filesystem;
using namespace homog;

namespace {

constexpr int kExitUnconverged = 2;

fs::path prepare_output(const std::string& dir) {
  const fs::path path(dir);
  fs::create_directories(path);
  return path;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string default_output_dir() {
  const char* env = std::getenv("HOMOG_OUTPUT_DIR");
  return env && *env ? env : "out";
}

struct ConfigArgs {
  std::string file;
  std::vector<std::string> overrides;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("-c,--config", args.file, "key=value configuration file");
  cmd->add_option("-s,--set", args.overrides, "override one key (key=value), repeatable");
}

RunConfig load_config(const ConfigArgs& args) {
  ConfigMap map;
  if (!args.file.empty()) map = read_config_file(args.file);
  apply_overrides(map, args.overrides);
  apply_environment(map);
  RunConfig config = RunConfig::from_map(map);
  set_fft_threads(config.threads);
  return config;
}

SystemOperator build_operator(const Microstructure& micro, const RunConfig& config, int side) {
  CoefficientField coeffs = build_coefficients(micro, config.reference_medium(), side);
  GreenOperator green(config.green, config.reference_medium(), coeffs.grid(),
                      config.green_options);
  return SystemOperator(std::move(coeffs), std::move(green));
}

int cmd_generate(std::size_t count, double radius, double gap, std::uint64_t seed, int nref,
                 std::size_t max_steps, const std::string& out_dir) {
  const SpherePack pack = generate_hard_spheres(count, radius, gap, seed, max_steps);
  const fs::path dir = prepare_output(out_dir);
  write_pack_file(dir / "pack.txt", pack);
  const auto unit = PhaseTensor::isotropic_conduction(3, 1.0);
  const Microstructure micro = voxelize(pack, nref, {unit, unit});
  write_phase_file(dir / "phases.vox", micro.grid(), micro.phases());

  ConfigMap resolved;
  resolved["spheres.count"] = std::to_string(count);
  resolved["spheres.radius"] = exact(radius);
  resolved["spheres.gap"] = exact(gap);
  resolved["spheres.seed"] = std::to_string(seed);
  resolved["spheres.max_steps"] = std::to_string(max_steps);
  resolved["nref"] = std::to_string(nref);
  write_config_file(dir / "generate.cfg", resolved);
  std::printf("spheres=%zu volume_fraction=%.6f voxel_fraction=%.6f\n", pack.centers.size(),
              pack.volume_fraction(), micro.volume_fractions().back());
  return 0;
}

int cmd_voxelize(const std::string& pack_path, int nref, const std::string& out_dir) {
  const SpherePack pack = read_pack_file(pack_path);
  const fs::path dir = prepare_output(out_dir);
  const auto unit = PhaseTensor::isotropic_conduction(3, 1.0);
  const Microstructure micro = voxelize(pack, nref, {unit, unit});
  write_phase_file(dir / "phases.vox", micro.grid(), micro.phases());
  std::printf("nref=%d voxel_fraction=%.6f\n", nref, micro.volume_fractions().back());
  return 0;
}

int cmd_solve(const ConfigArgs& args) {
  const RunConfig config = load_config(args);
  const fs::path dir = prepare_output(config.output_dir);
  write_config_file(dir / "config.resolved", config.resolved());

  const Microstructure micro = config.build_microstructure();
  const SystemOperator op = build_operator(micro, config, config.side);
  const SolveResult result = solve(op, config.solve_config());

  const std::string csv =
      report_csv_header(op.components()) + "\n" + report_csv_row(result.report) + "\n";
  write_text(dir / "solve.csv", csv);
  std::cout << csv;
  if (config.write_fields) {
    write_field_file(dir / "tau.vox", result.polarization);
    write_field_file(dir / "strain.vox", reconstruct_strain(result.polarization,
                                                            config.loading_vector(), op.green()));
  }
  if (!result.report.converged) {
    std::cerr << "solve did not converge: residual " << result.report.residual() << " after "
              << result.report.iterations << " iterations\n";
    return kExitUnconverged;
  }
  return 0;
}

int cmd_sweep(const ConfigArgs& args, std::optional<double> oracle) {
  const RunConfig config = load_config(args);
  if (config.sides.empty()) throw std::invalid_argument("sweep needs Ns");
  const fs::path dir = prepare_output(config.output_dir);
  write_config_file(dir / "config.resolved", config.resolved());

  const Microstructure micro = config.build_microstructure();
  SweepOptions options;
  options.kind = config.green;
  options.green = config.green_options;
  options.solve = config.solve_config();
  options.oracle = oracle;
  const SweepResult result =
      convergence_sweep(micro, config.reference_medium(), config.sides, options);

  const std::string csv = sweep_csv(result);
  write_text(dir / "sweep.csv", csv);
  std::cout << csv;
  if (result.fit) {
    std::ostringstream fit;
    fit.precision(17);
    fit << "reference=" << result.reference << "\nexponent=" << result.fit->exponent
        << "\nintercept=" << result.fit->intercept << "\nfit_residual=" << result.fit->residual
        << '\n';
    write_text(dir / "rate.txt", fit.str());
    std::cout << fit.str();
  }
  if (result.aborted) {
    std::cerr << "sweep stopped at an unconverged solve (N = " << result.rows.back().side
              << ")\n";
    return kExitUnconverged;
  }
  return 0;
}

std::vector<BenchTiming> read_timings(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open timings file '" + path + "'");
  std::string line;
  std::getline(in, line);
  if (line.rfind("N,P,iterations,T_P", 0) != 0) {
    throw std::runtime_error("timings file must start with 'N,P,iterations,T_P'");
  }
  std::vector<BenchTiming> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() < 4) throw std::runtime_error("timings file: short row '" + line + "'");
    out.push_back({std::stoi(cells[0]), dim, std::stoi(cells[1]), std::stoi(cells[2]),
                   std::stod(cells[3])});
  }
  return out;
}

int cmd_bench(const ConfigArgs& args, const std::string& replay) {
  const RunConfig config = load_config(args);
  const fs::path dir = prepare_output(config.output_dir);
  write_config_file(dir / "config.resolved", config.resolved());

  std::vector<BenchRow> rows;
  if (!replay.empty()) {
    rows = bench_table(read_timings(replay, config.dim));
  } else {
    if (config.sides.empty()) throw std::invalid_argument("bench needs Ns");
    const Microstructure micro = config.build_microstructure();
    BenchOptions options;
    options.sides = config.sides;
    options.threads = config.bench_threads;
    options.kind = config.green;
    options.solve = config.solve_config();
    rows = bench(micro, config.reference_medium(), options);
  }
  const std::string csv = bench_csv(rows);
  write_text(dir / "bench.csv", csv);
  std::cout << csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FFT-based Lippmann-Schwinger homogenization"};
  app.require_subcommand(1);

  std::size_t count = 0;
  double radius = 0.1;
  double gap = 0.0;
  std::uint64_t seed = 1;
  int nref = 64;
  std::size_t max_steps = 10'000'000;
  std::string out_dir = default_output_dir();
  auto* generate = app.add_subcommand("generate", "random hard-sphere pack and its phase file");
  generate->add_option("--n", count, "number of spheres")->required();
  generate->add_option("--r", radius, "sphere radius (unit cell = 1)")->required();
  generate->add_option("--gap", gap, "extra minimal clearance between spheres");
  generate->add_option("--seed", seed, "random seed");
  generate->add_option("--nref", nref, "reference grid side");
  generate->add_option("--max-steps", max_steps, "insertion/move budget");
  generate->add_option("--out", out_dir, "output directory");

  std::string pack_path;
  auto* voxelize_cmd = app.add_subcommand("voxelize", "phase file from an existing pack file");
  voxelize_cmd->add_option("--pack", pack_path, "pack file")->required();
  voxelize_cmd->add_option("--nref", nref, "reference grid side");
  voxelize_cmd->add_option("--out", out_dir, "output directory");

  ConfigArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "one corrector solve, CSV report row");
  add_config_options(solve_cmd, solve_args);

  ConfigArgs sweep_args;
  std::optional<double> oracle;
  auto* sweep_cmd = app.add_subcommand("sweep", "grid-refinement sweep over Ns with a rate fit");
  add_config_options(sweep_cmd, sweep_args);
  sweep_cmd->add_option("--oracle", oracle, "exact p^T A* p, if known");

  ConfigArgs bench_args;
  std::string replay;
  auto* bench_cmd = app.add_subcommand("bench", "timings, parallel efficiency and cost ratio");
  add_config_options(bench_cmd, bench_args);
  bench_cmd->add_option("--replay", replay, "derive the table from a timings CSV instead");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) return cmd_generate(count, radius, gap, seed, nref, max_steps, out_dir);
    if (*voxelize_cmd) return cmd_voxelize(pack_path, nref, out_dir);
    if (*solve_cmd) return cmd_solve(solve_args);
    if (*sweep_cmd) return cmd_sweep(sweep_args, oracle);
    if (*bench_cmd) return cmd_bench(bench_args, replay);
  } catch (const PackingError& e) {
    std::cerr << "error: " << e.what() << " (achieved " << e.achieved() << ")\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
