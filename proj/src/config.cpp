#include "homog/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "homog/io.hpp"

namespace homog {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) {
    throw std::invalid_argument("config '" + key + "': expected a number, got '" + value + "'");
  }
  return out;
}

long long to_integer(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) {
    throw std::invalid_argument("config '" + key + "': expected an integer, got '" + value +
                                "'");
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  for (const auto& item : split(value, ',')) out.push_back(static_cast<int>(to_integer(key, item)));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::ostringstream out;
  for (std::size_t i = 0; i < items.size(); ++i) out << (i ? "," : "") << items[i];
  return out.str();
}

int axis_index(char c) {
  switch (c) {
    case 'x': return 0;
    case 'y': return 1;
    case 'z': return 2;
    default: throw std::invalid_argument(std::string("unknown axis '") + c + "'");
  }
}

const std::set<std::string> kKeys = {
    "physics",        "dim",           "microstructure", "nref",
    "laminate.axis",  "random.fraction", "random.seed",  "spheres.count",
    "spheres.radius", "spheres.gap",   "spheres.seed",   "spheres.max_steps",
    "spheres.file",   "reference",     "green",          "consistent.n_max",
    "consistent.tol", "solver",        "rel_tol",        "max_iter",
    "loading",        "N",             "Ns",             "threads",
    "bench.threads",  "output_dir",    "write_fields"};

}  // namespace

ConfigMap read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path.string() + "'");
  ConfigMap map;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path.string() + ":" + std::to_string(number) +
                               ": expected key=value");
    }
    map[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return map;
}

void apply_overrides(ConfigMap& map, const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("override '" + a + "' lacks '='");
    map[trim(a.substr(0, eq))] = trim(a.substr(eq + 1));
  }
}

void apply_environment(ConfigMap& map) {
  if (const char* dir = std::getenv("HOMOG_OUTPUT_DIR"); dir && *dir) map["output_dir"] = dir;
  if (const char* threads = std::getenv("HOMOG_THREADS"); threads && *threads) {
    map["threads"] = threads;
  }
}

PhaseTensor parse_phase(const std::string& spec, Physics physics, int dim) {
  std::map<std::string, std::string> parts;
  std::istringstream in(spec);
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("phase spec token '" + token + "'");
    parts[token.substr(0, eq)] = token.substr(eq + 1);
  }
  if (physics == Physics::Elasticity) {
    if (parts.size() != 2 || !parts.count("mu") || !parts.count("nu")) {
      throw std::invalid_argument("elastic phase must be 'mu=<v> nu=<v>', got '" + spec + "'");
    }
    return PhaseTensor::elasticity(dim, to_double("mu", parts["mu"]),
                                   to_double("nu", parts["nu"]));
  }
  if (parts.size() == 1 && parts.count("a")) {
    return PhaseTensor::isotropic_conduction(dim, to_double("a", parts["a"]));
  }
  if (parts.size() == 1 && parts.count("A")) {
    const auto entries = split(parts["A"], ',');
    if (static_cast<int>(entries.size()) != dim * dim) {
      throw std::invalid_argument("conductivity 'A=' needs d*d entries");
    }
    Eigen::MatrixXd a(dim, dim);
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) a(i, j) = to_double("A", entries[i * dim + j]);
    }
    return PhaseTensor::conduction(a);
  }
  throw std::invalid_argument("conduction phase must be 'a=<v>' or 'A=<entries>', got '" +
                              spec + "'");
}

Eigen::VectorXd parse_loading(const std::string& spec, Physics physics, int dim) {
  const int m = component_count(physics, dim);
  if (spec.rfind("axis:", 0) == 0 && spec.size() == 6) {
    const int a = axis_index(spec[5]);
    if (a >= dim) throw std::invalid_argument("loading axis outside the dimension");
    if (physics == Physics::Conduction) return Eigen::VectorXd::Unit(m, a);
    return Eigen::VectorXd::Unit(m, sym_coord(dim, a, a));
  }
  if (spec.rfind("shear:", 0) == 0 && spec.size() == 8) {
    if (physics != Physics::Elasticity) {
      throw std::invalid_argument("shear loading requires elasticity");
    }
    return shear_loading(dim, axis_index(spec[6]), axis_index(spec[7]));
  }
  const auto items = split(spec, ',');
  if (static_cast<int>(items.size()) != m) {
    throw std::invalid_argument("loading '" + spec + "' needs " + std::to_string(m) +
                                " components");
  }
  Eigen::VectorXd out(m);
  for (int c = 0; c < m; ++c) out(c) = to_double("loading", items[c]);
  return out;
}

RunConfig RunConfig::from_map(const ConfigMap& map) {
  for (const auto& [key, value] : map) {
    if (kKeys.count(key)) continue;
    if (key.rfind("phase.", 0) == 0 && key.size() > 6 &&
        key.find_first_not_of("0123456789", 6) == std::string::npos) {
      continue;
    }
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = map.find(key);
    return it == map.end() ? nullptr : &it->second;
  };

  RunConfig c;
  if (auto v = get("physics")) c.physics = parse_physics(*v);
  if (auto v = get("dim")) c.dim = static_cast<int>(to_integer("dim", *v));
  if (c.dim < 1 || c.dim > 3) throw std::invalid_argument("dim must be 1, 2 or 3");
  if (auto v = get("microstructure")) c.microstructure = *v;
  if (auto v = get("nref")) c.nref = static_cast<int>(to_integer("nref", *v));
  if (auto v = get("laminate.axis")) c.laminate_axis = static_cast<int>(to_integer("laminate.axis", *v));
  if (auto v = get("random.fraction")) c.random_fraction = to_double("random.fraction", *v);
  if (auto v = get("random.seed")) c.random_seed = static_cast<std::uint64_t>(to_integer("random.seed", *v));
  if (auto v = get("spheres.count")) {
    const long long n = to_integer("spheres.count", *v);
    if (n < 0) throw std::invalid_argument("spheres.count must be >= 0");
    c.sphere_count = static_cast<std::size_t>(n);
  }
  if (auto v = get("spheres.radius")) c.sphere_radius = to_double("spheres.radius", *v);
  if (auto v = get("spheres.gap")) c.sphere_gap = to_double("spheres.gap", *v);
  if (auto v = get("spheres.seed")) c.sphere_seed = static_cast<std::uint64_t>(to_integer("spheres.seed", *v));
  if (auto v = get("spheres.max_steps")) {
    c.sphere_max_steps = static_cast<std::size_t>(to_integer("spheres.max_steps", *v));
  }
  if (auto v = get("spheres.file")) c.sphere_file = *v;

  std::map<int, std::string> phases;
  for (const auto& [key, value] : map) {
    if (key.rfind("phase.", 0) == 0) phases[std::stoi(key.substr(6))] = value;
  }
  if (phases.empty()) {
    if (c.physics == Physics::Conduction) {
      c.phases = {"a=1", "a=4"};
    } else {
      c.phases = {"mu=1 nu=0.3", "mu=1000 nu=0.2"};
    }
  } else {
    int expected = 0;
    for (const auto& [index, spec] : phases) {
      if (index != expected++) throw std::invalid_argument("phase indices must be 0, 1, 2, ...");
      c.phases.push_back(spec);
    }
  }
  c.reference = c.physics == Physics::Conduction ? "a=0.5" : "mu=0.5 nu=0.3";
  if (auto v = get("reference")) c.reference = *v;

  if (auto v = get("green")) c.green = parse_green_kind(*v);
  if (auto v = get("consistent.n_max")) {
    c.green_options.consistent.n_max = static_cast<int>(to_integer("consistent.n_max", *v));
  }
  if (auto v = get("consistent.tol")) c.green_options.consistent.tol = to_double("consistent.tol", *v);
  if (auto v = get("solver")) c.solver = parse_solver_kind(*v);
  if (auto v = get("rel_tol")) c.rel_tol = to_double("rel_tol", *v);
  if (auto v = get("max_iter")) c.max_iter = static_cast<int>(to_integer("max_iter", *v));
  if (auto v = get("loading")) c.loading = *v;
  c.side = c.nref;
  if (auto v = get("N")) c.side = static_cast<int>(to_integer("N", *v));
  if (auto v = get("Ns")) c.sides = to_int_list("Ns", *v);
  if (auto v = get("threads")) c.threads = static_cast<int>(to_integer("threads", *v));
  if (auto v = get("bench.threads")) c.bench_threads = to_int_list("bench.threads", *v);
  if (auto v = get("output_dir")) c.output_dir = *v;
  if (auto v = get("write_fields")) {
    if (*v != "0" && *v != "1") throw std::invalid_argument("write_fields must be 0 or 1");
    c.write_fields = *v == "1";
  }

  // Schema checks that need no computation.
  if (c.threads < 1) throw std::invalid_argument("threads must be >= 1");
  for (int t : c.bench_threads) {
    if (t < 1) throw std::invalid_argument("bench.threads entries must be >= 1");
  }
  if (c.nref < 2) throw std::invalid_argument("nref must be >= 2");
  if (c.side < 2) throw std::invalid_argument("N must be >= 2");
  c.solve_config().validate();
  c.phase_catalog();
  c.reference_medium();
  return c;
}

ConfigMap RunConfig::resolved() const {
  ConfigMap map;
  map["physics"] = to_string(physics);
  map["dim"] = std::to_string(dim);
  map["microstructure"] = microstructure;
  map["nref"] = std::to_string(nref);
  map["laminate.axis"] = std::to_string(laminate_axis);
  map["random.fraction"] = format_double(random_fraction);
  map["random.seed"] = std::to_string(random_seed);
  map["spheres.count"] = std::to_string(sphere_count);
  map["spheres.radius"] = format_double(sphere_radius);
  map["spheres.gap"] = format_double(sphere_gap);
  map["spheres.seed"] = std::to_string(sphere_seed);
  map["spheres.max_steps"] = std::to_string(sphere_max_steps);
  if (!sphere_file.empty()) map["spheres.file"] = sphere_file;
  for (std::size_t i = 0; i < phases.size(); ++i) map["phase." + std::to_string(i)] = phases[i];
  map["reference"] = reference;
  map["green"] = to_string(green);
  map["consistent.n_max"] = std::to_string(green_options.consistent.n_max);
  map["consistent.tol"] = format_double(green_options.consistent.tol);
  map["solver"] = to_string(solver);
  map["rel_tol"] = format_double(rel_tol);
  map["max_iter"] = std::to_string(max_iter);
  map["loading"] = loading;
  map["N"] = std::to_string(side);
  if (!sides.empty()) map["Ns"] = join(sides);
  map["threads"] = std::to_string(threads);
  map["bench.threads"] = join(bench_threads);
  map["output_dir"] = output_dir;
  map["write_fields"] = write_fields ? "1" : "0";
  return map;
}

std::vector<PhaseTensor> RunConfig::phase_catalog() const {
  std::vector<PhaseTensor> out;
  for (const auto& spec : phases) out.push_back(parse_phase(spec, physics, dim));
  return out;
}

ReferenceMedium RunConfig::reference_medium() const {
  return parse_phase(reference, physics, dim);
}

Eigen::VectorXd RunConfig::loading_vector() const { return parse_loading(loading, physics, dim); }

SolveConfig RunConfig::solve_config() const {
  SolveConfig config;
  config.solver = solver;
  config.rel_tol = rel_tol;
  config.max_iter = max_iter;
  config.loading = loading_vector();
  return config;
}

Microstructure RunConfig::build_microstructure() const {
  const std::vector<PhaseTensor> catalog = phase_catalog();
  auto need_two = [&]() {
    if (catalog.size() < 2) {
      throw std::invalid_argument("microstructure '" + microstructure + "' needs two phases");
    }
  };
  if (microstructure == "uniform") return make_uniform(Grid(dim, nref), catalog.front());
  if (microstructure == "laminate") {
    need_two();
    return make_laminate(Grid(dim, nref), catalog[0], catalog[1], laminate_axis);
  }
  if (microstructure == "checkerboard") {
    need_two();
    return make_checkerboard(Grid(dim, nref), catalog[0], catalog[1]);
  }
  if (microstructure == "random") {
    need_two();
    return make_random(Grid(dim, nref), catalog[0], catalog[1], random_fraction, random_seed);
  }
  if (microstructure == "spheres") {
    if (dim != 3) throw std::invalid_argument("sphere packs need dim = 3");
    need_two();
    const SpherePack pack =
        sphere_file.empty()
            ? generate_hard_spheres(sphere_count, sphere_radius, sphere_gap, sphere_seed,
                                    sphere_max_steps)
            : read_pack_file(sphere_file);
    return voxelize(pack, nref, catalog);
  }
  const VoxelData data = read_voxel_file(microstructure);
  if (data.header.kind != VoxelKind::PhaseIndex) {
    throw std::invalid_argument("microstructure file must hold phase indices");
  }
  if (data.header.dim != dim) throw std::invalid_argument("microstructure file dimension != dim");
  return Microstructure(data.grid(), data.phases, catalog);
}

void write_config_file(const std::filesystem::path& path, const ConfigMap& map) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  for (const auto& [key, value] : map) out << key << '=' << value << '\n';
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace homog
