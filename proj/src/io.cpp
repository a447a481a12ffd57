#include "homog/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace homog {

namespace {

constexpr const char* kMagic = "LSVOX";
constexpr int kVersion = 1;
constexpr int kOffsetDigits = 10;

std::string kind_name(VoxelKind kind) {
  return kind == VoxelKind::PhaseIndex ? "phase-index" : "real-field";
}

std::string header_text(const VoxelHeader& h, std::size_t offset) {
  std::ostringstream out;
  out << "magic=" << kMagic << '\n'
      << "version=" << h.version << '\n'
      << "d=" << h.dim << '\n'
      << "N=" << h.side << '\n'
      << "kind=" << kind_name(h.kind) << '\n'
      << "components=" << h.components << '\n'
      << "byte_order=little-endian\n"
      << "data_offset=" << std::setw(kOffsetDigits) << std::setfill('0') << offset << '\n'
      << "end_header\n";
  return out.str();
}

void write_file(const std::filesystem::path& path, VoxelHeader header, const char* payload,
                std::size_t bytes) {
  // The header length does not depend on the offset value (fixed width).
  header.data_offset = header_text(header, 0).size();
  const std::string text = header_text(header, header.data_offset);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(payload, static_cast<std::streamsize>(bytes));
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

int parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  int out = 0;
  try {
    out = std::stoi(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty()) {
    throw std::runtime_error("voxel header: '" + key + "' is not an integer: " + value);
  }
  return out;
}

double swap_bytes(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  bits = __builtin_bswap64(bits);
  std::memcpy(&v, &bits, sizeof bits);
  return v;
}

}  // namespace

void write_phase_file(const std::filesystem::path& path, const Grid& grid,
                      std::span<const std::uint8_t> phases) {
  if (phases.size() != grid.size()) throw std::invalid_argument("phase map length mismatch");
  VoxelHeader header{kVersion, grid.dim(), grid.side(), VoxelKind::PhaseIndex, 1, 0};
  write_file(path, header, reinterpret_cast<const char*>(phases.data()), phases.size());
}

void write_field_file(const std::filesystem::path& path, const VoxelField& field) {
  VoxelHeader header{kVersion, field.grid().dim(), field.grid().side(), VoxelKind::RealField,
                     field.components(), 0};
  auto data = field.data();
  if constexpr (std::endian::native == std::endian::little) {
    write_file(path, header, reinterpret_cast<const char*>(data.data()),
               data.size() * sizeof(double));
  } else {
    std::vector<double> swapped(data.begin(), data.end());
    for (double& v : swapped) v = swap_bytes(v);
    write_file(path, header, reinterpret_cast<const char*>(swapped.data()),
               swapped.size() * sizeof(double));
  }
}

VoxelData read_voxel_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open voxel file '" + path.string() + "'");
  std::map<std::string, std::string> fields;
  std::string line;
  bool terminated = false;
  while (std::getline(in, line)) {
    if (line == "end_header") {
      terminated = true;
      break;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("voxel header: malformed line: " + line);
    fields[line.substr(0, eq)] = line.substr(eq + 1);
    if (fields.size() > 32) throw std::runtime_error("voxel header: too many entries");
  }
  if (!terminated) throw std::runtime_error("voxel header: missing end_header");
  auto require = [&](const std::string& key) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw std::runtime_error("voxel header: missing '" + key + "'");
    return it->second;
  };
  if (require("magic") != kMagic) throw std::runtime_error("not a voxel file (bad magic)");
  VoxelData data;
  VoxelHeader& h = data.header;
  h.version = parse_int("version", require("version"));
  if (h.version != kVersion) {
    throw std::runtime_error("unsupported voxel file version " + std::to_string(h.version));
  }
  h.dim = parse_int("d", require("d"));
  h.side = parse_int("N", require("N"));
  h.components = parse_int("components", require("components"));
  const std::string kind = require("kind");
  if (kind == "phase-index") {
    h.kind = VoxelKind::PhaseIndex;
  } else if (kind == "real-field") {
    h.kind = VoxelKind::RealField;
  } else {
    throw std::runtime_error("voxel header: unknown kind '" + kind + "'");
  }
  if (require("byte_order") != "little-endian") {
    throw std::runtime_error("voxel header: unsupported byte order");
  }
  h.data_offset = static_cast<std::size_t>(std::stoull(require("data_offset")));
  if (h.components < 1 || (h.kind == VoxelKind::PhaseIndex && h.components != 1)) {
    throw std::runtime_error("voxel header: invalid component count");
  }
  const Grid grid(h.dim, h.side);
  if (static_cast<std::size_t>(in.tellg()) != h.data_offset) {
    throw std::runtime_error("voxel header: data_offset does not match the header length");
  }

  const std::size_t count = grid.size() * static_cast<std::size_t>(h.components);
  const std::size_t element = h.kind == VoxelKind::PhaseIndex ? 1 : sizeof(double);
  std::vector<char> payload(count * element);
  in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(in.gcount()) != payload.size()) {
    throw std::runtime_error("voxel file truncated: expected " +
                             std::to_string(payload.size()) + " payload bytes");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error("voxel file has trailing bytes after the payload");
  }
  if (h.kind == VoxelKind::PhaseIndex) {
    data.phases.assign(payload.begin(), payload.end());
  } else {
    data.values.resize(count);
    std::memcpy(data.values.data(), payload.data(), payload.size());
    if constexpr (std::endian::native != std::endian::little) {
      for (double& v : data.values) v = swap_bytes(v);
    }
  }
  return data;
}

void write_pack_file(const std::filesystem::path& path, const SpherePack& pack) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  char buf[128];
  std::snprintf(buf, sizeof buf, "# r=%.17g seed=%llu gap=%.17g n=%zu\n", pack.radius,
                static_cast<unsigned long long>(pack.seed), pack.gap, pack.centers.size());
  out << buf;
  for (const Point3& c : pack.centers) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", c[0], c[1], c[2]);
    out << buf;
  }
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

SpherePack read_pack_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pack file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw std::runtime_error("pack file: missing '# r=... seed=... gap=... n=...' header");
  }
  SpherePack pack;
  std::size_t count = 0;
  bool have_r = false, have_n = false;
  std::istringstream header(line.substr(2));
  std::string token;
  while (header >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw std::runtime_error("pack file: bad header token " + token);
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "r") {
      pack.radius = std::stod(value);
      have_r = true;
    } else if (key == "seed") {
      pack.seed = std::stoull(value);
    } else if (key == "gap") {
      pack.gap = std::stod(value);
    } else if (key == "n") {
      count = std::stoull(value);
      have_n = true;
    } else {
      throw std::runtime_error("pack file: unknown header key '" + key + "'");
    }
  }
  if (!have_r || !have_n) throw std::runtime_error("pack file: header needs r and n");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    Point3 p;
    if (!(row >> p[0] >> p[1] >> p[2])) throw std::runtime_error("pack file: bad line: " + line);
    pack.centers.push_back(p);
  }
  if (pack.centers.size() != count) {
    throw std::runtime_error("pack file: header announces " + std::to_string(count) +
                             " spheres, found " + std::to_string(pack.centers.size()));
  }
  return pack;
}

}  // namespace homog
