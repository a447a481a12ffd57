/**
 * @file   io.hpp
 *
 * @brief  Voxel files and sphere-pack tables.
 *
 * A voxel file is a text header of key=value lines terminated by a line
 * "end_header", followed immediately by the raw payload:
 *
 *   magic=LSVOX
 *   version=1
 *   d=<1|2|3>
 *   N=<side>
 *   kind=<phase-index|real-field>
 *   components=<m>
 *   byte_order=little-endian
 *   data_offset=<byte offset of the payload, 10 digits>
 *   end_header
 *
 * The payload holds m N^d values in voxel-major order (axis 0 fastest,
 * components contiguous): uint8 for phase-index, IEEE float64 for
 * real-field. Nothing follows the payload.
 *
 * A pack file starts with "# r=<radius> seed=<seed> gap=<gap> n=<count>"
 * followed by one "x y z" line per sphere center.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "homog/grid.hpp"
#include "homog/microstructure.hpp"

namespace homog {

enum class VoxelKind { PhaseIndex, RealField };

struct VoxelHeader {
  int version = 1;
  int dim = 0;
  int side = 0;
  VoxelKind kind = VoxelKind::PhaseIndex;
  int components = 1;
  std::size_t data_offset = 0;
};

struct VoxelData {
  VoxelHeader header;
  std::vector<std::uint8_t> phases;  ///< phase-index files
  std::vector<double> values;        ///< real-field files

  Grid grid() const { return Grid(header.dim, header.side); }
};

void write_phase_file(const std::filesystem::path& path, const Grid& grid,
                      std::span<const std::uint8_t> phases);
void write_field_file(const std::filesystem::path& path, const VoxelField& field);

/// @throws std::runtime_error on I/O failure, a malformed header or a
///         payload whose length differs from m N^d elements.
VoxelData read_voxel_file(const std::filesystem::path& path);

void write_pack_file(const std::filesystem::path& path, const SpherePack& pack);
SpherePack read_pack_file(const std::filesystem::path& path);

}  // namespace homog
