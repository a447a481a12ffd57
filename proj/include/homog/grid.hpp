/**
 * @file   grid.hpp
 *
 * @brief  Periodic voxel grids on the unit cell Q = (0,1)^d, voxel and
 *         spectral fields, and the discrete Fourier transform pair.
 *
 * Storage is voxel-major with axis 0 fastest: the linear index of voxel
 * beta is beta_0 + N beta_1 + N^2 beta_2, and the m components of a voxel
 * are contiguous. Spectral fields use the same layout with k in place of
 * beta.
 *
 * DFT convention: forward is the plain sum
 *   F_k = sum_beta f_beta exp(-2 i pi beta.k / N),
 * inverse carries the 1/N^d factor.
 */
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace homog {

using Complex = std::complex<double>;

/// Multi-index of a voxel or frequency; entries beyond dim() are zero.
using MultiIndex = std::array<long, 3>;

class Grid {
 public:
  /// @throws std::invalid_argument if dim is not 1, 2 or 3, side < 2, or
  ///         side^dim overflows.
  Grid(int dim, int side);

  int dim() const { return dim_; }
  int side() const { return side_; }
  std::size_t size() const { return size_; }
  /// Cell size h = 1/N.
  double h() const { return 1.0 / side_; }
  /// Voxel volume h^d.
  double cell_volume() const;

  /// Linear index of beta, wrapping each entry modulo N.
  std::size_t linear(const MultiIndex& beta) const;
  MultiIndex multi(std::size_t lin) const;

  bool operator==(const Grid&) const = default;

 private:
  int dim_;
  int side_;
  std::size_t size_;
};

Grid make_grid(int dim, int side);

/// Real field with m components per voxel.
class VoxelField {
 public:
  VoxelField(const Grid& grid, int components);
  VoxelField(const Grid& grid, int components, std::vector<double> data);

  const Grid& grid() const { return grid_; }
  int components() const { return components_; }
  std::size_t size() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  std::span<double> voxel(std::size_t lin) {
    return {data_.data() + lin * components_, static_cast<std::size_t>(components_)};
  }
  std::span<const double> voxel(std::size_t lin) const {
    return {data_.data() + lin * components_, static_cast<std::size_t>(components_)};
  }

  double& at(std::size_t lin, int c) { return data_[lin * components_ + c]; }
  double at(std::size_t lin, int c) const { return data_[lin * components_ + c]; }
  /// Periodic access: beta is reduced modulo N.
  double& at(const MultiIndex& beta, int c) { return at(grid_.linear(beta), c); }
  double at(const MultiIndex& beta, int c) const { return at(grid_.linear(beta), c); }

  bool all_finite() const;
  /// Arithmetic mean of each component over the voxels.
  std::vector<double> mean() const;

 private:
  Grid grid_;
  int components_;
  std::vector<double> data_;
};

/// Complex DFT coefficients, full (non-compressed) storage.
class SpectralField {
 public:
  SpectralField(const Grid& grid, int components);

  const Grid& grid() const { return grid_; }
  int components() const { return components_; }
  std::size_t size() const { return data_.size(); }

  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }

  std::span<Complex> coef(std::size_t lin) {
    return {data_.data() + lin * components_, static_cast<std::size_t>(components_)};
  }
  std::span<const Complex> coef(std::size_t lin) const {
    return {data_.data() + lin * components_, static_cast<std::size_t>(components_)};
  }
  Complex& at(std::size_t lin, int c) { return data_[lin * components_ + c]; }
  Complex at(std::size_t lin, int c) const { return data_[lin * components_ + c]; }

 private:
  Grid grid_;
  int components_;
  std::vector<Complex> data_;
};

/// Relative tolerance on the imaginary residue of dft_inverse, measured
/// against the norm of the spectral input.
inline constexpr double kImaginaryResidueTol = 1e-10;

SpectralField dft_forward(const VoxelField& field);

/// @throws SymmetryError if the imaginary part of the result exceeds
///         kImaginaryResidueTol relative to the input.
VoxelField dft_inverse(const SpectralField& spectrum);

/// Allocation-free variants for solver loops. dft_inverse_into transforms
/// `spectrum` in place (its contents are clobbered) and writes the real part
/// to `out`, with the same residue check as dft_inverse.
void dft_forward_into(const VoxelField& field, SpectralField& out);
void dft_inverse_into(SpectralField& spectrum, VoxelField& out);

struct CenteredFrequency {
  long value;
  bool nyquist;  ///< even N and value == N/2
};

/// Maps 0 <= k < N to k if k <= N/2, else k - N. For N = 2M the Nyquist
/// index M maps to +M and is flagged.
CenteredFrequency centered_freq(long k, int side);

/// Number of threads FFTW may use for a single transform.
void set_fft_threads(int threads);
int fft_threads();

}  // namespace homog
