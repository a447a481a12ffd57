#include "homog/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "homog/errors.hpp"

namespace homog {

Grid::Grid(int dim, int side) : dim_(dim), side_(side), size_(1) {
  if (dim < 1 || dim > 3) {
    throw std::invalid_argument("grid dimension must be 1, 2 or 3, got " +
                                std::to_string(dim));
  }
  if (side < 2) {
    throw std::invalid_argument("grid side must be >= 2, got " +
                                std::to_string(side));
  }
  // Complex storage of one component must stay addressable.
  const std::size_t limit =
      std::numeric_limits<std::size_t>::max() / (8 * sizeof(Complex));
  for (int i = 0; i < dim; ++i) {
    if (size_ > limit / static_cast<std::size_t>(side)) {
      throw std::invalid_argument("grid size N^d overflows addressable memory");
    }
    size_ *= static_cast<std::size_t>(side);
  }
}

double Grid::cell_volume() const { return std::pow(h(), dim_); }

std::size_t Grid::linear(const MultiIndex& beta) const {
  std::size_t lin = 0;
  std::size_t stride = 1;
  for (int i = 0; i < dim_; ++i) {
    long b = beta[i] % side_;
    if (b < 0) b += side_;
    lin += static_cast<std::size_t>(b) * stride;
    stride *= static_cast<std::size_t>(side_);
  }
  return lin;
}

MultiIndex Grid::multi(std::size_t lin) const {
  MultiIndex beta{0, 0, 0};
  for (int i = 0; i < dim_; ++i) {
    beta[i] = static_cast<long>(lin % side_);
    lin /= side_;
  }
  return beta;
}

Grid make_grid(int dim, int side) { return Grid(dim, side); }

VoxelField::VoxelField(const Grid& grid, int components)
    : grid_(grid), components_(components) {
  if (components < 1) throw std::invalid_argument("field needs >= 1 component");
  data_.assign(grid.size() * components, 0.0);
}

VoxelField::VoxelField(const Grid& grid, int components, std::vector<double> data)
    : grid_(grid), components_(components), data_(std::move(data)) {
  if (components < 1) throw std::invalid_argument("field needs >= 1 component");
  if (data_.size() != grid.size() * components) {
    throw std::invalid_argument("field data length does not match m * N^d");
  }
}

bool VoxelField::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::vector<double> VoxelField::mean() const {
  // Pairwise summation per component keeps the result independent of how
  // the field was produced and accurate for large grids.
  std::vector<double> out(components_, 0.0);
  const std::size_t n = grid_.size();
  for (int c = 0; c < components_; ++c) {
    std::vector<double> partial(n);
    for (std::size_t i = 0; i < n; ++i) partial[i] = data_[i * components_ + c];
    std::size_t len = n;
    while (len > 1) {
      const std::size_t half = len / 2;
      for (std::size_t i = 0; i < half; ++i) partial[i] = partial[2 * i] + partial[2 * i + 1];
      if (len % 2) partial[half] = partial[len - 1];
      len = half + len % 2;
    }
    out[c] = partial[0] / static_cast<double>(n);
  }
  return out;
}

SpectralField::SpectralField(const Grid& grid, int components)
    : grid_(grid), components_(components) {
  if (components < 1) throw std::invalid_argument("field needs >= 1 component");
  data_.assign(grid.size() * components, Complex(0.0, 0.0));
}

namespace {

struct PlanKey {
  int dim;
  int side;
  int components;
  int sign;
  int threads;
  auto operator<=>(const PlanKey&) const = default;
};

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(const Grid& grid, int components, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    PlanKey key{grid.dim(), grid.side(), components, sign, threads_};
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;

    // Axis 0 is fastest in memory, i.e. FFTW's last dimension. All sides are
    // equal so only the count matters.
    std::vector<int> n(grid.dim(), grid.side());
    const std::size_t len = grid.size() * components;
    auto* scratch = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * len));
    fftw_plan_with_nthreads(threads_);
    fftw_plan plan = fftw_plan_many_dft(grid.dim(), n.data(), components, scratch,
                                        nullptr, components, 1, scratch, nullptr,
                                        components, 1, sign,
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    if (!plan) throw std::runtime_error("FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

  void set_threads(int threads) {
    std::lock_guard<std::mutex> lock(mutex_);
    threads_ = threads;
  }
  int threads() {
    std::lock_guard<std::mutex> lock(mutex_);
    return threads_;
  }

 private:
  PlanCache() { fftw_init_threads(); }
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
  int threads_ = 1;
};

void execute(const Grid& grid, int components, int sign, Complex* data) {
  fftw_plan plan = PlanCache::instance().get(grid, components, sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace

void set_fft_threads(int threads) {
  if (threads < 1) throw std::invalid_argument("thread count must be >= 1");
  PlanCache::instance().set_threads(threads);
}

int fft_threads() { return PlanCache::instance().threads(); }

void dft_forward_into(const VoxelField& field, SpectralField& out) {
  if (!(field.grid() == out.grid()) || field.components() != out.components()) {
    throw std::invalid_argument("dft_forward: output shape mismatch");
  }
  auto src = field.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = Complex(src[i], 0.0);
  execute(field.grid(), field.components(), FFTW_FORWARD, dst.data());
}

SpectralField dft_forward(const VoxelField& field) {
  if (!field.all_finite()) throw std::invalid_argument("dft_forward: non-finite input");
  SpectralField out(field.grid(), field.components());
  dft_forward_into(field, out);
  return out;
}

void dft_inverse_into(SpectralField& spectrum, VoxelField& out) {
  if (!(spectrum.grid() == out.grid()) || spectrum.components() != out.components()) {
    throw std::invalid_argument("dft_inverse: output shape mismatch");
  }
  auto data = spectrum.data();
  double input_norm2 = 0.0;
  for (const Complex& z : data) input_norm2 += std::norm(z);

  execute(spectrum.grid(), spectrum.components(), FFTW_BACKWARD, data.data());

  const double scale = 1.0 / static_cast<double>(spectrum.grid().size());
  auto dst = out.data();
  double imag2 = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    dst[i] = data[i].real() * scale;
    imag2 += data[i].imag() * data[i].imag();
  }
  // By Parseval the unscaled backward transform has norm N^{d/2} |F|; compare
  // like with like.
  const double residue = std::sqrt(imag2 / (static_cast<double>(spectrum.grid().size()) *
                                            (input_norm2 > 0 ? input_norm2 : 1.0)));
  if (input_norm2 > 0 && residue > kImaginaryResidueTol) {
    std::ostringstream msg;
    msg << "dft_inverse: imaginary residue " << residue
        << " exceeds tolerance; spectrum is not Hermitian-symmetric";
    throw SymmetryError(msg.str(), residue);
  }
}

VoxelField dft_inverse(const SpectralField& spectrum) {
  for (const Complex& z : spectrum.data()) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw std::invalid_argument("dft_inverse: non-finite input");
    }
  }
  SpectralField work = spectrum;
  VoxelField out(spectrum.grid(), spectrum.components());
  dft_inverse_into(work, out);
  return out;
}

CenteredFrequency centered_freq(long k, int side) {
  if (k < 0 || k >= side) throw std::invalid_argument("centered_freq: k out of range");
  const long half = side / 2;
  if (k <= half) return {k, side % 2 == 0 && k == half};
  return {k - side, false};
}

}  // namespace homog
