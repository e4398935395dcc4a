#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include "cnqg/field.hpp"

namespace cnqg {

namespace detail {

// Cached c2c FFTW plans on internal buffers. FFTW_ESTIMATE keeps the
// algorithm choice deterministic across runs (bit-reproducible output).
class FftEngine {
 public:
  static FftEngine &instance() {
    static FftEngine engine;
    return engine;
  }

  // In-place transform of data (length = prod dims). sign is FFTW_FORWARD
  // or FFTW_BACKWARD; no normalization applied here.
  void execute(const Grid &grid, int sign, std::complex<double> *data) {
    std::lock_guard<std::mutex> lock(mutex_);
    Key key{grid.dim(), {grid.points(0),
                         grid.dim() > 1 ? grid.points(1) : 0,
                         grid.dim() > 2 ? grid.points(2) : 0},
            sign};
    auto it = plans_.find(key);
    if (it == plans_.end()) {
      Slot slot;
      slot.buffer.resize(static_cast<std::size_t>(grid.size()));
      int dims[kMaxDim];
      for (int i = 0; i < grid.dim(); ++i) dims[i] = grid.points(i);
      slot.plan = fftw_plan_dft(
          grid.dim(), dims,
          reinterpret_cast<fftw_complex *>(slot.buffer.data()),
          reinterpret_cast<fftw_complex *>(slot.buffer.data()), sign,
          FFTW_ESTIMATE);
      it = plans_.emplace(key, std::move(slot)).first;
    }
    Slot &slot = it->second;
    std::copy(data, data + grid.size(), slot.buffer.begin());
    fftw_execute(slot.plan);
    std::copy(slot.buffer.begin(), slot.buffer.end(), data);
  }

 private:
  struct Key {
    int dim;
    std::array<int, kMaxDim> points;
    int sign;
    bool operator<(const Key &o) const {
      if (dim != o.dim) return dim < o.dim;
      if (points != o.points) return points < o.points;
      return sign < o.sign;
    }
  };
  struct Slot {
    std::vector<std::complex<double>> buffer;
    fftw_plan plan = nullptr;
    Slot() = default;
    Slot(Slot &&other) noexcept
        : buffer(std::move(other.buffer)), plan(other.plan) {
      other.plan = nullptr;
    }
    ~Slot() {
      if (plan) fftw_destroy_plan(plan);
    }
  };

  FftEngine() = default;
  std::mutex mutex_;
  std::map<Key, Slot> plans_;
};

}  // namespace detail

// coeff(k) = (1/prod M) sum_x f(x) e^{-ik.x}; coeff(0) is the spatial mean.
inline SpectralField forward_transform(const PhysicalField &f) {
  if (!f.finite()) throw InvalidField("forward_transform: non-finite input");
  const Grid &g = f.grid();
  SpectralField out(g, f.components());
  const std::int64_t n = g.size();
  std::vector<std::complex<double>> work(static_cast<std::size_t>(n));
  const double scale = 1.0 / static_cast<double>(n);
  for (int c = 0; c < f.components(); ++c) {
    for (std::int64_t i = 0; i < n; ++i) work[i] = f(c, i);
    detail::FftEngine::instance().execute(g, FFTW_FORWARD, work.data());
    for (std::int64_t i = 0; i < n; ++i) out(c, i) = work[i] * scale;
  }
  return out;
}

// Exact inverse of forward_transform. Rejects inputs whose Hermitian defect
// exceeds tol relative to the largest coefficient; smaller defects are
// symmetrized implicitly by discarding the imaginary part.
inline PhysicalField inverse_transform(const SpectralField &F,
                                       double hermitian_tol = 1e-10) {
  const Grid &g = F.grid();
  const double scale = F.max_abs();
  if (scale > 0.0 && F.hermitian_defect() > hermitian_tol * std::max(scale, 1.0))
    throw HermitianViolation("inverse_transform: coefficients not Hermitian");
  PhysicalField out(g, F.components());
  const std::int64_t n = g.size();
  std::vector<std::complex<double>> work(static_cast<std::size_t>(n));
  for (int c = 0; c < F.components(); ++c) {
    for (std::int64_t i = 0; i < n; ++i) work[i] = F(c, i);
    detail::FftEngine::instance().execute(g, FFTW_BACKWARD, work.data());
    for (std::int64_t i = 0; i < n; ++i) out(c, i) = work[i].real();
  }
  return out;
}

// Inverse without the symmetry gate, for hot paths where the input is
// Hermitian by construction.
inline PhysicalField inverse_transform_unchecked(const SpectralField &F) {
  const Grid &g = F.grid();
  PhysicalField out(g, F.components());
  const std::int64_t n = g.size();
  std::vector<std::complex<double>> work(static_cast<std::size_t>(n));
  for (int c = 0; c < F.components(); ++c) {
    for (std::int64_t i = 0; i < n; ++i) work[i] = F(c, i);
    detail::FftEngine::instance().execute(g, FFTW_BACKWARD, work.data());
    for (std::int64_t i = 0; i < n; ++i) out(c, i) = work[i].real();
  }
  return out;
}

}  // namespace cnqg
