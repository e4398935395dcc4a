#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "cnqg/grid.hpp"

namespace cnqg {

// Real samples on the grid; components = 1 (scalar) or N (vector field).
class PhysicalField {
 public:
  PhysicalField(Grid grid, int components)
      : grid_(grid),
        components_(components),
        values_(static_cast<std::size_t>(components) * grid.size(), 0.0) {
    if (components != 1 && components != grid.dim())
      throw ArityError("PhysicalField: components must be 1 or N");
  }

  const Grid &grid() const { return grid_; }
  int components() const { return components_; }

  double &operator()(int c, std::int64_t i) {
    return values_[static_cast<std::size_t>(c) * grid_.size() + i];
  }
  double operator()(int c, std::int64_t i) const {
    return values_[static_cast<std::size_t>(c) * grid_.size() + i];
  }
  double &operator[](std::int64_t i) { return values_[i]; }
  double operator[](std::int64_t i) const { return values_[i]; }

  std::vector<double> &values() { return values_; }
  const std::vector<double> &values() const { return values_; }

  bool finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  double min_value() const {
    double m = values_.empty() ? 0.0 : values_[0];
    for (double v : values_) m = std::min(m, v);
    return m;
  }

 private:
  Grid grid_;
  int components_;
  std::vector<double> values_;
};

// Complex Fourier coefficients under the mean-normalized convention:
// coeff(k) = (1/prod M_i) sum_x f(x) e^{-i k.x}, so coeff(0) is the mean.
class SpectralField {
 public:
  SpectralField(Grid grid, int components)
      : grid_(grid),
        components_(components),
        coeffs_(static_cast<std::size_t>(components) * grid.size(),
                std::complex<double>(0.0, 0.0)) {
    if (components != 1 && components != grid.dim())
      throw ArityError("SpectralField: components must be 1 or N");
  }

  const Grid &grid() const { return grid_; }
  int components() const { return components_; }

  std::complex<double> &operator()(int c, std::int64_t i) {
    return coeffs_[static_cast<std::size_t>(c) * grid_.size() + i];
  }
  std::complex<double> operator()(int c, std::int64_t i) const {
    return coeffs_[static_cast<std::size_t>(c) * grid_.size() + i];
  }
  std::complex<double> &operator[](std::int64_t i) { return coeffs_[i]; }
  std::complex<double> operator[](std::int64_t i) const { return coeffs_[i]; }

  std::vector<std::complex<double>> &coeffs() { return coeffs_; }
  const std::vector<std::complex<double>> &coeffs() const { return coeffs_; }

  double max_abs() const {
    double m = 0.0;
    for (const auto &c : coeffs_) m = std::max(m, std::abs(c));
    return m;
  }

  // Max |coeff(-k) - conj(coeff(k))| over all modes and components.
  double hermitian_defect() const {
    double worst = 0.0;
    const std::int64_t n = grid_.size();
    for (int c = 0; c < components_; ++c) {
      for (std::int64_t i = 0; i < n; ++i) {
        const std::int64_t j = grid_.conjugate_index(i);
        worst = std::max(worst,
                         std::abs((*this)(c, j) - std::conj((*this)(c, i))));
      }
    }
    return worst;
  }

 private:
  Grid grid_;
  int components_;
  std::vector<std::complex<double>> coeffs_;
};

}  // namespace cnqg
