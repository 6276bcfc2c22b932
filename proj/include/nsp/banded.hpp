#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "nsp/error.hpp"

namespace nsp {

/// Square banded matrix with `kl` sub- and `ku` super-diagonals. Row storage
/// reserves kl extra super-diagonals for fill-in from partial pivoting.
class BandedMatrix {
 public:
  BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku)
      : n_(n), kl_(kl), ku_(ku), w_(2 * kl + ku + 1), a_(n * w_, 0.0) {}

  std::size_t size() const { return n_; }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * w_ + (j + kl_ - i)]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * w_ + (j + kl_ - i)]; }

  /// In-place LU factorization with partial pivoting.
  void factor() {
    const std::size_t reach = kl_ + ku_;
    piv_.assign(n_, 0);
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t last = std::min(n_ - 1, k + kl_);
      std::size_t p = k;
      double best = std::abs((*this)(k, k));
      for (std::size_t r = k + 1; r <= last; ++r) {
        if (std::abs((*this)(r, k)) > best) {
          best = std::abs((*this)(r, k));
          p = r;
        }
      }
      if (best == 0.0) throw Error(Errc::NewtonDivergence, "singular banded Jacobian");
      piv_[k] = p;
      const std::size_t jend = std::min(n_ - 1, k + reach);
      if (p != k)
        for (std::size_t j = k; j <= jend; ++j) std::swap((*this)(k, j), (*this)(p, j));
      const double d = (*this)(k, k);
      for (std::size_t r = k + 1; r <= last; ++r) {
        const double l = (*this)(r, k) / d;
        (*this)(r, k) = l;  // multiplier kept in the eliminated slot
        if (l == 0.0) continue;
        for (std::size_t j = k + 1; j <= jend; ++j) (*this)(r, j) -= l * (*this)(k, j);
      }
    }
    factored_ = true;
  }

  /// Solves A x = b using the factorization (factors on first use).
  std::vector<double> solve(std::vector<double> b) {
    if (!factored_) factor();
    const std::size_t reach = kl_ + ku_;
    for (std::size_t k = 0; k < n_; ++k) {
      if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
      const std::size_t last = std::min(n_ - 1, k + kl_);
      for (std::size_t r = k + 1; r <= last; ++r) b[r] -= (*this)(r, k) * b[k];
    }
    for (std::size_t kk = n_; kk-- > 0;) {
      double s = b[kk];
      const std::size_t jend = std::min(n_ - 1, kk + reach);
      for (std::size_t j = kk + 1; j <= jend; ++j) s -= (*this)(kk, j) * b[j];
      b[kk] = s / (*this)(kk, kk);
    }
    return b;
  }

 private:
  std::size_t n_, kl_, ku_, w_;
  std::vector<double> a_;
  std::vector<std::size_t> piv_;
  bool factored_ = false;
};

}  // namespace nsp
