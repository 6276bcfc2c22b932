#pragma once

// Slab discretization of [-L, L] x T^2 (unit torus), field containers and the
// finite-difference / spectral operators used by every other module.
//
// Layout: index = (i1 * N2 + i2) * N3 + i3, so one x1 "slab" of N2*N3 values is
// contiguous. Cells are centered in x1 (x1_i = -L + (i + 1/2) dx1); the
// transverse directions use the equispaced periodic grid x2_j = j / N2.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <numbers>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "nsp/error.hpp"
#include "nsp/parallel.hpp"

namespace nsp {

using cplx = std::complex<double>;
constexpr double two_pi = 2.0 * std::numbers::pi;

struct GridSpec {
  double L = 50.0;
  std::size_t n1 = 8;
  std::size_t n2 = 1;
  std::size_t n3 = 1;

  static GridSpec make(double L, std::size_t n1, std::size_t n2 = 1, std::size_t n3 = 1) {
    GridSpec g{L, n1, n2, n3};
    g.validate();
    return g;
  }

  void validate() const {
    std::ostringstream why;
    if (!(L > 0.0) || !std::isfinite(L)) why << "L must be positive; ";
    if (n1 < 8) why << "N1 must be >= 8; ";
    if (n2 < 1 || (n2 > 1 && n2 % 2 != 0)) why << "N2 must be 1 or even; ";
    if (n3 < 1 || (n3 > 1 && n3 % 2 != 0)) why << "N3 must be 1 or even; ";
    if (!why.str().empty()) throw Error(Errc::InvalidParam, "GridSpec: " + why.str());
  }

  double dx1() const { return 2.0 * L / static_cast<double>(n1); }
  double dx2() const { return 1.0 / static_cast<double>(n2); }
  double dx3() const { return 1.0 / static_cast<double>(n3); }
  std::size_t slab() const { return n2 * n3; }
  std::size_t size() const { return n1 * n2 * n3; }
  bool transverse() const { return n2 > 1 || n3 > 1; }

  double x1(std::size_t i) const { return -L + (static_cast<double>(i) + 0.5) * dx1(); }
  double x2(std::size_t j) const { return static_cast<double>(j) * dx2(); }
  double x3(std::size_t k) const { return static_cast<double>(k) * dx3(); }

  /// Smallest mesh spacing over the resolved directions.
  double dx_min() const {
    double h = dx1();
    if (n2 > 1) h = std::min(h, dx2());
    if (n3 > 1) h = std::min(h, dx3());
    return h;
  }

  /// Quadrature weight of one grid point in the L^2(Omega) inner product.
  double cell_weight() const { return dx1() / static_cast<double>(slab()); }

  std::size_t index(std::size_t i1, std::size_t i2, std::size_t i3) const {
    return (i1 * n2 + i2) * n3 + i3;
  }

  bool operator==(const GridSpec&) const = default;
};

/// Deterministic pairwise summation (fixed tree independent of thread count).
inline double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

inline double pairwise_sum(std::span<const double> x) { return pairwise_sum(x.data(), x.size()); }

/// Allocator with 64-byte alignment, so that every slab of a field whose
/// slab size is a multiple of 8 doubles meets FFTW's SIMD alignment.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t alignment = 64;
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t(alignment)));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, std::align_val_t(alignment)); }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

using AlignedVector = std::vector<double, AlignedAllocator<double>>;
using AlignedCVector = std::vector<cplx, AlignedAllocator<cplx>>;

class ScalarField1 {
 public:
  ScalarField1() = default;
  explicit ScalarField1(const GridSpec& g, double value = 0.0) : grid_(g), v_(g.n1, value) {}

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  std::span<double> values() { return v_; }
  std::span<const double> values() const { return v_; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }

 private:
  GridSpec grid_{};
  std::vector<double> v_;
};

class ScalarField3 {
 public:
  ScalarField3() = default;
  explicit ScalarField3(const GridSpec& g, double value = 0.0) : grid_(g), v_(g.size(), value) {}

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }

  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  double& operator()(std::size_t i1, std::size_t i2, std::size_t i3) { return v_[grid_.index(i1, i2, i3)]; }
  double operator()(std::size_t i1, std::size_t i2, std::size_t i3) const {
    return v_[grid_.index(i1, i2, i3)];
  }

  std::span<double> values() { return v_; }
  std::span<const double> values() const { return v_; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::span<double> slab(std::size_t i1) { return {v_.data() + i1 * grid_.slab(), grid_.slab()}; }
  std::span<const double> slab(std::size_t i1) const {
    return {v_.data() + i1 * grid_.slab(), grid_.slab()};
  }

  ScalarField3& operator+=(const ScalarField3& o) {
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }
  ScalarField3& operator-=(const ScalarField3& o) {
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }
  ScalarField3& operator*=(double a) {
    for (double& x : v_) x *= a;
    return *this;
  }

  bool all_finite() const {
    return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
  }

 private:
  GridSpec grid_{};
  AlignedVector v_;
};

using VectorField3 = std::array<ScalarField3, 3>;

inline ScalarField3 operator+(ScalarField3 a, const ScalarField3& b) { return a += b; }
inline ScalarField3 operator-(ScalarField3 a, const ScalarField3& b) { return a -= b; }
inline ScalarField3 operator*(double s, ScalarField3 a) { return a *= s; }

inline VectorField3 make_vector_field(const GridSpec& g, double value = 0.0) {
  return {ScalarField3(g, value), ScalarField3(g, value), ScalarField3(g, value)};
}

/// Samples f(x1, x2, x3) at every grid point.
template <class F>
ScalarField3 sample(const GridSpec& g, F&& f) {
  ScalarField3 out(g);
  for (std::size_t i = 0; i < g.n1; ++i)
    for (std::size_t j = 0; j < g.n2; ++j)
      for (std::size_t k = 0; k < g.n3; ++k) out(i, j, k) = f(g.x1(i), g.x2(j), g.x3(k));
  return out;
}

template <class F>
ScalarField1 sample_line(const GridSpec& g, F&& f) {
  ScalarField1 out(g);
  for (std::size_t i = 0; i < g.n1; ++i) out[i] = f(g.x1(i));
  return out;
}

// ---------------------------------------------------------------------------
// Transverse discrete Fourier transforms (one N2 x N3 slab at a time).

/// Real-to-complex 2-d transform of one slab plus the wavenumber tables that go
/// with the half-complex layout (N2 x (N3/2 + 1)). Execution is thread-safe.
class TransverseFFT {
 public:
  TransverseFFT(std::size_t n2, std::size_t n3) : n2_(n2), n3_(n3), n3c_(n3 / 2 + 1) {
    const int a = static_cast<int>(n2), b = static_cast<int>(n3);
    AlignedVector re(n2 * n3);
    AlignedCVector sp(n2 * n3c_);
    auto* c = reinterpret_cast<fftw_complex*>(sp.data());
    // Aligned plans; misaligned arguments are staged through aligned buffers
    // in forward/inverse. FFTW_ESTIMATE keeps plan choice deterministic.
    const unsigned flags = FFTW_ESTIMATE;
    {
      std::lock_guard lock(planner_mutex());
      fwd_ = fftw_plan_dft_r2c_2d(a, b, re.data(), c, flags);
      inv_ = fftw_plan_dft_c2r_2d(a, b, c, re.data(), flags);
    }
    if (!fwd_ || !inv_) throw Error(Errc::InvalidParam, "FFTW planning failed");

    const std::size_t nk = modes();
    k2_.resize(nk);
    k3_.resize(nk);
    ksq_.resize(nk);
    d2_.resize(nk);
    d3_.resize(nk);
    for (std::size_t m = 0; m < nk; ++m) {
      const std::size_t j2 = m / n3c_, j3 = m % n3c_;
      const long q2 = j2 <= n2 / 2 ? static_cast<long>(j2) : static_cast<long>(j2) - static_cast<long>(n2);
      const long q3 = static_cast<long>(j3);
      const bool nyq2 = n2 > 1 && j2 == n2 / 2;
      const bool nyq3 = n3 > 1 && j3 == n3 / 2;
      k2_[m] = static_cast<int>(q2);
      k3_[m] = static_cast<int>(q3);
      const double w2 = two_pi * static_cast<double>(q2), w3 = two_pi * static_cast<double>(q3);
      ksq_[m] = w2 * w2 + w3 * w3;
      d2_[m] = nyq2 ? cplx{} : cplx{0.0, w2};
      d3_[m] = nyq3 ? cplx{} : cplx{0.0, w3};
    }
  }

  TransverseFFT(const TransverseFFT&) = delete;
  TransverseFFT& operator=(const TransverseFFT&) = delete;
  ~TransverseFFT() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }

  static const TransverseFFT& get(std::size_t n2, std::size_t n3) {
    static std::mutex mu;
    static std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<TransverseFFT>> cache;
    std::lock_guard lock(mu);
    auto& p = cache[{n2, n3}];
    if (!p) p = std::make_unique<TransverseFFT>(n2, n3);
    return *p;
  }

  std::size_t modes() const { return n2_ * n3c_; }
  std::size_t points() const { return n2_ * n3_; }

  /// Integer transverse wavenumbers (k2, k3) of spectral slot m.
  int k2(std::size_t m) const { return k2_[m]; }
  int k3(std::size_t m) const { return k3_[m]; }
  /// |2 pi k|^2, Nyquist included (symbol of -Laplacian').
  double ksq(std::size_t m) const { return ksq_[m]; }
  /// Symbols of d/dx2 and d/dx3 (Nyquist zeroed so odd derivatives stay real).
  cplx d2(std::size_t m) const { return d2_[m]; }
  cplx d3(std::size_t m) const { return d3_[m]; }

  void forward(const double* in, cplx* out) const {
    if (aligned(in) && aligned(out)) {
      fftw_execute_dft_r2c(fwd_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
      return;
    }
    thread_local AlignedVector re;
    thread_local AlignedCVector sp;
    re.assign(in, in + points());
    sp.resize(modes());
    fftw_execute_dft_r2c(fwd_, re.data(), reinterpret_cast<fftw_complex*>(sp.data()));
    std::copy(sp.begin(), sp.end(), out);
  }

  /// Normalized inverse; `scratch` (modes() entries) is clobbered.
  void inverse(const cplx* in, double* out, cplx* scratch) const {
    const double s = 1.0 / static_cast<double>(points());
    if (aligned(scratch) && aligned(out)) {
      std::copy(in, in + modes(), scratch);
      fftw_execute_dft_c2r(inv_, reinterpret_cast<fftw_complex*>(scratch), out);
      for (std::size_t i = 0; i < points(); ++i) out[i] *= s;
      return;
    }
    thread_local AlignedVector re;
    thread_local AlignedCVector sp;
    sp.assign(in, in + modes());
    re.resize(points());
    fftw_execute_dft_c2r(inv_, reinterpret_cast<fftw_complex*>(sp.data()), re.data());
    for (std::size_t i = 0; i < points(); ++i) out[i] = re[i] * s;
  }

 private:
  static bool aligned(const void* p) {
    return fftw_alignment_of(const_cast<double*>(static_cast<const double*>(p))) == 0;
  }
  static std::mutex& planner_mutex() {
    static std::mutex mu;
    return mu;
  }

  std::size_t n2_, n3_, n3c_;
  fftw_plan fwd_{}, inv_{};
  std::vector<int> k2_, k3_;
  std::vector<double> ksq_;
  AlignedCVector d2_, d3_;
};

/// Applies a per-mode multiplier symbol(m) to every slab of f.
template <class Symbol>
ScalarField3 apply_transverse_symbol(const ScalarField3& f, Symbol&& symbol) {
  const GridSpec& g = f.grid();
  ScalarField3 out(g);
  if (!g.transverse()) {
    const cplx s = symbol(std::size_t{0});
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = s.real() * f[i];
    return out;
  }
  const auto& fft = TransverseFFT::get(g.n2, g.n3);
  const std::size_t nk = fft.modes();
  AlignedCVector sym(nk);
  for (std::size_t m = 0; m < nk; ++m) sym[m] = symbol(m);
  const std::size_t ns = g.slab();
  parallel_for(g.n1, [&](std::size_t i1) {
    AlignedCVector a(nk), scratch(nk);
    fft.forward(f.data() + i1 * ns, a.data());
    for (std::size_t m = 0; m < nk; ++m) a[m] *= sym[m];
    fft.inverse(a.data(), out.data() + i1 * ns, scratch.data());
  });
  return out;
}

// ---------------------------------------------------------------------------
// x1 boundary handling.

/// How x1 stencils reach past the first/last cell: either second-order
/// one-sided formulas, or constant far-field values in the ghost cells.
struct X1Boundary {
  enum class Kind { OneSided, Ghost };
  Kind kind = Kind::OneSided;
  double left = 0.0;
  double right = 0.0;

  static X1Boundary one_sided() { return {}; }
  static X1Boundary ghost(double l, double r) { return {Kind::Ghost, l, r}; }
};

namespace detail {

// Central first difference along x1 for `lines` interleaved columns
// (stride = lines). Works for ScalarField1 (lines = 1) and slabs.
inline void d1_kernel(const double* f, double* out, std::size_t n1, std::size_t lines, double h,
                      const X1Boundary& bc) {
  const double c = 0.5 / h;
  parallel_for(n1, [&](std::size_t i) {
    double* o = out + i * lines;
    if (i > 0 && i + 1 < n1) {
      const double* fp = f + (i + 1) * lines;
      const double* fm = f + (i - 1) * lines;
      for (std::size_t k = 0; k < lines; ++k) o[k] = c * (fp[k] - fm[k]);
      return;
    }
    if (bc.kind == X1Boundary::Kind::Ghost) {
      const double* fin = f + (i == 0 ? 1 : n1 - 2) * lines;
      const double gv = i == 0 ? bc.left : bc.right;
      for (std::size_t k = 0; k < lines; ++k)
        o[k] = i == 0 ? c * (fin[k] - gv) : c * (gv - fin[k]);
      return;
    }
    if (i == 0) {
      const double *f0 = f, *f1 = f + lines, *f2 = f + 2 * lines;
      for (std::size_t k = 0; k < lines; ++k) o[k] = c * (-3.0 * f0[k] + 4.0 * f1[k] - f2[k]);
    } else {
      const double *f0 = f + (n1 - 1) * lines, *f1 = f + (n1 - 2) * lines, *f2 = f + (n1 - 3) * lines;
      for (std::size_t k = 0; k < lines; ++k) o[k] = c * (3.0 * f0[k] - 4.0 * f1[k] + f2[k]);
    }
  });
}

// Compact three-point second difference along x1.
inline void d11_kernel(const double* f, double* out, std::size_t n1, std::size_t lines, double h,
                       const X1Boundary& bc) {
  const double c = 1.0 / (h * h);
  parallel_for(n1, [&](std::size_t i) {
    double* o = out + i * lines;
    const double* f0 = f + i * lines;
    if (i > 0 && i + 1 < n1) {
      const double* fp = f + (i + 1) * lines;
      const double* fm = f + (i - 1) * lines;
      for (std::size_t k = 0; k < lines; ++k) o[k] = c * (fp[k] - 2.0 * f0[k] + fm[k]);
      return;
    }
    if (bc.kind == X1Boundary::Kind::Ghost) {
      const double* fin = f + (i == 0 ? 1 : n1 - 2) * lines;
      const double gv = i == 0 ? bc.left : bc.right;
      for (std::size_t k = 0; k < lines; ++k) o[k] = c * (fin[k] - 2.0 * f0[k] + gv);
      return;
    }
    const long s = i == 0 ? 1 : -1;
    const double* f1 = f0 + s * static_cast<long>(lines);
    const double* f2 = f1 + s * static_cast<long>(lines);
    const double* f3 = f2 + s * static_cast<long>(lines);
    for (std::size_t k = 0; k < lines; ++k) o[k] = c * (2.0 * f0[k] - 5.0 * f1[k] + 4.0 * f2[k] - f3[k]);
  });
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Zero / non-zero mode decomposition.

/// Zero mode: mean over the transverse torus for every x1 cell.
inline ScalarField1 transverse_average(const ScalarField3& f) {
  const GridSpec& g = f.grid();
  ScalarField1 out(g);
  const double inv = 1.0 / static_cast<double>(g.slab());
  for (std::size_t i = 0; i < g.n1; ++i) out[i] = pairwise_sum(f.slab(i)) * inv;
  return out;
}

inline ScalarField3 broadcast(const ScalarField1& f, const GridSpec& g) {
  ScalarField3 out(g);
  for (std::size_t i = 0; i < g.n1; ++i) std::fill(out.slab(i).begin(), out.slab(i).end(), f[i]);
  return out;
}

/// Non-zero mode f - broadcast(transverse_average(f)).
inline ScalarField3 nonzero_part(const ScalarField3& f) {
  const GridSpec& g = f.grid();
  const ScalarField1 bar = transverse_average(f);
  ScalarField3 out = f;
  for (std::size_t i = 0; i < g.n1; ++i)
    for (double& x : out.slab(i)) x -= bar[i];
  return out;
}

// ---------------------------------------------------------------------------
// Differential operators.

inline ScalarField3 d1(const ScalarField3& f, const X1Boundary& bc = X1Boundary::one_sided()) {
  ScalarField3 out(f.grid());
  detail::d1_kernel(f.data(), out.data(), f.grid().n1, f.grid().slab(), f.grid().dx1(), bc);
  return out;
}

inline ScalarField1 d1(const ScalarField1& f, const X1Boundary& bc = X1Boundary::one_sided()) {
  ScalarField1 out(f.grid());
  detail::d1_kernel(f.data(), out.data(), f.grid().n1, 1, f.grid().dx1(), bc);
  return out;
}

inline ScalarField3 d2(const ScalarField3& f) {
  if (f.grid().n2 == 1) return ScalarField3(f.grid());
  const auto& fft = TransverseFFT::get(f.grid().n2, f.grid().n3);
  return apply_transverse_symbol(f, [&](std::size_t m) { return fft.d2(m); });
}

inline ScalarField3 d3(const ScalarField3& f) {
  if (f.grid().n3 == 1) return ScalarField3(f.grid());
  const auto& fft = TransverseFFT::get(f.grid().n2, f.grid().n3);
  return apply_transverse_symbol(f, [&](std::size_t m) { return fft.d3(m); });
}

inline VectorField3 grad(const ScalarField3& f, const X1Boundary& bc = X1Boundary::one_sided()) {
  return {d1(f, bc), d2(f), d3(f)};
}

/// Divergence; `bc` applies to the x1 component.
inline ScalarField3 div(const VectorField3& v, const X1Boundary& bc = X1Boundary::one_sided()) {
  ScalarField3 out = d1(v[0], bc);
  if (v[1].grid().n2 > 1) out += d2(v[1]);
  if (v[2].grid().n3 > 1) out += d3(v[2]);
  return out;
}

/// Boundary rule for the gradient of a field obeying `bc` (far-field constants
/// have zero slope).
inline X1Boundary gradient_boundary(const X1Boundary& bc) {
  return bc.kind == X1Boundary::Kind::Ghost ? X1Boundary::ghost(0.0, 0.0) : bc;
}

/// Laplacian as div(grad f) (wide five-point stencil in x1).
inline ScalarField3 laplacian(const ScalarField3& f, const X1Boundary& bc = X1Boundary::one_sided()) {
  return div(grad(f, bc), gradient_boundary(bc));
}

/// Compact Laplacian: three-point second difference in x1 plus the exact
/// spectral transverse symbol -|k|^2 (Nyquist included). This is the operator
/// the Poisson solver inverts and the viscous term uses.
inline ScalarField3 laplacian_compact(const ScalarField3& f,
                                      const X1Boundary& bc = X1Boundary::one_sided()) {
  const GridSpec& g = f.grid();
  ScalarField3 out(g);
  detail::d11_kernel(f.data(), out.data(), g.n1, g.slab(), g.dx1(), bc);
  if (g.transverse()) {
    const auto& fft = TransverseFFT::get(g.n2, g.n3);
    out += apply_transverse_symbol(f, [&](std::size_t m) { return cplx{-fft.ksq(m), 0.0}; });
  }
  return out;
}

inline ScalarField1 d11(const ScalarField1& f, const X1Boundary& bc = X1Boundary::one_sided()) {
  ScalarField1 out(f.grid());
  detail::d11_kernel(f.data(), out.data(), f.grid().n1, 1, f.grid().dx1(), bc);
  return out;
}

// ---------------------------------------------------------------------------
// Norms and integrals.

struct NormReport {
  double l2 = 0.0;
  double linf = 0.0;
  double h1 = 0.0;
};

inline double sum_squares(std::span<const double> x) {
  std::vector<double> sq(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sq[i] = x[i] * x[i];
  return pairwise_sum(sq);
}

inline double linf_norm(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

inline double l2_norm(const ScalarField3& f) { return std::sqrt(sum_squares(f.values()) * f.grid().cell_weight()); }
inline double l2_norm(const ScalarField1& f) { return std::sqrt(sum_squares(f.values()) * f.grid().dx1()); }
inline double linf_norm(const ScalarField3& f) { return linf_norm(f.values()); }
inline double linf_norm(const ScalarField1& f) { return linf_norm(f.values()); }

/// Integral over Omega = [-L, L] x T^2.
inline double integral(const ScalarField3& f) { return pairwise_sum(f.values()) * f.grid().cell_weight(); }
/// Integral over [-L, L].
inline double integral(const ScalarField1& f) { return pairwise_sum(f.values()) * f.grid().dx1(); }

inline NormReport norms(const ScalarField3& f, const X1Boundary& bc = X1Boundary::one_sided()) {
  NormReport r;
  const double w = f.grid().cell_weight();
  const double s0 = sum_squares(f.values());
  double s1 = sum_squares(d1(f, bc).values());
  if (f.grid().n2 > 1) s1 += sum_squares(d2(f).values());
  if (f.grid().n3 > 1) s1 += sum_squares(d3(f).values());
  r.l2 = std::sqrt(s0 * w);
  r.linf = linf_norm(f.values());
  r.h1 = std::sqrt((s0 + s1) * w);
  return r;
}

inline NormReport norms(const ScalarField1& f, const X1Boundary& bc = X1Boundary::one_sided()) {
  NormReport r;
  const double w = f.grid().dx1();
  const double s0 = sum_squares(f.values());
  const double s1 = sum_squares(d1(f, bc).values());
  r.l2 = std::sqrt(s0 * w);
  r.linf = linf_norm(f.values());
  r.h1 = std::sqrt((s0 + s1) * w);
  return r;
}

/// Combined L^2 norm of several fields, sqrt(sum_i ||f_i||^2).
inline double l2_norm(std::span<const ScalarField3* const> fs) {
  double s = 0.0;
  for (const ScalarField3* f : fs) s += sum_squares(f->values()) * f->grid().cell_weight();
  return std::sqrt(s);
}

}  // namespace nsp
