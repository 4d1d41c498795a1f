#pragma once

// Band-limited calculus on the flat 3-torus with unit periods.
//
// A field is stored as its truncated Fourier series
//     X(x) = sum_{k in {-N..N}^3} c_k exp(2 pi i k.x),
// and every differential operator acts mode by mode with the angular
// wavevector K = 2 pi k. Real fields satisfy c_{-k} = conj(c_k).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "beltrami/core.hpp"
#include "beltrami/field.hpp"

namespace beltrami {

namespace detail {
template <class C>
C zero_coeff() {
  if constexpr (std::is_same_v<C, Complex>) {
    return Complex(0.0, 0.0);
  } else {
    return C::Zero();
  }
}

// Eigen conjugates cross products of complex vectors; this one does not.
inline Vec3c cross_real_complex(const Vec3& a, const Vec3c& b) {
  return Vec3c(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]);
}

inline double coeff_abs(const Complex& c) { return std::abs(c); }
inline double coeff_abs(const Vec3c& c) { return c.norm(); }
inline Complex coeff_conj(const Complex& c) { return std::conj(c); }
inline Vec3c coeff_conj(const Vec3c& c) { return c.conjugate(); }
inline double coeff_dot(const Complex& a, const Complex& b) { return std::real(a * std::conj(b)); }
inline double coeff_dot(const Vec3c& a, const Vec3c& b) { return std::real(a.dot(b)); }
}  // namespace detail

/// Truncated Fourier series over the cube of wavevectors {-N..N}^3.
template <class Coeff>
class FourierSeries {
 public:
  using coeff_type = Coeff;

  FourierSeries() : FourierSeries(0) {}
  explicit FourierSeries(int N) : N_(N) {
    if (N < 0) throw PreconditionError("truncation N must be non-negative");
    const std::size_t d = static_cast<std::size_t>(2 * N + 1);
    coeffs_.assign(d * d * d, detail::zero_coeff<Coeff>());
  }

  int truncation() const noexcept { return N_; }
  int width() const noexcept { return 2 * N_ + 1; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  static Vec3 periods() { return Vec3::Ones(); }

  bool contains(const Wavevector& k) const {
    return std::abs(k[0]) <= N_ && std::abs(k[1]) <= N_ && std::abs(k[2]) <= N_;
  }

  std::size_t index(const Wavevector& k) const {
    if (!contains(k)) throw PreconditionError("wavevector outside truncation");
    const std::size_t w = static_cast<std::size_t>(width());
    return (static_cast<std::size_t>(k[0] + N_) * w + static_cast<std::size_t>(k[1] + N_)) * w +
           static_cast<std::size_t>(k[2] + N_);
  }

  Wavevector wavevector(std::size_t idx) const {
    const int w = width();
    const int i2 = static_cast<int>(idx % static_cast<std::size_t>(w));
    const int i1 = static_cast<int>((idx / static_cast<std::size_t>(w)) % static_cast<std::size_t>(w));
    const int i0 = static_cast<int>(idx / static_cast<std::size_t>(w * w));
    return {i0 - N_, i1 - N_, i2 - N_};
  }

  Coeff& at(const Wavevector& k) { return coeffs_[index(k)]; }
  const Coeff& at(const Wavevector& k) const { return coeffs_[index(k)]; }
  Coeff get(const Wavevector& k) const {
    return contains(k) ? coeffs_[index(k)] : detail::zero_coeff<Coeff>();
  }

  const std::vector<Coeff>& coefficients() const noexcept { return coeffs_; }

  /// Visits modes in lexicographic wavevector order.
  template <class F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < coeffs_.size(); ++i) f(wavevector(i), coeffs_[i]);
  }

  template <class F>
  void for_each_mutable(F&& f) {
    for (std::size_t i = 0; i < coeffs_.size(); ++i) f(wavevector(i), coeffs_[i]);
  }

  /// Returns the same series on a larger (or equal) truncation.
  FourierSeries resized(int N) const {
    FourierSeries out(N);
    for_each([&](const Wavevector& k, const Coeff& c) {
      if (out.contains(k)) {
        out.at(k) = c;
      } else if (detail::coeff_abs(c) != 0.0) {
        throw PreconditionError("resize would drop non-zero modes");
      }
    });
    return out;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& c : coeffs_) m = std::max(m, detail::coeff_abs(c));
    return m;
  }

  /// sum_k |c_k|, an upper bound for the sup norm of the field.
  double abs_sum() const {
    double s = 0.0;
    for (const auto& c : coeffs_) s += detail::coeff_abs(c);
    return s;
  }

  /// max_k |c_k - conj(c_{-k})|; zero for real fields.
  double hermitian_residual() const {
    double r = 0.0;
    for_each([&](const Wavevector& k, const Coeff& c) {
      r = std::max(r, detail::coeff_abs(c - detail::coeff_conj(at(negate(k)))));
    });
    return r;
  }

  FourierSeries& operator+=(const FourierSeries& o) {
    require_same(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
  }
  FourierSeries& operator-=(const FourierSeries& o) {
    require_same(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
  }
  FourierSeries& operator*=(Complex s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }
  friend FourierSeries operator+(FourierSeries a, const FourierSeries& b) { return a += b; }
  friend FourierSeries operator-(FourierSeries a, const FourierSeries& b) { return a -= b; }
  friend FourierSeries operator*(Complex s, FourierSeries a) { return a *= s; }
  friend FourierSeries operator*(double s, FourierSeries a) { return a *= Complex(s, 0.0); }

  friend bool operator==(const FourierSeries& a, const FourierSeries& b) {
    return a.N_ == b.N_ && a.coeffs_ == b.coeffs_;
  }

 private:
  void require_same(const FourierSeries& o) const {
    if (o.N_ != N_) throw PreconditionError("Fourier series truncations differ");
  }

  int N_;
  std::vector<Coeff> coeffs_;
};

using SpectralField = FourierSeries<Vec3c>;
using SpectralScalar = FourierSeries<Complex>;

// ------------------------------------------------------------------ evaluation

/// Pointwise evaluator over the non-zero modes of a series. Builds its mode list
/// once; evaluation is O(#non-zero modes).
template <class Coeff>
class SpectralEvaluator {
 public:
  explicit SpectralEvaluator(const FourierSeries<Coeff>& s) {
    s.for_each([&](const Wavevector& k, const Coeff& c) {
      if (detail::coeff_abs(c) != 0.0) modes_.push_back({angular(k), c});
    });
  }

  std::size_t mode_count() const noexcept { return modes_.size(); }

  /// Real part of the series at p (the field value for Hermitian-symmetric series).
  auto value(const Vec3& p) const {
    if constexpr (std::is_same_v<Coeff, Complex>) {
      double v = 0.0;
      for (const auto& m : modes_) v += std::real(m.c * phase(m.K, p));
      return v;
    } else {
      Vec3 v = Vec3::Zero();
      for (const auto& m : modes_) v += (m.c * phase(m.K, p)).real();
      return v;
    }
  }

  /// Scalars: gradient of partials; vectors: Jacobian J(i, j) = d_j X^i.
  auto derivative(const Vec3& p) const {
    if constexpr (std::is_same_v<Coeff, Complex>) {
      Vec3 d = Vec3::Zero();
      for (const auto& m : modes_) {
        const Complex e = m.c * phase(m.K, p) * Complex(0.0, 1.0);
        d += std::real(e) * m.K;
      }
      return d;
    } else {
      Mat3 J = Mat3::Zero();
      for (const auto& m : modes_) {
        const Vec3 e = (m.c * (phase(m.K, p) * Complex(0.0, 1.0))).real();
        J += e * m.K.transpose();
      }
      return J;
    }
  }

 private:
  static Complex phase(const Vec3& K, const Vec3& p) {
    const double a = K.dot(p);
    return Complex(std::cos(a), std::sin(a));
  }

  struct Mode {
    Vec3 K;
    Coeff c;
  };
  std::vector<Mode> modes_;
};

inline Vec3 synthesize(const SpectralField& f, const Vec3& p) {
  return SpectralEvaluator<Vec3c>(f).value(p);
}

inline double synthesize(const SpectralScalar& f, const Vec3& p) {
  return SpectralEvaluator<Complex>(f).value(p);
}

/// Point field with exact derivatives backed by a spectral series.
inline VectorField to_vector_field(const SpectralField& f) {
  auto ev = std::make_shared<const SpectralEvaluator<Vec3c>>(f);
  return VectorField{[ev](const Vec3& p) -> Vec3 { return ev->value(p); },
                     [ev](const Vec3& p) -> Mat3 { return ev->derivative(p); }};
}

inline ScalarField to_scalar_field(const SpectralScalar& f) {
  auto ev = std::make_shared<const SpectralEvaluator<Complex>>(f);
  return ScalarField{[ev](const Vec3& p) -> double { return ev->value(p); },
                     [ev](const Vec3& p) -> Vec3 { return ev->derivative(p); }};
}

// ------------------------------------------------------------ sampling / DFT

/// Samples on the uniform grid x = (i, j, l) / n, stored with l fastest:
/// index = (i * n + j) * n + l.
template <class Value>
struct SampleGrid {
  int n = 0;
  std::vector<Value> values;

  std::size_t index(int i, int j, int l) const {
    return (static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)) * n +
           static_cast<std::size_t>(l);
  }
  Vec3 point(int i, int j, int l) const { return Vec3(i, j, l) / static_cast<double>(n); }
};

template <class Coeff>
auto sample(const FourierSeries<Coeff>& f, int n) {
  using Value = std::conditional_t<std::is_same_v<Coeff, Complex>, double, Vec3>;
  if (n <= 0) throw PreconditionError("sample grid size must be positive");
  SpectralEvaluator<Coeff> ev(f);
  SampleGrid<Value> g;
  g.n = n;
  g.values.resize(static_cast<std::size_t>(n) * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) g.values[g.index(i, j, l)] = ev.value(g.point(i, j, l));
  return g;
}

namespace detail {

/// Separable forward DFT restricted to |k| <= N per axis. O(n^3 (2N+1)).
template <class Coeff, class Value>
FourierSeries<Coeff> analyze_impl(const SampleGrid<Value>& g, int N) {
  const int n = g.n;
  if (n < 2 * N + 1) {
    throw AliasingError("grid resolution " + std::to_string(n) +
                        " is below 2N+1 = " + std::to_string(2 * N + 1));
  }
  if (g.values.size() != static_cast<std::size_t>(n) * n * n) {
    throw PreconditionError("sample grid size mismatch");
  }
  const int w = 2 * N + 1;
  // twiddle[k + N][j] = exp(-2 pi i k j / n) / n
  std::vector<Complex> tw(static_cast<std::size_t>(w) * n);
  for (int k = -N; k <= N; ++k)
    for (int j = 0; j < n; ++j) {
      const double a = -kTwoPi * static_cast<double>(k) * j / n;
      tw[static_cast<std::size_t>(k + N) * n + j] = Complex(std::cos(a), std::sin(a)) / double(n);
    }
  auto T = [&](int k, int j) { return tw[static_cast<std::size_t>(k + N) * n + j]; };
  auto lift = [](const Value& v) -> Coeff {
    if constexpr (std::is_same_v<Coeff, Complex>) {
      return Complex(v, 0.0);
    } else {
      return v.template cast<Complex>();
    }
  };
  const Coeff zero = zero_coeff<Coeff>();
  // pass over l (fastest axis)
  std::vector<Coeff> a(static_cast<std::size_t>(n) * n * w, zero);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k3 = -N; k3 <= N; ++k3) {
        Coeff s = zero;
        for (int l = 0; l < n; ++l) s += lift(g.values[g.index(i, j, l)]) * T(k3, l);
        a[(static_cast<std::size_t>(i) * n + j) * w + (k3 + N)] = s;
      }
  std::vector<Coeff> b(static_cast<std::size_t>(n) * w * w, zero);
  for (int i = 0; i < n; ++i)
    for (int k2 = -N; k2 <= N; ++k2)
      for (int k3 = -N; k3 <= N; ++k3) {
        Coeff s = zero;
        for (int j = 0; j < n; ++j) s += a[(static_cast<std::size_t>(i) * n + j) * w + (k3 + N)] * T(k2, j);
        b[(static_cast<std::size_t>(i) * w + (k2 + N)) * w + (k3 + N)] = s;
      }
  FourierSeries<Coeff> out(N);
  for (int k1 = -N; k1 <= N; ++k1)
    for (int k2 = -N; k2 <= N; ++k2)
      for (int k3 = -N; k3 <= N; ++k3) {
        Coeff s = zero;
        for (int i = 0; i < n; ++i) s += b[(static_cast<std::size_t>(i) * w + (k2 + N)) * w + (k3 + N)] * T(k1, i);
        out.at({k1, k2, k3}) = s;
      }
  return out;
}

}  // namespace detail

/// Recovers the coefficients |k|_inf <= N from grid samples. Requires n >= 2N+1
/// (exact for band-limited input); coarser grids are rejected as aliasing.
inline SpectralField analyze(const SampleGrid<Vec3>& g, int N) {
  return detail::analyze_impl<Vec3c>(g, N);
}

inline SpectralScalar analyze(const SampleGrid<double>& g, int N) {
  return detail::analyze_impl<Complex>(g, N);
}

// ------------------------------------------------------------------ operators

inline SpectralField curl_spec(const SpectralField& X) {
  SpectralField out(X.truncation());
  X.for_each([&](const Wavevector& k, const Vec3c& c) {
    out.at(k) = Complex(0.0, 1.0) * detail::cross_real_complex(angular(k), c);
  });
  return out;
}

inline SpectralScalar div_spec(const SpectralField& X) {
  SpectralScalar out(X.truncation());
  X.for_each([&](const Wavevector& k, const Vec3c& c) {
    const Vec3c K = angular(k).cast<Complex>();
    out.at(k) = Complex(0.0, 1.0) * (K.transpose() * c)(0);
  });
  return out;
}

inline SpectralField grad_spec(const SpectralScalar& f) {
  SpectralField out(f.truncation());
  f.for_each([&](const Wavevector& k, const Complex& c) {
    out.at(k) = (Complex(0.0, 1.0) * c) * angular(k).cast<Complex>();
  });
  return out;
}

/// Positive Laplacian: multiplies mode k by |2 pi k|^2.
template <class Coeff>
FourierSeries<Coeff> laplacian_spec(const FourierSeries<Coeff>& f) {
  FourierSeries<Coeff> out(f.truncation());
  f.for_each([&](const Wavevector& k, const Coeff& c) { out.at(k) = angular(k).squaredNorm() * c; });
  return out;
}

/// max_k |K . c_k|, scaled by nothing; zero for divergence-free fields.
inline double divergence_residual(const SpectralField& X) {
  double r = 0.0;
  X.for_each([&](const Wavevector& k, const Vec3c& c) {
    r = std::max(r, std::abs((angular(k).cast<Complex>().transpose() * c)(0)));
  });
  return r;
}

inline bool is_mean_free(const SpectralField& X) { return X.at({0, 0, 0}).norm() == 0.0; }

namespace detail {
inline void require_solenoidal_mean_free(const SpectralField& X, const char* who) {
  const double scale = std::max(1.0, X.max_abs()) * kTwoPi * std::max(1, X.truncation());
  if (X.at({0, 0, 0}).norm() > 1e-12 * std::max(1.0, X.max_abs())) {
    throw PreconditionError(std::string(who) + ": field has a non-zero mean (k = 0) component");
  }
  if (divergence_residual(X) > 1e-10 * scale) {
    throw PreconditionError(std::string(who) + ": field is not divergence-free");
  }
}
}  // namespace detail

/// Inverse curl on mean-free divergence-free fields: A_k = i (K x c_k) / |K|^2.
/// The result is itself mean-free and divergence-free, and curl_spec(result) == X.
inline SpectralField curl_inv_spec(const SpectralField& X) {
  detail::require_solenoidal_mean_free(X, "curl_inv_spec");
  SpectralField out(X.truncation());
  X.for_each([&](const Wavevector& k, const Vec3c& c) {
    if (is_zero(k)) return;
    const Vec3 K = angular(k);
    out.at(k) = (Complex(0.0, 1.0) / K.squaredNorm()) * detail::cross_real_complex(K, c);
  });
  return out;
}

/// L^2 inner product over the unit cube, Re sum_k a_k . conj(b_k).
template <class Coeff>
double l2_inner(const FourierSeries<Coeff>& a, const FourierSeries<Coeff>& b) {
  if (a.truncation() != b.truncation()) throw PreconditionError("truncations differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += detail::coeff_dot(a.coefficients()[i], b.coefficients()[i]);
  }
  return s;
}

template <class Coeff>
double l2_norm(const FourierSeries<Coeff>& a) {
  return std::sqrt(std::max(0.0, l2_inner(a, a)));
}

/// H(X) = <X, curl^{-1} X>_{L^2}.
inline double helicity(const SpectralField& X) { return l2_inner(X, curl_inv_spec(X)); }

/// g(v, X) for a constant vector v.
inline SpectralScalar dot(const Vec3& v, const SpectralField& X) {
  SpectralScalar out(X.truncation());
  const Vec3c vc = v.cast<Complex>();
  X.for_each([&](const Wavevector& k, const Vec3c& c) { out.at(k) = (vc.transpose() * c)(0); });
  return out;
}

/// v x X for a constant vector v.
inline SpectralField cross(const Vec3& v, const SpectralField& X) {
  SpectralField out(X.truncation());
  X.for_each([&](const Wavevector& k, const Vec3c& c) { out.at(k) = detail::cross_real_complex(v, c); });
  return out;
}

/// f v for a constant vector v.
inline SpectralField times(const SpectralScalar& f, const Vec3& v) {
  SpectralField out(f.truncation());
  const Vec3c vc = v.cast<Complex>();
  f.for_each([&](const Wavevector& k, const Complex& c) { out.at(k) = c * vc; });
  return out;
}

/// (v . nabla) X for a constant vector v; vanishes iff X is invariant under translation by v.
inline SpectralField directional_derivative(const Vec3& v, const SpectralField& X) {
  SpectralField out(X.truncation());
  X.for_each([&](const Wavevector& k, const Vec3c& c) {
    out.at(k) = Complex(0.0, angular(k).dot(v)) * c;
  });
  return out;
}

/// The real field X + R(X) with R(X)_k = conj(X_{-k}); the projection onto real fields
/// up to the factor 2.
template <class Coeff>
FourierSeries<Coeff> hermitian_part(const FourierSeries<Coeff>& X) {
  FourierSeries<Coeff> out(X.truncation());
  X.for_each([&](const Wavevector& k, const Coeff& c) {
    out.at(k) = 0.5 * (c + detail::coeff_conj(X.at(negate(k))));
  });
  return out;
}

}  // namespace beltrami
