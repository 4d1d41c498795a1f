#pragma once

// Shared helpers for the test suites: deterministic random fields and
// independent reference computations.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "beltrami/field.hpp"
#include "beltrami/spectral.hpp"

namespace testing_support {

using namespace beltrami;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  Vec3 point(double a = 0.0, double b = 1.0) {
    const double x = uniform(a, b);
    const double y = uniform(a, b);
    const double z = uniform(a, b);
    return {x, y, z};
  }

 private:
  std::mt19937_64 gen_;
};

/// Real band-limited vector field with decaying random coefficients on every mode |k|_inf <= N.
inline SpectralField random_field(int N, Rng& rng, bool solenoidal = false) {
  SpectralField X(N);
  X.for_each_mutable([&](const Wavevector& k, Vec3c& c) {
    const double decay = 1.0 / (1.0 + norm_squared(k));
    for (int i = 0; i < 3; ++i) c[i] = decay * Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
    if (solenoidal && !is_zero(k)) {
      const Vec3c K = angular(k).normalized().cast<Complex>();
      c -= K * (K.transpose() * c)(0);
    }
  });
  X = hermitian_part(X);
  if (solenoidal) X.at({0, 0, 0}) = Vec3c::Zero();
  return X;
}

/// Smooth chart field: affine plus quadratic terms with random coefficients.
inline VectorField random_polynomial_field(Rng& rng) {
  Vec3 a = rng.point(-1, 1);
  Mat3 B;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) B(i, j) = rng.uniform(-1, 1);
  std::array<Mat3, 3> Q;
  for (auto& q : Q)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) q(i, j) = rng.uniform(-0.5, 0.5);
  return analytic_vector_field([a, B, Q](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    Eigen::Matrix<T, 3, 1> v;
    for (int i = 0; i < 3; ++i) {
      T s = T(a[i]);
      for (int j = 0; j < 3; ++j) {
        s += B(i, j) * x[j];
        for (int k = 0; k < 3; ++k) s += Q[i](j, k) * x[j] * x[k];
      }
      v[i] = s;
    }
    return v;
  });
}

/// Trapezoidal quadrature of a periodic function on the unit cube with n^3 points;
/// exact for trigonometric polynomials of degree < n.
template <class F>
double periodic_quadrature(F&& f, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) s += f(Vec3(i, j, l) / n);
  return s / (static_cast<double>(n) * n * n);
}

}  // namespace testing_support
