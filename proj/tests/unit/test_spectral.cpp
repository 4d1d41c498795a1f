#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>

#include "beltrami/jacobi.hpp"
#include "beltrami/spectral.hpp"
#include "beltrami/symmetric.hpp"
#include "support.hpp"

using namespace beltrami;
using testing_support::Rng;

namespace {

/// X = (0, -2 pi sin 2 pi x, -2 pi cos 2 pi x), the curl eigenfield built from cos 2 pi x.
SpectralField two_and_half_d(int N = 2) {
  SpectralField X(N);
  // -2 pi sin = coefficient (+- i pi) ; -2 pi cos = coefficient -pi at both +-k
  X.at({1, 0, 0}) = Vec3c(0.0, Complex(0.0, kPi), -kPi);
  X.at({-1, 0, 0}) = Vec3c(0.0, Complex(0.0, -kPi), -kPi);
  return X;
}

double brute_force_value(const SpectralScalar& f, const Vec3& p) {
  Complex s = 0.0;
  f.for_each([&](const Wavevector& k, const Complex& c) {
    s += c * std::exp(Complex(0.0, kTwoPi * (k[0] * p[0] + k[1] * p[1] + k[2] * p[2])));
  });
  return s.real();
}

}  // namespace

TEST(FourierSeries, IndexRoundTrip) {
  SpectralScalar f(3);
  EXPECT_EQ(f.size(), 343u);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(f.index(f.wavevector(i)), i);
  EXPECT_TRUE(f.contains({3, -3, 0}));
  EXPECT_FALSE(f.contains({4, 0, 0}));
}

TEST(FourierSeries, SynthesisMatchesDirectSum) {
  Rng rng(11);
  SpectralScalar f(3);
  f.for_each_mutable([&](const Wavevector&, Complex& c) { c = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1)); });
  f = hermitian_part(f);
  for (int i = 0; i < 5; ++i) {
    const Vec3 p = rng.point();
    EXPECT_NEAR(synthesize(f, p), brute_force_value(f, p), 1e-12);
  }
}

TEST(FourierSeries, SampleAnalyzeRoundTrip) {
  Rng rng(5);
  const SpectralField X = testing_support::random_field(3, rng);
  const SpectralField back = analyze(sample(X, 8), 3);
  EXPECT_LT((back - X).max_abs(), 1e-14);
  EXPECT_THROW(analyze(sample(X, 6), 3), AliasingError);
}

TEST(FourierSeries, EvaluatorDerivativeMatchesDifferences) {
  Rng rng(8);
  const SpectralField X = testing_support::random_field(2, rng);
  const VectorField F = to_vector_field(X);
  const Vec3 p(0.3, 0.6, 0.1);
  Mat3 fd;
  const double h = 1e-6;
  for (int j = 0; j < 3; ++j) fd.col(j) = (F.value(p + h * Vec3::Unit(j)) - F.value(p - h * Vec3::Unit(j))) / (2 * h);
  EXPECT_LT((F.jacobian(p) - fd).norm(), 1e-6);
}

TEST(SpectralCurl, SingleModeHandOracle) {
  // curl(cos(2 pi x) e2) = -2 pi sin(2 pi x) e3
  SpectralField X(1);
  X.at({1, 0, 0}) = Vec3c(0.0, 0.5, 0.0);
  X.at({-1, 0, 0}) = Vec3c(0.0, 0.5, 0.0);
  const SpectralField C = curl_spec(X);
  for (double x : {0.1, 0.25, 0.7}) {
    const Vec3 v = synthesize(C, Vec3(x, 0.3, 0.9));
    EXPECT_NEAR((v - Vec3(0, 0, -kTwoPi * std::sin(kTwoPi * x))).norm(), 0.0, 1e-13);
  }
}

TEST(SpectralCurl, TwoAndHalfDimensionalFieldIsEigenfield) {
  const SpectralField X = two_and_half_d();
  EXPECT_LT((curl_spec(X) - kTwoPi * X).max_abs(), 1e-15);
  EXPECT_EQ(divergence_residual(X), 0.0);
  const Vec3 v = synthesize(X, Vec3(0.25, 0.4, 0.1));
  EXPECT_NEAR((v - Vec3(0, -kTwoPi, 0)).norm(), 0.0, 1e-13);
}

TEST(SpectralCurl, InverseCurlRoundTripsOnSolenoidalFields) {
  Rng rng(2);
  const SpectralField X = testing_support::random_field(4, rng, true);
  EXPECT_LT(divergence_residual(X), 1e-13);
  EXPECT_LT((curl_spec(curl_inv_spec(X)) - X).max_abs(), 1e-14);
  EXPECT_LT(div_spec(curl_spec(X)).max_abs(), 1e-13);
}

TEST(SpectralCurl, InverseCurlRejectsInvalidInput) {
  Rng rng(4);
  EXPECT_THROW(curl_inv_spec(testing_support::random_field(2, rng)), PreconditionError);
  SpectralField mean(1);
  mean.at({0, 0, 0}) = Vec3c(1.0, 0.0, 0.0);
  EXPECT_THROW(curl_inv_spec(mean), PreconditionError);
}

TEST(SpectralGrad, LaplacianIsPositive) {
  SpectralScalar f(1);
  f.at({1, 0, 0}) = 0.5;
  f.at({-1, 0, 0}) = 0.5;
  EXPECT_LT((laplacian_spec(f) - (4 * kPi * kPi) * f).max_abs(), 1e-13);
  EXPECT_LT((div_spec(grad_spec(f)) + laplacian_spec(f)).max_abs(), 1e-13);
}

TEST(Helicity, GoldenValueAndQuadratureOracle) {
  const SpectralField X = two_and_half_d();
  EXPECT_NEAR(helicity(X), kTwoPi, 1e-12);
  EXPECT_NEAR(l2_inner(X, X), 4 * kPi * kPi, 1e-11);
  Rng rng(9);
  const SpectralField R = testing_support::random_field(3, rng, true);
  const SpectralField A = curl_inv_spec(R);
  const double quad = testing_support::periodic_quadrature(
      [&](const Vec3& p) { return synthesize(R, p).dot(synthesize(A, p)); }, 8);
  EXPECT_NEAR(helicity(R), quad, 1e-12 * std::max(1.0, std::abs(quad)));
}

TEST(Jacobi, MatchesReferenceSolver) {
  Rng rng(21);
  const int n = 12;
  Eigen::MatrixXcd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
  A = (A + A.adjoint()).eval();
  const HermitianEigen e = jacobi_eigen(A);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ref(A);
  Eigen::VectorXd expected = ref.eigenvalues().reverse();
  EXPECT_LT((e.values - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((A * e.vectors - e.vectors * e.values.asDiagonal()).norm(), 1e-12);
  EXPECT_LT((e.vectors.adjoint() * e.vectors - Eigen::MatrixXcd::Identity(n, n)).norm(), 1e-12);
  for (int i = 1; i < n; ++i) EXPECT_GE(e.values[i - 1], e.values[i]);
}

TEST(Jacobi, BitwiseReproducible) {
  Rng rng(22);
  Eigen::MatrixXcd A(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) A(i, j) = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
  A = (A + A.adjoint()).eval();
  const HermitianEigen a = jacobi_eigen(A), b = jacobi_eigen(A);
  EXPECT_TRUE((a.values.array() == b.values.array()).all());
  EXPECT_TRUE((a.vectors.array() == b.vectors.array()).all());
}

TEST(Jacobi, BlockDiagonalInputKeepsBlocksSeparate) {
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(4, 4);
  A(0, 1) = Complex(0, 1);
  A(1, 0) = Complex(0, -1);
  A(2, 3) = Complex(0, 1);
  A(3, 2) = Complex(0, -1);
  const HermitianEigen e = jacobi_eigen(A);
  for (int c = 0; c < 4; ++c) {
    const bool first = e.vectors.col(c).head(2).norm() > 0.5;
    EXPECT_EQ(first ? e.vectors.col(c).tail(2).norm() : e.vectors.col(c).head(2).norm(), 0.0);
  }
}

TEST(Jacobi, RejectsInvalidInput) {
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(2, 2);
  A(0, 1) = 1.0;
  EXPECT_THROW(jacobi_eigen(A), PreconditionError);
  EXPECT_THROW(jacobi_eigen(Eigen::MatrixXcd(2, 3)), PreconditionError);
  EXPECT_THROW(jacobi_eigen(Eigen::MatrixXcd(0, 0)), PreconditionError);
}

TEST(SymmetricMask, AxisCountsAndBruteForceOracle) {
  for (int N : {1, 2, 4}) {
    EXPECT_EQ(symmetric_mask(Direction::axis(2), N).admitted.size(), static_cast<std::size_t>((2 * N + 1) * (2 * N + 1) - 1));
  }
  const int N = 5;
  std::size_t count = 0;
  for (int a = -N; a <= N; ++a)
    for (int b = -N; b <= N; ++b)
      for (int c = -N; c <= N; ++c)
        if ((a || b || c) && a + 2 * b == 0) ++count;
  EXPECT_EQ(symmetric_mask(Direction::integer(1, 2, 0), N).admitted.size(), count);
}

TEST(SymmetricMask, ProjectionIsIdempotentAndCommutesWithTranslation) {
  Rng rng(13);
  const SymmetricSubspace sub = symmetric_mask(Direction::integer(1, 1, 0), 3);
  const SpectralField X = testing_support::random_field(3, rng, true);
  const SpectralField P = project_symmetric(X, sub);
  EXPECT_EQ(project_symmetric(P, sub), P);
  EXPECT_LT(directional_derivative(Vec3(1, 1, 0), P).max_abs(), 1e-13);
  EXPECT_GT(directional_derivative(Vec3(1, 1, 0), X).max_abs(), 1e-3);
}

TEST(Polarization, OrthonormalRightHanded) {
  for (const Wavevector& k : {Wavevector{1, 0, 0}, Wavevector{0, 2, -1}, Wavevector{3, 1, 4}}) {
    const auto b = polarization_basis(k);
    const Vec3 kh = Vec3(k[0], k[1], k[2]).normalized();
    EXPECT_NEAR(b[0].norm(), 1.0, 1e-15);
    EXPECT_NEAR(b[0].dot(kh), 0.0, 1e-15);
    EXPECT_NEAR((b[0].cross(b[1]) - kh).norm(), 0.0, 1e-15);
  }
  EXPECT_THROW(polarization_basis({0, 0, 0}), PreconditionError);
}

TEST(Operator, SpectrumIsPlusMinusInverseWavenumber) {
  const SymmetricSubspace sub = symmetric_mask(Direction::axis(2), 2);
  const OperatorMatrix op = assemble_pi_curlinv(sub);
  EXPECT_LT(hermitian_residual(op.matrix), 1e-15);
  std::vector<double> expected;
  for (const auto& k : sub.admitted) {
    const double K = angular(k).norm();
    expected.push_back(1.0 / K);
    expected.push_back(-1.0 / K);
  }
  std::sort(expected.rbegin(), expected.rend());
  const OperatorSpectrum s = operator_spectrum(op);
  ASSERT_EQ(static_cast<std::size_t>(s.eigen.values.size()), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(s.eigen.values[i], expected[i], 1e-13);
}

TEST(Operator, TopEigenfieldIsRealBeltrami) {
  const OperatorMatrix op = assemble_pi_curlinv(symmetric_mask(Direction::axis(0), 3));
  const TopEigenpair top = top_eigenpair(op);
  EXPECT_NEAR(std::abs(top.mu), 1.0 / kTwoPi, 1e-13);
  EXPECT_GT(top.mu, 0.0);
  EXPECT_LT(top.X.hermitian_residual(), 1e-15);
  EXPECT_NEAR(l2_norm(top.X), 1.0, 1e-13);
  EXPECT_LT((curl_spec(top.X) - (1.0 / top.mu) * top.X).abs_sum(), 1e-12);
  EXPECT_LT(directional_derivative(Vec3::UnitX(), top.X).max_abs(), 1e-15);
}

TEST(Operator, EmptySubspaceIsAHypothesisFailure) {
  EXPECT_THROW(assemble_pi_curlinv(symmetric_mask(Direction::irrational(), 3)), NoSymmetricFields);
}
