#pragma once

#include <array>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace beltrami {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Complex = std::complex<double>;
using Vec3c = Eigen::Vector3cd;

/// Integer wavevector / lattice index. std::array gives lexicographic ordering for free.
using Wavevector = std::array<int, 3>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation point outside a chart, non-finite input, or a stencil that left the domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class AliasingError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class UnsupportedDirection : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class DegenerateScalar : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class UnknownEntry : public Error {
 public:
  using Error::Error;
};

/// A mathematically meaningful negative result: the hypothesis of an existence
/// statement fails for the given input. Not an operational failure.
class HypothesisFailure : public Error {
 public:
  using Error::Error;
};

class NoSymmetricFields : public HypothesisFailure {
 public:
  using HypothesisFailure::HypothesisFailure;
};

class NoFirstIntegral : public HypothesisFailure {
 public:
  using HypothesisFailure::HypothesisFailure;
};

class NotBeltramiKilling : public HypothesisFailure {
 public:
  using HypothesisFailure::HypothesisFailure;
};

class StalledAtZero : public Error {
 public:
  StalledAtZero(const std::string& what, const Vec3& where)
      : Error(what), location_(where) {}
  const Vec3& location() const noexcept { return location_; }

 private:
  Vec3 location_;
};

inline Wavevector negate(const Wavevector& k) { return {-k[0], -k[1], -k[2]}; }

inline int norm_squared(const Wavevector& k) {
  return k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
}

inline bool is_zero(const Wavevector& k) { return k[0] == 0 && k[1] == 0 && k[2] == 0; }

/// Angular wavevector 2*pi*k for unit periods.
inline Vec3 angular(const Wavevector& k) {
  return kTwoPi * Vec3(k[0], k[1], k[2]);
}

}  // namespace beltrami
