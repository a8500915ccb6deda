#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace foldsim {

using Point2 = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;

inline constexpr double kPi = 3.14159265358979323846;

/// Raised when the input (mesh, parameters, file) violates a precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when the deformation is singular at some evaluation point, e.g. the
/// tangent vectors of the deformed surface are parallel.
class SingularConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a sparse factorization fails.
class SingularMatrix : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Symmetric 2x2 tensors are stored as (xx, xy, yy). The Frobenius inner
// product then carries the weights (1, 2, 1).
inline constexpr double kSymWeight[3] = {1.0, 2.0, 1.0};

inline Mat2 sym_from(const Eigen::Vector3d& c) {
  Mat2 m;
  m << c[0], c[1], c[1], c[2];
  return m;
}

inline Eigen::Vector3d sym_to(const Mat2& m) {
  return {m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), m(1, 1)};
}

}  // namespace foldsim
