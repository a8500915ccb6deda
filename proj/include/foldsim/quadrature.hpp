#pragma once

#include "foldsim/types.hpp"

#include <vector>

namespace foldsim {

struct QuadPoint {
  Point2 xi;  // reference coordinates
  double weight;
};

using QuadRule = std::vector<QuadPoint>;

struct LinePoint {
  double s;  // parameter in [0, 1]
  double weight;
};

using LineRule = std::vector<LinePoint>;

/// Maximum polynomial degree for which triangle_rule() is available.
inline constexpr int kMaxQuadratureDegree = 40;

/// Gauss-Legendre rule with n points on [0, 1].
LineRule gauss_legendre(int n);

/// Rule on the reference triangle {(0,0), (1,0), (0,1)} that integrates
/// polynomials of total degree <= degree exactly. Weights are positive and sum
/// to 1/2. Collapsed (Duffy) tensor Gauss rule.
/// Throws InvalidInput for degree < 0 or degree > kMaxQuadratureDegree.
const QuadRule& triangle_rule(int degree);

/// triangle_rule(degree) repeated on the 4^levels congruent sub-triangles of a
/// uniform red refinement of the reference triangle.
QuadRule subdivided_triangle_rule(int degree, int levels);

}  // namespace foldsim
