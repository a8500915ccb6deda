#include "foldsim/quadrature.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <utility>

namespace foldsim {

namespace {

// (P_n(x), P_{n-1}(x)) by the three-term recurrence.
std::pair<double, double> legendre_pair(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, p0};
}

}  // namespace

LineRule gauss_legendre(int n) {
  if (n < 1) throw InvalidInput("gauss_legendre: need at least one point");
  LineRule rule(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [pn, pm] = legendre_pair(n, x);
      const double dp = n * (x * pn - pm) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto [pn, pm] = legendre_pair(n, x);
    const double dp = n * (x * pn - pm) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // [-1, 1] -> [0, 1]
    rule[static_cast<std::size_t>(i)] = {0.5 * (1.0 - x), 0.5 * w};
    rule[static_cast<std::size_t>(n - 1 - i)] = {0.5 * (1.0 + x), 0.5 * w};
  }
  if (n % 2 == 1) rule[static_cast<std::size_t>(n / 2)].s = 0.5;
  return rule;
}

namespace {

QuadRule build_triangle_rule(int degree) {
  // x = u, y = v (1 - u), dx dy = (1 - u) du dv. The u-integrand has degree
  // degree + 1, the v-integrand degree.
  const int nu = (degree + 2) / 2 + 1;
  const int nv = (degree + 1) / 2 + 1;
  const LineRule gu = gauss_legendre(nu);
  const LineRule gv = gauss_legendre(nv);
  QuadRule rule;
  rule.reserve(gu.size() * gv.size());
  for (const auto& a : gu) {
    for (const auto& b : gv) {
      rule.push_back({Point2(a.s, b.s * (1.0 - a.s)), a.weight * b.weight * (1.0 - a.s)});
    }
  }
  return rule;
}

}  // namespace

const QuadRule& triangle_rule(int degree) {
  if (degree < 0 || degree > kMaxQuadratureDegree) {
    throw InvalidInput("triangle_rule: unsupported degree " + std::to_string(degree));
  }
  static std::array<QuadRule, kMaxQuadratureDegree + 1> cache;
  static std::array<std::once_flag, kMaxQuadratureDegree + 1> flags;
  const auto d = static_cast<std::size_t>(degree);
  std::call_once(flags[d], [&] { cache[d] = build_triangle_rule(degree); });
  return cache[d];
}

QuadRule subdivided_triangle_rule(int degree, int levels) {
  const QuadRule& base = triangle_rule(degree);
  // each sub-triangle: (origin, e1, e2) in reference coordinates
  struct Sub {
    Point2 o, a, b;
  };
  std::vector<Sub> subs{{Point2(0, 0), Point2(1, 0), Point2(0, 1)}};
  for (int l = 0; l < levels; ++l) {
    std::vector<Sub> next;
    next.reserve(subs.size() * 4);
    for (const auto& s : subs) {
      const Point2 p0 = s.o, p1 = s.o + s.a, p2 = s.o + s.b;
      const Point2 m01 = 0.5 * (p0 + p1), m12 = 0.5 * (p1 + p2), m02 = 0.5 * (p0 + p2);
      next.push_back({p0, m01 - p0, m02 - p0});
      next.push_back({m01, p1 - m01, m12 - m01});
      next.push_back({m02, m12 - m02, p2 - m02});
      next.push_back({m12, m02 - m12, m01 - m12});
    }
    subs = std::move(next);
  }
  QuadRule rule;
  rule.reserve(subs.size() * base.size());
  for (const auto& s : subs) {
    const double det = std::abs(s.a.x() * s.b.y() - s.a.y() * s.b.x());
    for (const auto& q : base) {
      rule.push_back({s.o + q.xi.x() * s.a + q.xi.y() * s.b, q.weight * det});
    }
  }
  return rule;
}

}  // namespace foldsim
