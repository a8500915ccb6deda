#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>

namespace foldsim {

/// Second-order forward-mode number: value, gradient and Hessian with respect
/// to N independent variables.
template <int N>
struct Dual2 {
  using Grad = Eigen::Matrix<double, N, 1>;
  using Hess = Eigen::Matrix<double, N, N>;

  double v = 0.0;
  Grad g = Grad::Zero();
  Hess h = Hess::Zero();

  Dual2() = default;
  Dual2(double value) : v(value) {}  // NOLINT(google-explicit-constructor)

  static Dual2 variable(double value, int i) {
    Dual2 d(value);
    d.g[i] = 1.0;
    return d;
  }

  Dual2& operator+=(const Dual2& o) {
    v += o.v;
    g += o.g;
    h += o.h;
    return *this;
  }
  Dual2& operator-=(const Dual2& o) {
    v -= o.v;
    g -= o.g;
    h -= o.h;
    return *this;
  }
  Dual2& operator*=(double s) {
    v *= s;
    g *= s;
    h *= s;
    return *this;
  }
};

template <int N>
Dual2<N> operator-(Dual2<N> a) {
  a *= -1.0;
  return a;
}
template <int N>
Dual2<N> operator+(Dual2<N> a, const Dual2<N>& b) {
  a += b;
  return a;
}
template <int N>
Dual2<N> operator-(Dual2<N> a, const Dual2<N>& b) {
  a -= b;
  return a;
}
template <int N>
Dual2<N> operator*(Dual2<N> a, double s) {
  a *= s;
  return a;
}
template <int N>
Dual2<N> operator*(double s, Dual2<N> a) {
  a *= s;
  return a;
}

template <int N>
Dual2<N> operator*(const Dual2<N>& a, const Dual2<N>& b) {
  Dual2<N> r;
  r.v = a.v * b.v;
  r.g = a.v * b.g + b.v * a.g;
  r.h = a.v * b.h + b.v * a.h + a.g * b.g.transpose() + b.g * a.g.transpose();
  return r;
}

/// f(a) from f(a.v), f'(a.v), f''(a.v).
template <int N>
Dual2<N> chain(const Dual2<N>& a, double f, double df, double d2f) {
  Dual2<N> r;
  r.v = f;
  r.g = df * a.g;
  r.h = df * a.h + d2f * a.g * a.g.transpose();
  return r;
}

template <int N>
Dual2<N> inverse(const Dual2<N>& a) {
  const double i = 1.0 / a.v;
  return chain(a, i, -i * i, 2.0 * i * i * i);
}

template <int N>
Dual2<N> operator/(const Dual2<N>& a, const Dual2<N>& b) {
  return a * inverse(b);
}

template <int N>
Dual2<N> sqrt(const Dual2<N>& a) {
  const double s = std::sqrt(a.v);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

/// acos with the argument clamped to [-1, 1]; derivatives are taken at the
/// clamped value and are infinite at the end points.
template <int N>
Dual2<N> acos(const Dual2<N>& a) {
  const double x = std::clamp(a.v, -1.0, 1.0);
  const double w = 1.0 - x * x;
  const double d = -1.0 / std::sqrt(w);
  return chain(a, std::acos(x), d, d * x / w);
}

template <int N>
Dual2<N> atan2(const Dual2<N>& y, const Dual2<N>& x) {
  const double r2 = x.v * x.v + y.v * y.v;
  const double fx = -y.v / r2, fy = x.v / r2;
  const double fxx = 2.0 * x.v * y.v / (r2 * r2);
  const double fxy = (y.v * y.v - x.v * x.v) / (r2 * r2);
  Dual2<N> r;
  r.v = std::atan2(y.v, x.v);
  r.g = fx * x.g + fy * y.g;
  r.h = fx * x.h + fy * y.h + fxx * x.g * x.g.transpose() - fxx * y.g * y.g.transpose() +
        fxy * (x.g * y.g.transpose() + y.g * x.g.transpose());
  return r;
}

template <int N>
using Dual2Vec3 = std::array<Dual2<N>, 3>;

template <int N>
Dual2<N> dot(const Dual2Vec3<N>& a, const Dual2Vec3<N>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <int N>
Dual2Vec3<N> cross(const Dual2Vec3<N>& a, const Dual2Vec3<N>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

}  // namespace foldsim
