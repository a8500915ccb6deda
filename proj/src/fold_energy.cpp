#include "foldsim/fold_energy.hpp"

#include "foldsim/hyperdual.hpp"

#include <cmath>
#include <thread>

namespace foldsim {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

constexpr double kDegenerateNormal = 1e-12;

Mat32 identity_gradient() {
  Mat32 g;
  g << 1, 0, 0, 1, 0, 0;
  return g;
}

// Bulk variables per point: G (6, index 2i+a), D^2 v_i (9, index 6+3i+c), m (3, index 15+c).
constexpr int kG = 0;
constexpr int kH = 6;
constexpr int kM = 15;
constexpr int kBulk = 18;

// Edge variables: G- (6), G+ (6), m_nn (1).
constexpr int kEdge = 13;

using D6 = Dual2<6>;
using D12 = Dual2<12>;

template <int N>
Dual2Vec3<N> unit(const Dual2Vec3<N>& c) {
  const Dual2<N> len = sqrt(dot(c, c));
  if (!(len.v > kDegenerateNormal)) {
    throw SingularConfiguration("degenerate tangent plane: |dx v x dy v| <= 1e-12");
  }
  const Dual2<N> inv = inverse(len);
  return {c[0] * inv, c[1] * inv, c[2] * inv};
}

struct PointKernel {
  double value = 0.0;
  Eigen::Matrix<double, kBulk, 1> grad;
  Eigen::Matrix<double, kBulk, kBulk> hess;
};

// Gu = grad v - [e1 e2] (displacement gradient); the isometry defect
// Gu + Gu^T + Gu^T Gu is then free of cancellation.
PointKernel bulk_kernel(const Mat32& Gu, const std::array<Eigen::Vector3d, 3>& Hv,
                        const Eigen::Vector3d& m, const ScenarioParams& p, double beta) {
  PointKernel k;
  k.grad.setZero();
  k.hess.setZero();
  std::array<std::array<D6, 2>, 3> u;
  for (int i = 0; i < 3; ++i) {
    for (int a = 0; a < 2; ++a) u[idx(i)][idx(a)] = D6::variable(Gu(i, a), 2 * i + a);
  }
  if (p.isometry) {
    D6 P;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        D6 c = u[idx(a)][idx(b)] + u[idx(b)][idx(a)] + u[0][idx(a)] * u[0][idx(b)] +
               u[1][idx(a)] * u[1][idx(b)] + u[2][idx(a)] * u[2][idx(b)];
        P += c * c;
      }
    }
    P *= p.alpha * beta;
    k.value += P.v;
    k.grad.segment<6>(kG) += P.g;
    k.hess.block<6, 6>(kG, kG) += P.h;
  }
  if (p.moment) {
    for (int c = 0; c < 3; ++c) {
      const double w = kSymWeight[c];
      k.value -= (6.0 / p.E) * w * m[c] * m[c];
      k.grad[kM + c] -= (12.0 / p.E) * w * m[c];
      k.hess(kM + c, kM + c) -= (12.0 / p.E) * w;
    }
  }
  if (p.coupling) {
    const Dual2Vec3<6> n = unit<6>(cross<6>({D6(1.0) + u[0][0], u[1][0], u[2][0]}, {u[0][1], D6(1.0) + u[1][1], u[2][1]}));
    for (int i = 0; i < 3; ++i) {
      const D6& ni = n[idx(i)];
      double s = 0.0;
      for (int c = 0; c < 3; ++c) s += kSymWeight[c] * Hv[idx(i)][c] * m[c];
      k.value -= ni.v * s;
      k.grad.segment<6>(kG) -= s * ni.g;
      k.hess.block<6, 6>(kG, kG) -= s * ni.h;
      for (int c = 0; c < 3; ++c) {
        const double w = kSymWeight[c];
        k.grad[kH + 3 * i + c] -= ni.v * w * m[c];
        k.grad[kM + c] -= ni.v * w * Hv[idx(i)][c];
        k.hess.block<6, 1>(kG, kH + 3 * i + c) -= w * m[c] * ni.g;
        k.hess.block<6, 1>(kG, kM + c) -= w * Hv[idx(i)][c] * ni.g;
        k.hess(kH + 3 * i + c, kM + c) -= ni.v * w;
      }
    }
    // mirror the upper blocks
    k.hess.block<kBulk - 6, 6>(6, 0) = k.hess.block<6, kBulk - 6>(0, 6).transpose();
    k.hess.block<3, 9>(kM, kH) = k.hess.block<9, 3>(kH, kM).transpose();
  }
  return k;
}

D12 hinge_angle(const Dual2Vec3<12>& nm, const Dual2Vec3<12>& np, const Dual2Vec3<12>& t,
                AngleMode mode) {
  if (mode == AngleMode::Unsigned) return acos(dot(nm, np));
  return atan2(dot(cross(nm, np), t), dot(nm, np));
}

struct Accumulator {
  double value = 0.0;
  Eigen::VectorXd residual;
  std::vector<Eigen::Triplet<double>> triplets;

  void scatter(const std::vector<int>& dofs, const Eigen::VectorXd& r, const Eigen::MatrixXd* K) {
    for (std::size_t a = 0; a < dofs.size(); ++a) {
      if (dofs[a] < 0) continue;
      residual[dofs[a]] += r[static_cast<Eigen::Index>(a)];
      if (!K) continue;
      for (std::size_t b = 0; b < dofs.size(); ++b) {
        if (dofs[b] < 0) continue;
        const double v = (*K)(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        if (v != 0.0) triplets.emplace_back(dofs[a], dofs[b], v);
      }
    }
  }
};

class Assembler {
 public:
  Assembler(const FoldProblem& p, const State& s, const ScenarioParams& params, bool jac)
      : p_(p), s_(s), params_(params), jac_(jac) {}

  void element(int t, Accumulator& acc) const {
    const auto& vd = p_.lagrange().element_dofs(t);
    const auto& md = p_.hhj().element_dofs(t);
    const int nL = static_cast<int>(vd.size());
    const int nH = static_cast<int>(md.size());
    const int n = 3 * nL + nH;
    std::vector<int> dofs(idx(n));
    Eigen::VectorXd xl(n), ul(3 * nL), Xl(3 * nL);
    for (int A = 0; A < nL; ++A) {
      for (int i = 0; i < 3; ++i) {
        const int g = 3 * vd[idx(A)] + i;
        dofs[idx(3 * A + i)] = g;
        xl[3 * A + i] = s_.v[g];
        ul[3 * A + i] = s_.v[g] - p_.reference()[g];
        Xl[3 * A + i] = p_.reference()[g];
      }
    }
    const bool exact = p_.identity_exact(t);
    for (int B = 0; B < nH; ++B) {
      dofs[idx(3 * nL + B)] = md[idx(B)] < 0 ? -1 : p_.num_v() + md[idx(B)];
      xl[3 * nL + B] = md[idx(B)] < 0 ? 0.0 : s_.m[md[idx(B)]];
    }
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd K;
    if (jac_) K = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd Bm(kBulk, n);
    const Vec3 f = params_.force(s_.t);
    const int degree = element_quadrature_degree(p_.mesh(), t, p_.k());
    for (const auto& q : triangle_rule(degree)) {
      const MappedPoint mp = map_point(p_.mesh(), t, q.xi);
      const LagrangeValues L = p_.lagrange().evaluate(t, mp, q.xi);
      const Eigen::MatrixX3d Hb = p_.hhj().evaluate(t, mp, q.xi);
      const double w = q.weight * mp.det;
      Bm.setZero();
      Mat32 Gu = Mat32::Zero();
      if (!exact) Gu = -identity_gradient();
      std::array<Eigen::Vector3d, 3> Hv{Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
      Eigen::Vector3d m = Eigen::Vector3d::Zero();
      Vec3 v = Vec3::Zero();
      for (int A = 0; A < nL; ++A) {
        for (int i = 0; i < 3; ++i) {
          const double c = xl[3 * A + i];
          const int col = 3 * A + i;
          for (int a = 0; a < 2; ++a) {
            Bm(kG + 2 * i + a, col) = L.grad(A, a);
            Gu(i, a) += ul[col] * L.grad(A, a);
            if (!exact) Gu(i, a) += Xl[col] * L.grad(A, a);
          }
          for (int h = 0; h < 3; ++h) {
            Bm(kH + 3 * i + h, col) = L.hess(A, h);
            Hv[idx(i)][h] += c * L.hess(A, h);
          }
          v[i] += c * L.phi[A];
        }
      }
      for (int B = 0; B < nH; ++B) {
        for (int c = 0; c < 3; ++c) {
          Bm(kM + c, 3 * nL + B) = Hb(B, c);
          m[c] += xl[3 * nL + B] * Hb(B, c);
        }
      }
      const PointKernel k = bulk_kernel(Gu, Hv, m, params_, s_.beta);
      double value = k.value;
      r += w * (Bm.transpose() * k.grad);
      if (params_.external) {
        value -= f.dot(v);
        for (int A = 0; A < nL; ++A) {
          for (int i = 0; i < 3; ++i) r[3 * A + i] -= w * f[i] * L.phi[A];
        }
      }
      acc.value += w * value;
      if (jac_) K.noalias() += w * (Bm.transpose() * (k.hess * Bm));
    }
    acc.scatter(dofs, r, jac_ ? &K : nullptr);
  }

  // Hinge term on an interior edge, or (mirror) on the symmetry line where the
  // neighbour is the reflection v -> S v(x, -y), S = diag(1, -1, 1).
  void hinge(int e, bool mirror, Accumulator& acc) const {
    const Mesh& mesh = p_.mesh();
    const Edge& edge = mesh.edge(e);
    const int t0 = edge.tri[0];
    const int t1 = mirror ? t0 : edge.tri[1];
    const auto& vd0 = p_.lagrange().element_dofs(t0);
    const auto& vd1 = p_.lagrange().element_dofs(t1);
    const auto& md = p_.hhj().element_dofs(t0);
    const int nL = static_cast<int>(vd0.size());
    const int nH = static_cast<int>(md.size());
    const int n = 6 * nL + nH;
    std::vector<int> dofs(idx(n));
    for (int A = 0; A < nL; ++A) {
      for (int i = 0; i < 3; ++i) {
        dofs[idx(3 * A + i)] = 3 * vd0[idx(A)] + i;
        dofs[idx(3 * nL + 3 * A + i)] = mirror ? -1 : 3 * vd1[idx(A)] + i;
      }
    }
    for (int B = 0; B < nH; ++B) dofs[idx(6 * nL + B)] = md[idx(B)] < 0 ? -1 : p_.num_v() + md[idx(B)];

    Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd K;
    if (jac_) K = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd Bm(kEdge, n);
    const double scale = mirror ? 0.5 : 1.0;
    for (const auto& lp : gauss_legendre(p_.k() + 2)) {
      const EdgePoint e0 = edge_point(mesh, e, 0, lp.s);
      const EdgePoint e1 = mirror ? e0 : edge_point(mesh, e, 1, lp.s);
      const LagrangeValues L0 = p_.lagrange().evaluate(t0, e0.map, e0.xi);
      const LagrangeValues L1 = mirror ? L0 : p_.lagrange().evaluate(t1, e1.map, e1.xi);
      const Eigen::MatrixX3d Hb = p_.hhj().evaluate(t0, e0.map, e0.xi);
      const Vec2 nu = e0.normal;
      const Vec2 tau(-nu.y(), nu.x());
      Bm.setZero();
      Mat32 G0 = Mat32::Zero(), G1 = Mat32::Zero();
      for (int A = 0; A < nL; ++A) {
        for (int i = 0; i < 3; ++i) {
          for (int a = 0; a < 2; ++a) {
            Bm(2 * i + a, 3 * A + i) = L0.grad(A, a);
            G0(i, a) += s_.v[3 * vd0[idx(A)] + i] * L0.grad(A, a);
            if (!mirror) {
              Bm(6 + 2 * i + a, 3 * nL + 3 * A + i) = L1.grad(A, a);
              G1(i, a) += s_.v[3 * vd1[idx(A)] + i] * L1.grad(A, a);
            }
          }
        }
      }
      double mnn = 0.0;
      for (int B = 0; B < nH; ++B) {
        const double b = nu.dot(sym_from(Hb.row(B).transpose()) * nu);
        Bm(12, 6 * nL + B) = b;
        if (md[idx(B)] >= 0) mnn += b * s_.m[md[idx(B)]];
      }
      std::array<std::array<D12, 2>, 3> gm, gp;
      for (int i = 0; i < 3; ++i) {
        for (int a = 0; a < 2; ++a) {
          gm[idx(i)][idx(a)] = D12::variable(G0(i, a), 2 * i + a);
          if (mirror) {
            const double sign = (i == 1 ? -1.0 : 1.0) * (a == 1 ? -1.0 : 1.0);
            gp[idx(i)][idx(a)] = sign * gm[idx(i)][idx(a)];
          } else {
            gp[idx(i)][idx(a)] = D12::variable(G1(i, a), 6 + 2 * i + a);
          }
        }
      }
      const auto normal = [](const std::array<std::array<D12, 2>, 3>& g) {
        return unit<12>(cross<12>({g[0][0], g[1][0], g[2][0]}, {g[0][1], g[1][1], g[2][1]}));
      };
      const Dual2Vec3<12> nm = normal(gm), np = normal(gp);
      Dual2Vec3<12> tv;
      for (int i = 0; i < 3; ++i) {
        tv[idx(i)] = 0.5 * (tau.x() * (gm[idx(i)][0] + gp[idx(i)][0]) + tau.y() * (gm[idx(i)][1] + gp[idx(i)][1]));
      }
      const D12 theta = hinge_angle(nm, np, unit<12>(tv), params_.angle);
      const double w = scale * lp.weight * e0.ds;
      acc.value += w * theta.v * mnn;
      Eigen::Matrix<double, kEdge, 1> gz;
      gz.head<12>() = mnn * theta.g;
      gz[12] = theta.v;
      r += w * (Bm.transpose() * gz);
      if (jac_) {
        Eigen::Matrix<double, kEdge, kEdge> hz = Eigen::Matrix<double, kEdge, kEdge>::Zero();
        hz.topLeftCorner<12, 12>() = mnn * theta.h;
        hz.block<12, 1>(0, 12) = theta.g;
        hz.block<1, 12>(12, 0) = theta.g.transpose();
        K.noalias() += w * (Bm.transpose() * (hz * Bm));
      }
    }
    acc.scatter(dofs, r, jac_ ? &K : nullptr);
  }

  void dirichlet(int e, Accumulator& acc) const {
    const Mesh& mesh = p_.mesh();
    const int t0 = mesh.edge(e).tri[0];
    const auto& vd = p_.lagrange().element_dofs(t0);
    const int nL = static_cast<int>(vd.size());
    std::vector<int> dofs(idx(3 * nL));
    for (int A = 0; A < nL; ++A) {
      for (int i = 0; i < 3; ++i) dofs[idx(3 * A + i)] = 3 * vd[idx(A)] + i;
    }
    Eigen::VectorXd r = Eigen::VectorXd::Zero(3 * nL);
    Eigen::MatrixXd K;
    if (jac_) K = Eigen::MatrixXd::Zero(3 * nL, 3 * nL);
    const double pen = params_.penalty_dirichlet() * s_.beta;
    const bool exact = p_.identity_exact(t0);
    for (const auto& lp : gauss_legendre(p_.k() + 1)) {
      const EdgePoint ep = edge_point(mesh, e, 0, lp.s);
      const LagrangeValues L = p_.lagrange().evaluate(t0, ep.map, ep.xi);
      // v - u_D = (v - X) + (X - x) + (x - u_D), the middle term vanishes
      // when the identity is in the discrete space
      Vec3 d = Vec3::Zero();
      for (int A = 0; A < nL; ++A) {
        const int g = 3 * vd[idx(A)];
        d += L.phi[A] * (s_.v.segment<3>(g) - p_.reference().segment<3>(g));
        if (!exact) d += L.phi[A] * p_.reference().segment<3>(g);
      }
      const Point2& x = ep.map.x;
      if (!exact) d -= Vec3(x.x(), x.y(), 0.0);
      d -= params_.boundary_data(s_.t, x) - Vec3(x.x(), x.y(), 0.0);
      const double w = lp.weight * ep.ds * pen;
      acc.value += w * d.squaredNorm();
      for (int A = 0; A < nL; ++A) {
        for (int i = 0; i < 3; ++i) {
          r[3 * A + i] += 2.0 * w * d[i] * L.phi[A];
          if (!jac_) continue;
          for (int B = 0; B < nL; ++B) K(3 * A + i, 3 * B + i) += 2.0 * w * L.phi[A] * L.phi[B];
        }
      }
    }
    acc.scatter(dofs, r, jac_ ? &K : nullptr);
  }

 private:
  const FoldProblem& p_;
  const State& s_;
  const ScenarioParams& params_;
  bool jac_;
};

}  // namespace

std::string to_string(AngleMode mode) { return mode == AngleMode::Signed ? "signed" : "unsigned"; }

AngleMode angle_mode_from_string(const std::string& s) {
  if (s == "signed") return AngleMode::Signed;
  if (s == "unsigned") return AngleMode::Unsigned;
  throw InvalidInput("unknown angle mode '" + s + "' (expected signed or unsigned)");
}

void ScenarioParams::validate() const {
  if (!(E > 0.0) || !std::isfinite(E)) throw InvalidInput("E must be positive");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidInput("alpha must be positive");
  if (!std::isfinite(alpha_dirichlet)) throw InvalidInput("alpha_dirichlet must be finite");
  if (!std::isfinite(load) || !std::isfinite(compression)) throw InvalidInput("load data must be finite");
}

FoldProblem::FoldProblem(std::shared_ptr<const Mesh> mesh, int k, bool slit)
    : lagrange_(mesh, k, slit), hhj_(mesh, k - 1) {
  reference_ = lagrange_.interpolate([](const Point2& p) { return Vec3(p.x(), p.y(), 0.0); });
  fixed_.assign(idx(size()), false);
  for (int d : lagrange_.dofs_on_tag(EdgeTag::Symmetry)) fixed_[idx(3 * d + 1)] = true;
}

Eigen::VectorXd FoldProblem::pack(const State& s) const {
  if (s.v.size() != num_v() || s.m.size() != num_m()) throw InvalidInput("state size does not match the spaces");
  Eigen::VectorXd x(size());
  x << s.v, s.m;
  return x;
}

void FoldProblem::unpack(const Eigen::VectorXd& x, State& s) const {
  if (x.size() != size()) throw InvalidInput("vector size does not match the spaces");
  s.v = x.head(num_v());
  s.m = x.tail(num_m());
}

State FoldProblem::rest_state(double t, double beta) const {
  State s;
  s.v = reference_;
  s.m = Eigen::VectorXd::Zero(num_m());
  s.t = t;
  s.beta = beta;
  return s;
}

Vec3 normal_field(const Mat32& grad) {
  const Vec3 c = grad.col(0).cross(grad.col(1));
  const double n = c.norm();
  if (!(n > kDegenerateNormal)) throw SingularConfiguration("degenerate tangent plane: |dx v x dy v| <= 1e-12");
  return c / n;
}

Mat2 second_form(const DeformationValues& d) {
  const Vec3 n = normal_field(d.grad);
  return n[0] * d.hess[0] + n[1] * d.hess[1] + n[2] * d.hess[2];
}

Mat2 second_form(const FoldProblem& p, const State& s, int t, const Point2& xi) {
  return second_form(evaluate_deformation(p.lagrange(), s.v, t, xi));
}

double edge_jump_angle(const Vec3& n_minus, const Vec3& n_plus, const Vec3& tangent, AngleMode mode) {
  const double c = n_minus.dot(n_plus);
  if (mode == AngleMode::Unsigned) return std::acos(std::clamp(c, -1.0, 1.0));
  return std::atan2(n_minus.cross(n_plus).dot(tangent.normalized()), c);
}

double edge_jump_angle(const FoldProblem& p, const State& st, int e, double s, AngleMode mode) {
  const Edge& edge = p.mesh().edge(e);
  if (edge.on_boundary()) throw InvalidInput("edge_jump_angle: boundary edge");
  const EdgePoint a = edge_point(p.mesh(), e, 0, s);
  const EdgePoint b = edge_point(p.mesh(), e, 1, s);
  const Mat32 Ga = evaluate_deformation(p.lagrange(), st.v, edge.tri[0], a.xi).grad;
  const Mat32 Gb = evaluate_deformation(p.lagrange(), st.v, edge.tri[1], b.xi).grad;
  const Vec2 tau(-a.normal.y(), a.normal.x());
  const Vec3 t = 0.5 * (Ga + Gb) * tau;
  return edge_jump_angle(normal_field(Ga), normal_field(Gb), t, mode);
}

double bulk_density(const Mat32& grad, const std::array<Mat2, 3>& hess, const Mat2& m,
                    const ScenarioParams& params, double beta) {
  std::array<Eigen::Vector3d, 3> hv{sym_to(hess[0]), sym_to(hess[1]), sym_to(hess[2])};
  return bulk_kernel(grad - identity_gradient(), hv, sym_to(m), params, beta).value;
}

AssembledSystem assemble(const FoldProblem& p, const State& s, const ScenarioParams& params,
                         const AssemblyOptions& opt) {
  params.validate();
  if (s.v.size() != p.num_v() || s.m.size() != p.num_m()) {
    throw InvalidInput("assemble: state size does not match the spaces");
  }
  const Assembler asm_(p, s, params, opt.jacobian);
  const Mesh& mesh = p.mesh();
  const int nt = mesh.num_triangles();
  const int chunks = std::max(1, std::min(opt.threads, nt));
  std::vector<Accumulator> acc(idx(chunks + 1));
  for (auto& a : acc) a.residual = Eigen::VectorXd::Zero(p.size());

  const auto run_chunk = [&](int c) {
    const int begin = static_cast<int>(static_cast<long>(nt) * c / chunks);
    const int end = static_cast<int>(static_cast<long>(nt) * (c + 1) / chunks);
    for (int t = begin; t < end; ++t) asm_.element(t, acc[idx(c)]);
  };
  if (chunks == 1) {
    run_chunk(0);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(idx(chunks));
    for (int c = 0; c < chunks; ++c) {
      pool.emplace_back([&, c] {
        try {
          run_chunk(c);
        } catch (...) {
          errors[idx(c)] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  Accumulator& edges = acc[idx(chunks)];
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    if (params.coupling && edge.tag == EdgeTag::Interior) asm_.hinge(e, false, edges);
    if (params.coupling && edge.tag == EdgeTag::Symmetry) asm_.hinge(e, true, edges);
    if (params.external && edge.tag == EdgeTag::Dirichlet) asm_.dirichlet(e, edges);
  }

  AssembledSystem out;
  out.residual = Eigen::VectorXd::Zero(p.size());
  std::vector<Eigen::Triplet<double>> triplets;
  for (auto& a : acc) {
    out.value += a.value;
    out.residual += a.residual;
    triplets.insert(triplets.end(), a.triplets.begin(), a.triplets.end());
  }
  const auto& fixed = p.fixed();
  for (int i = 0; i < p.size(); ++i) {
    if (fixed[idx(i)]) out.residual[i] = 0.0;
  }
  if (!std::isfinite(out.value) || !out.residual.allFinite()) {
    throw SingularConfiguration("assemble: non-finite value or residual");
  }
  if (opt.jacobian) {
    std::vector<Eigen::Triplet<double>> kept;
    kept.reserve(triplets.size() + idx(p.size()));
    for (const auto& tr : triplets) {
      if (!fixed[idx(tr.row())] && !fixed[idx(tr.col())]) kept.push_back(tr);
    }
    for (int i = 0; i < p.size(); ++i) {
      if (fixed[idx(i)]) kept.emplace_back(i, i, 1.0);
    }
    out.jacobian.resize(p.size(), p.size());
    out.jacobian.setFromTriplets(kept.begin(), kept.end());
    out.jacobian.makeCompressed();
  }
  return out;
}

double symmetry_error(const Eigen::SparseMatrix<double>& J) {
  const Eigen::SparseMatrix<double> Jt = J.transpose();
  const Eigen::SparseMatrix<double> d = J - Jt;
  double num = 0.0, den = 0.0;
  for (int k = 0; k < d.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(d, k); it; ++it) num = std::max(num, std::abs(it.value()));
  }
  for (int k = 0; k < J.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(J, k); it; ++it) den = std::max(den, std::abs(it.value()));
  }
  return den > 0.0 ? num / den : num;
}

double jacobian_fd_check(const FoldProblem& p, const State& s, const ScenarioParams& params,
                         const Eigen::VectorXd& direction, double h_fd) {
  if (direction.size() != p.size()) throw InvalidInput("jacobian_fd_check: direction size mismatch");
  Eigen::VectorXd d = direction;
  for (int i = 0; i < p.size(); ++i) {
    if (p.fixed()[idx(i)]) d[i] = 0.0;
  }
  const AssembledSystem sys = assemble(p, s, params);
  const Eigen::VectorXd x = p.pack(s);
  State sp = s, sm = s;
  p.unpack(x + h_fd * d, sp);
  p.unpack(x - h_fd * d, sm);
  const AssemblyOptions res_only{false, 1};
  const Eigen::VectorXd fd =
      (assemble(p, sp, params, res_only).residual - assemble(p, sm, params, res_only).residual) / (2.0 * h_fd);
  const Eigen::VectorXd jd = sys.jacobian * d;
  const double scale = std::max(jd.norm(), fd.norm());
  return scale > 0.0 ? (jd - fd).norm() / scale : 0.0;
}

}  // namespace foldsim
