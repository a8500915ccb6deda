#pragma once

#include "foldsim/fold_energy.hpp"

#include <functional>
#include <iosfwd>

namespace foldsim {

/// Darboux frames [t, m_l, n_l] of a deformed crease seen from the two sides
/// l = 1, 2, with m_l = n_l x t, sampled uniformly in arclength.
struct DarbouxData {
  std::vector<double> s;
  std::vector<Vec3> point, t, m1, m2, n1, n2;
  std::vector<double> kappa1, kappa2;  // geodesic curvature t' . m_l
  std::vector<double> mu1, mu2;        // normal curvature t' . n_l
  std::vector<double> tau1, tau2;      // geodesic torsion m_l' . n_l
  std::vector<double> theta;           // signed folding angle, n2 = R(theta, t) n1
  std::vector<double> dtheta;
  // unit sample normals before projection onto the plane normal to t
  std::vector<Vec3> sample_n1, sample_n2;

  std::size_t size() const { return s.size(); }
  /// Geodesic curvature as the mean of both sides.
  double kappa(std::size_t i) const { return 0.5 * (kappa1[i] + kappa2[i]); }
};

/// Rotation by angle a about the unit axis e (right-handed).
Mat3 rotation(double a, const Vec3& e);

/// Derivatives by fourth-order finite differences (one-sided at the ends; the
/// second difference drops to third order at the ends for 5 samples).
/// Curvatures use the second difference of the points and torsions
/// tau_l = -n_l' . m_l, so every scalar keeps fourth order up to the ends. Throws InvalidInput for fewer than 5 samples,
/// mismatched sizes, or if |gamma'| deviates from 1 by more than tangent_tol
/// (the samples must then be reparametrized by arclength).
DarbouxData darboux_from_samples(const std::vector<Vec3>& points, const std::vector<Vec3>& n1,
                                 const std::vector<Vec3>& n2, double ds, double s0 = 0.0,
                                 double tangent_tol = 1e-3);

/// theta = 2 atan(mu_hat / kappa). Throws InvalidInput for kappa = 0.
double folding_angle(double kappa, double mu_hat);

struct RelationReport {
  double curvature_angle = 0.0;  // max |kappa sin(theta/2) - mu1 cos(theta/2)|
  double normal_curvature = 0.0; // max |mu2 + mu1|
  double torsion = 0.0;          // max |tau2 - tau1 - theta'|
  double rotation = 0.0;         // max |n2 - R(theta, t) n1|
  bool pass = false;
  double max() const;
};

/// Residuals of the angle-curvature relations; pass if all are below tol.
/// (a) and (b) are taken over samples with |sin(theta/2)| > fold_tol only,
/// since an unfolded smooth surface may bend the curve normally. (d) uses
/// the sample normals.
RelationReport verify_relations(const DarbouxData& d, double tol, double fold_tol = 1e-3);

/// Smooth input functions of the synthetic frame generator.
struct SyntheticFold {
  std::function<double(double)> kappa, theta, dtheta, tau1;
  double length = 10.0;
  double mu1(double s) const { return kappa(s) * std::tan(0.5 * theta(s)); }
};

/// Trigonometric profiles with coefficients drawn from the seed; kappa stays
/// in [0.3, 1.3] and |theta| below 2.
SyntheticFold random_synthetic_fold(unsigned seed, double length = 10.0);

struct CurveSamples {
  double ds = 0.0;
  std::vector<Vec3> points, n1, n2;
};

/// Integrates t' = kappa m + mu n, m' = -kappa t + tau n, n' = -mu t - tau m
/// (side 1) and gamma' = t with classical RK4 at step <= max_step, and
/// samples n2 = R(theta, t) n1 at n_samples uniformly spaced points.
CurveSamples synthetic_fold(const SyntheticFold& f, int n_samples, double max_step = 1e-3);

/// Samples the deformed crease of a fold state at n_samples points uniformly
/// spaced in the flat arclength of the crease path, with one-sided normals
/// from subdomain 1 (side 1) and subdomain 2. Samples on mesh vertices are
/// avoided by shifting the whole grid by a quarter spacing. The curve point
/// is the side-1 trace.
DarbouxData crease_trace_from_fem(const FoldProblem& p, const State& s, int n_samples,
                                  double tangent_tol = 0.05);

/// Columns s, kappa, mu1, mu2, tau1, tau2, theta.
void write_darboux_csv(std::ostream& out, const DarbouxData& d);

}  // namespace foldsim
