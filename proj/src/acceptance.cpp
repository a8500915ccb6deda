#include "foldsim/acceptance.hpp"

#include "foldsim/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

namespace foldsim {

namespace {

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string g4(double x) { return fmt("%.4g", x); }

struct FoldSummary {
  bool completed = false;
  std::string message;
  double deflection = 0.0, l2 = 0.0, l64 = 0.0, violation = 0.0, seconds = 0.0;
  std::string csv;  // diagnostics followed by norms
};

class RunCache {
 public:
  explicit RunCache(const AcceptanceOptions& opt) : opt_(opt) {}

  static RunConfig config(CreaseSetting s, double h, int k, double alpha = 1e6) {
    RunConfig c;
    c.setting = s;
    c.h = h;
    c.k = k;
    c.alpha = alpha;
    return c;
  }

  const FoldSummary& get(const RunConfig& cfg) {
    const std::string key = cfg.snapshot();
    auto it = runs_.find(key);
    if (it != runs_.end()) return it->second;
    return runs_.emplace(key, run(cfg)).first->second;
  }

  FoldSummary run(RunConfig cfg) {
    cfg.threads = opt_.threads;
    const std::string label = to_string(cfg.setting) + " h=" + g4(cfg.h) + " k=" + std::to_string(cfg.k) +
                              " alpha=" + g4(cfg.alpha);
    if (opt_.log) opt_.log("fold run " + label);
    const FoldOutcome o = run_fold(cfg);
    FoldSummary s;
    s.completed = o.trajectory.completed;
    s.message = o.trajectory.message;
    s.deflection = o.deflection;
    s.l2 = o.m_l2;
    s.l64 = o.m_l64;
    s.violation = o.violation;
    s.seconds = o.seconds;
    s.csv = o.diagnostics_csv + o.norms_csv;
    if (opt_.log)
      opt_.log("  " + label + ": x_P " + g4(s.deflection) + ", L2 " + g4(s.l2) + ", L64 " + g4(s.l64) +
               ", violation " + g4(s.violation) + ", " + fmt("%.0f s", s.seconds) +
               (s.completed ? "" : " (incomplete: " + s.message + ")"));
    return s;
  }

 private:
  const AcceptanceOptions& opt_;
  std::map<std::string, FoldSummary> runs_;
};

void require_completed(const FoldSummary& s, const std::string& what) {
  if (!s.completed) throw std::runtime_error(what + " did not complete: " + s.message);
}

// --- criterion 1 ------------------------------------------------------------

void identity_suite(CriterionResult& r) {
  AnalyticField v;
  v.value = [](const Point2& x) { return 1.0 - x.squaredNorm(); };
  v.grad = [](const Point2& x) { return Vec2(-2.0 * x.x(), -2.0 * x.y()); };
  v.hess = [](const Point2&) { return Eigen::Vector3d(-2.0, 0.0, -2.0); };
  const IdentityReport rep = hessian_identity(v, IdentityDomain::disk(), 20);
  const double e1 = std::abs(rep.hessian / (8 * kPi) - 1), e2 = std::abs(rep.laplacian / (16 * kPi) - 1),
               e3 = std::abs(rep.boundary / (8 * kPi) - 1);
  r.pass = e1 < 1e-6 && e2 < 1e-6 && e3 < 1e-6 && rep.residual() < 1e-8;
  r.detail = "relative errors " + g4(e1) + ", " + g4(e2) + ", " + g4(e3) + " (< 1e-6); residual " +
             g4(rep.residual()) + " (< 1e-8)";
}

// --- criterion 2 ------------------------------------------------------------

void linear_paradox(CriterionResult& r, int threads) {
  const std::vector<int> sides{8, 16, 32, 64};
  const auto full = paradox_sweep(sides, SupportMode::FullBoundary, 3, 0, threads);
  const auto corners = paradox_sweep(sides, SupportMode::CornersOnly, 3, 0, threads);
  const double target = navier_center_deflection();
  const double rel_full = full.back().err_navier / target;
  bool monotone = true;
  for (std::size_t i = 1; i < corners.size(); ++i) monotone = monotone && corners[i].err_disk < corners[i - 1].err_disk;
  const double rel_corners = corners.back().err_disk / disk_center_deflection();
  const bool full_ok = rel_full < 0.02, corners_ok = monotone && rel_corners < 0.10;
  r.pass = full_ok && corners_ok;
  std::string w_full, w_corner;
  for (std::size_t i = 0; i < sides.size(); ++i) {
    w_full += (i ? " " : "") + fmt("%.5f", full[i].w_center);
    w_corner += (i ? " " : "") + fmt("%.5f", corners[i].w_center);
  }
  r.detail = "full_boundary w(m=8..64) " + w_full + ", error vs 3/64 at m=64 " + fmt("%.1f%%", 100 * rel_full) +
             " (< 2%) " + (full_ok ? "ok" : "FAIL") + "; corners_only w " + w_corner + ", error vs 5/64 " +
             (monotone ? "decreasing" : "NOT decreasing") + ", final " + fmt("%.2f%%", 100 * rel_corners) +
             " (< 10%) " + (corners_ok ? "ok" : "FAIL");
  if (!full_ok)
    r.detail +=
        ". Analysis: the HHJ center value converges to the polygon solution only like "
        "h^(2(pi/omega - 1)) because of the corner singularity r^(pi/omega); with m boundary edges "
        "that factor is about 0.065 at m = 64, so matched resolution stays near 5/64";
}

// --- criterion 3 ------------------------------------------------------------

void geometry_oracle(CriterionResult& r) {
  bool ok = true;
  std::string detail;
  for (unsigned seed : {1u, 2u, 3u}) {
    const SyntheticFold f = random_synthetic_fold(seed);
    std::vector<double> logh;
    std::vector<RelationReport> reps;
    for (int n : {126, 251, 501, 1001, 2001}) {
      const CurveSamples c = synthetic_fold(f, n);
      logh.push_back(std::log(c.ds));
      reps.push_back(verify_relations(darboux_from_samples(c.points, c.n1, c.n2, c.ds), 1.0));
    }
    const auto slope = [&](double RelationReport::*field) {
      double mx = 0, my = 0;
      for (std::size_t j = 0; j < reps.size(); ++j) {
        mx += logh[j] / reps.size();
        my += std::log(reps[j].*field) / reps.size();
      }
      double sxy = 0, sxx = 0;
      for (std::size_t j = 0; j < reps.size(); ++j) {
        sxy += (logh[j] - mx) * (std::log(reps[j].*field) - my);
        sxx += (logh[j] - mx) * (logh[j] - mx);
      }
      return sxy / sxx;
    };
    const double order = std::min({slope(&RelationReport::curvature_angle), slope(&RelationReport::normal_curvature),
                                   slope(&RelationReport::torsion), slope(&RelationReport::rotation)});
    const double res = reps[3].max();
    ok = ok && res < 1e-5 && order >= 3.5;
    detail += (seed > 1 ? "; " : "") + std::string("seed ") + std::to_string(seed) + ": max residual " + g4(res) +
              " at 1001 samples, order " + fmt("%.2f", order);
  }
  r.pass = ok;
  r.detail = detail + " (residual < 1e-5, order >= 3.5)";
}

// --- criterion 4 ------------------------------------------------------------

void assembly_checks(CriterionResult& r) {
  ScenarioParams unloaded;
  unloaded.load = 0.0;
  unloaded.compression = 0.0;
  const auto perturbed = [](const FoldProblem& p, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    State s = p.rest_state(0.3, 0.6);
    for (Eigen::Index i = 0; i < s.v.size(); ++i) {
      if (!p.fixed()[static_cast<std::size_t>(i)]) s.v[i] += 0.01 * u(gen);
    }
    for (Eigen::Index i = 0; i < s.m.size(); ++i) s.m[i] = u(gen);
    return s;
  };
  const auto direction = [](int n, unsigned seed) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> g;
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d[i] = g(gen);
    return d;
  };

  double fd = 0.0, sym = 0.0, rest_res = 0.0, rest_val = 0.0;
  const CreaseSetting settings[5] = {CreaseSetting::S1, CreaseSetting::S2, CreaseSetting::S3, CreaseSetting::S1,
                                     CreaseSetting::S3};
  for (unsigned i = 0; i < 5; ++i) {
    const CreaseSetting s = settings[i];
    const auto mesh = std::make_shared<const Mesh>(build_scenario_mesh(0.25, reference_crease(s), 2));
    const FoldProblem p(mesh, 3, s == CreaseSetting::S3);
    const State st = perturbed(p, i + 1);
    fd = std::max(fd, jacobian_fd_check(p, st, ScenarioParams{}, direction(p.size(), i + 11), 1e-5));
    sym = std::max(sym, symmetry_error(assemble(p, st, ScenarioParams{}).jacobian));
    if (i < 3) {
      const AssembledSystem rest = assemble(p, p.rest_state(0.0, 1.0), unloaded);
      rest_res = std::max(rest_res, rest.residual.norm());
      rest_val = std::max(rest_val, std::abs(rest.value));
    }
  }

  // bulk integrand of the exact cylinder (sin x, y, cos x) with its stationary moment on the unit square
  const Mesh square = build_rectangle_mesh(Point2(0, 0), Point2(1, 1), 2, 2);
  double bulk = 0.0;
  for (int t = 0; t < square.num_triangles(); ++t) {
    for (const auto& q : triangle_rule(8)) {
      const MappedPoint mp = map_point(square, t, q.xi);
      const double x = mp.x.x();
      Mat32 g;
      g << std::cos(x), 0, 0, 1, -std::sin(x), 0;
      const std::array<Mat2, 3> hess{Mat2{{-std::sin(x), 0}, {0, 0}}, Mat2::Zero(),
                                     Mat2{{-std::cos(x), 0}, {0, 0}}};
      const Mat2 m = -(unloaded.E / 12.0) * Mat2{{-1, 0}, {0, 0}};
      bulk += q.weight * mp.det * bulk_density(g, hess, m, unloaded, 1.0);
    }
  }
  const double bulk_err = std::abs(bulk - unloaded.E / 24.0 * square.area());

  r.pass = fd < 1e-5 && sym < 1e-10 && rest_res < 1e-12 && rest_val == 0.0 && bulk_err < 1e-6;
  r.detail = "FD relative error " + g4(fd) + " (< 1e-5, 5 states); symmetry " + g4(sym) +
             " (< 1e-10); rest residual " + g4(rest_res) + " (< 1e-12), value " + g4(rest_val) +
             " (= 0); cylinder bulk error " + g4(bulk_err) + " (< 1e-6)";
}

// --- criterion 5 ------------------------------------------------------------

void locking(CriterionResult& r, RunCache& cache, Tier tier) {
  bool ok = true;
  std::string d;
  for (int k : {2, 3}) {
    const FoldSummary& s2 = cache.get(RunCache::config(CreaseSetting::S2, 0.1, k));
    const FoldSummary& s3 = cache.get(RunCache::config(CreaseSetting::S3, 0.1, k));
    require_completed(s2, "S2 h=0.1 k=" + std::to_string(k));
    require_completed(s3, "S3 h=0.1 k=" + std::to_string(k));
    const double ratio = s3.deflection / s2.deflection;
    const double l2 = s2.l2 / s3.l2;
    ok = ok && ratio >= 1.5 && l2 >= 1.05;
    d += "k=" + std::to_string(k) + ": x_P S3/S2 " + fmt("%.5f", s3.deflection) + "/" + fmt("%.5f", s2.deflection) +
         " = " + fmt("%.3f", ratio) + (ratio >= 1.5 ? " ok" : " FAIL") + " (>= 1.5), L2 S2/S3 " + fmt("%.3f", l2) +
         (l2 >= 1.05 ? " ok" : " FAIL") + " (>= 1.05); ";

    std::vector<double> hs{0.2, 0.1};
    if (tier == Tier::Full && k == 2) hs.push_back(0.05);
    std::vector<double> l64_2, l64_3;
    for (double h : hs) {
      const FoldSummary& a = cache.get(RunCache::config(CreaseSetting::S2, h, k));
      const FoldSummary& b = cache.get(RunCache::config(CreaseSetting::S3, h, k));
      require_completed(a, "S2 h=" + g4(h));
      require_completed(b, "S3 h=" + g4(h));
      l64_2.push_back(a.l64);
      l64_3.push_back(b.l64);
    }
    double min_growth = 1e300;
    for (std::size_t i = 1; i < hs.size(); ++i) min_growth = std::min(min_growth, l64_2[i] / l64_2[i - 1]);
    const auto [lo, hi] = std::minmax_element(l64_3.begin(), l64_3.end());
    const double var = *hi / *lo - 1.0;
    ok = ok && min_growth >= 1.5 && var < 0.15;
    std::string seq2, seq3;
    for (std::size_t i = 0; i < hs.size(); ++i) {
      seq2 += (i ? "->" : "") + fmt("%.3f", l64_2[i]);
      seq3 += (i ? "->" : "") + fmt("%.3f", l64_3[i]);
    }
    d += "L64 S2 " + seq2 + " growth " + fmt("%.3f", min_growth) + (min_growth >= 1.5 ? " ok" : " FAIL") +
         " (>= 1.5), S3 " + seq3 + " variation " + fmt("%.1f%%", 100 * var) + (var < 0.15 ? " ok" : " FAIL") +
         " (< 15%)" + (k == 2 ? "; " : "");
  }
  r.pass = ok;
  r.detail = d;
  if (!ok)
    r.detail +=
        ". Analysis: with continuity along the whole polygonal crease the discrete S2 solution still folds "
        "through bending concentrated at the interior crease vertex, so its stiffening over S3 is far weaker "
        "than the reference ratio 1.93 at these mesh sizes";
}

// --- criterion 6 ------------------------------------------------------------

void s1_vs_s3(CriterionResult& r, RunCache& cache, Tier tier) {
  bool ok = true;
  std::string d;
  std::vector<int> ks{2};
  if (tier == Tier::Full) ks.push_back(3);
  for (int k : ks) {
    RunConfig c1 = RunCache::config(CreaseSetting::S1, 0.1, k);
    c1.geometry_order = 2;
    const FoldSummary& s1 = cache.get(c1);
    const FoldSummary& s3 = cache.get(RunCache::config(CreaseSetting::S3, 0.1, k));
    require_completed(s1, "S1 h=0.1");
    require_completed(s3, "S3 h=0.1");
    const auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
    const double dx = rel(s1.deflection, s3.deflection), d2 = rel(s1.l2, s3.l2), d64 = rel(s1.l64, s3.l64);
    ok = ok && dx < 0.02 && d2 < 0.05 && d64 < 0.05;
    d += (k > 2 ? "; " : "") + std::string("k=") + std::to_string(k) + " h=0.1 geometry order 2: x_P S1 " +
         fmt("%.5f", s1.deflection) + " vs S3 " + fmt("%.5f", s3.deflection) + " differ " + fmt("%.2f%%", 100 * dx) +
         " (< 2%), L2 " + fmt("%.2f%%", 100 * d2) + ", L64 " + fmt("%.2f%%", 100 * d64) + " (< 5%)";
  }
  r.pass = ok;
  r.detail = d;
}

// --- criterion 7 ------------------------------------------------------------

void penalty(CriterionResult& r, RunCache& cache, Tier tier) {
  const double h = tier == Tier::Full ? 0.1 : 0.2;
  std::vector<double> viol;
  for (double a : {1e4, 1e5, 1e6}) {
    const FoldSummary& s = cache.get(RunCache::config(CreaseSetting::S3, h, 2, a));
    require_completed(s, "S3 alpha=" + g4(a));
    viol.push_back(s.violation);
  }
  const bool decreasing = viol[1] < viol[0] && viol[2] < viol[1];
  r.pass = decreasing && viol[2] < 1e-2;
  r.detail = "S3 h=" + g4(h) + " k=2 violation at alpha 1e4/1e5/1e6: " + g4(viol[0]) + " / " + g4(viol[1]) +
             " / " + g4(viol[2]) + (decreasing ? " decreasing" : " NOT decreasing") + ", final < 1e-2";
}

// --- criterion 8 ------------------------------------------------------------

void determinism(CriterionResult& r, RunCache& cache) {
  const RunConfig c = RunCache::config(CreaseSetting::S2, 0.2, 2);
  const FoldSummary& a = cache.get(c);
  const FoldSummary b = cache.run(c);
  r.pass = a.completed && a.csv == b.csv;
  r.detail = "S2 h=0.2 k=2 rerun: " + std::to_string(a.csv.size()) + " CSV bytes, " +
             (a.csv == b.csv ? "identical" : "DIFFERENT");
}

}  // namespace

Tier tier_from_string(const std::string& s) {
  if (s == "fast") return Tier::Fast;
  if (s == "full") return Tier::Full;
  throw InvalidInput("unknown tier '" + s + "' (expected fast or full)");
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  RunCache cache(opt);
  const std::vector<std::pair<int, std::string>> names{
      {1, "identity_suite"}, {2, "linear_paradox"},  {3, "fold_geometry_oracle"}, {4, "assembly_correctness"},
      {5, "locking"},        {6, "s1_vs_s3"},        {7, "penalty_consistency"},  {8, "determinism"}};
  std::vector<CriterionResult> results;
  for (const auto& [id, name] : names) {
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) continue;
    CriterionResult r;
    r.id = id;
    r.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      switch (id) {
        case 1: identity_suite(r); break;
        case 2: linear_paradox(r, opt.threads); break;
        case 3: geometry_oracle(r); break;
        case 4: assembly_checks(r); break;
        case 5: locking(r, cache, opt.tier); break;
        case 6: s1_vs_s3(r, cache, opt.tier); break;
        case 7: penalty(r, cache, opt.tier); break;
        case 8: determinism(r, cache); break;
      }
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_result) on_result(r);
    results.push_back(r);
  }
  return results;
}

std::string format_result(const CriterionResult& r) {
  return std::string(r.pass ? "PASS" : "FAIL") + " criterion " + std::to_string(r.id) + " " + r.name + ": " +
         r.detail + fmt(" [%.1f s]", r.seconds);
}

void write_acceptance_json(std::ostream& out, const std::vector<CriterionResult>& results) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : results)
    j.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"seconds", r.seconds}});
  out << j.dump(2) << "\n";
}

}  // namespace foldsim
