#include "gri/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <random>

#include <Eigen/Dense>
#include <json.hpp>

#include "gri/eval.hpp"

namespace gri {

bool VerificationReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

namespace {

constexpr double kFailSentinel = 1e99;

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + salt + 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

Expr random_entry(ExprPool& p, std::mt19937_64& rng, int N) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_int_distribution<int> shape(0, 3);
  std::uniform_int_distribution<int> ci(0, N - 1);
  const double c = coef(rng);
  const int sel = shape(rng);
  const int k = ci(rng), l = ci(rng);
  Expr e = p.constant(c);
  switch (sel) {
    case 0: return e;
    case 1: return p.mul(e, p.coord(k));
    case 2: return p.mul(e, p.mul(p.coord(k), p.coord(l)));
    default: return p.mul(e, p.sin(p.coord(k)));
  }
}

MetricField build_space_attempt(ExprPool& p, const InstanceSpec& spec,
                                uint64_t seed) {
  const int N = spec.dim;
  std::mt19937_64 rng(seed);
  Expr eps = p.constant(spec.eps);
  MetricField m;
  m.pool = &p;
  m.dim = N;
  m.coords.clear();
  for (int i = 0; i < N; ++i) m.coords.push_back("x" + std::to_string(i + 1));
  m.G = TensorField(N, {Slot::Down, Slot::Down}, p.zero());
  for (int i = 0; i < N; ++i) m.G.at({i, i}) = p.one();
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) {
      Expr s = p.mul(eps, random_entry(p, rng, N));
      m.G.at({i, j}) = p.add(m.G.at({i, j}), s);
      if (j > i) {
        m.G.at({j, i}) = p.add(m.G.at({j, i}), s);
        Expr a = p.mul(eps, random_entry(p, rng, N));
        m.G.at({i, j}) = p.add(m.G.at({i, j}), a);
        m.G.at({j, i}) = p.sub(m.G.at({j, i}), a);
      }
    }
  return m;
}

TorsionSelector draw_torsion(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> bit(1, 2);
  TorsionSelector r;
  for (int i = 0; i < 5; ++i) r.r[i] = bit(rng);
  return r;
}

SigmaSelector draw_sigma(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> bit(1, 2);
  SigmaSelector s;
  for (int i = 0; i < 3; ++i) s.s[i] = bit(rng);
  return s;
}

RhoSelector draw_rho(std::mt19937_64& rng) {
  RhoSelector rho;
  rho.s1 = draw_sigma(rng);
  rho.s2 = draw_sigma(rng);
  for (int i = 0; i < 8; ++i) rho.r[i] = draw_torsion(rng);
  return rho;
}

CurvatureParams draw_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  CurvatureParams p;
  p.u = u(rng);
  p.u2 = u(rng);
  p.v = u(rng);
  p.v2 = u(rng);
  p.w = u(rng);
  return p;
}

class Suite {
public:
  Suite(ExprPool& pool, const std::vector<Point>& pts, const Tolerances& tol,
        int threads)
      : pool_(pool), pts_(pts), tol_(tol), threads_(threads) {}

  VerificationReport report;

  double tolerance(const std::string& name, double dflt) const {
    auto it = tol_.find(name);
    return it == tol_.end() ? dflt : it->second;
  }

  void record(const std::string& name, const std::string& detail, double dev,
              double dflt_tol) {
    CheckRecord rec;
    rec.name = name;
    rec.detail = detail;
    rec.deviation = dev;
    rec.tolerance = tolerance(name, dflt_tol);
    rec.pass = dev <= rec.tolerance;
    report.checks.push_back(std::move(rec));
  }

  void record_error(const std::string& name, const std::string& what,
                    double dflt_tol) {
    CheckRecord rec;
    rec.name = name;
    rec.detail = "error: " + what;
    rec.deviation = kFailSentinel;
    rec.tolerance = tolerance(name, dflt_tol);
    rec.pass = false;
    report.checks.push_back(std::move(rec));
  }

  /// Scaled deviation max|l-r| / (1 + max(|l|,|r|)) over all pairs, points.
  double cmp(const std::vector<std::pair<Expr, Expr>>& pairs) const {
    std::vector<Expr> flat;
    flat.reserve(pairs.size() * 2);
    for (const auto& pr : pairs) {
      flat.push_back(pr.first);
      flat.push_back(pr.second);
    }
    std::vector<double> vals = evaluate_grid(pool_, flat, pts_, threads_);
    double dev = 0.0, scale = 0.0;
    for (size_t i = 0; i + 1 < vals.size(); i += 2) {
      double l = vals[i], r = vals[i + 1];
      dev = std::max(dev, std::fabs(l - r));
      scale = std::max(scale, std::max(std::fabs(l), std::fabs(r)));
    }
    return dev / (1.0 + scale);
  }

  void collect_diff(std::vector<std::pair<Expr, Expr>>& pairs,
                    const TensorField& a, const TensorField& b) const {
    for (size_t c = 0; c < a.components().size(); ++c)
      pairs.emplace_back(a.components()[c], b.components()[c]);
  }

private:
  ExprPool& pool_;
  const std::vector<Point>& pts_;
  Tolerances tol_;
  int threads_;
};

int torsion_summand_rank(ConformalSpace& cs, const Point& pt) {
  Geometry& geo = cs.geometry();
  ExprPool& p = geo.pool();
  const int N = geo.dim();
  const TensorField& T = geo.torsion();
  const TensorField& Td = geo.torsion_deriv();
  std::vector<Expr> rows;
  for (int which = 0; which < 5; ++which)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int m = 0; m < N; ++m)
          for (int n = 0; n < N; ++n) {
            Expr v = p.zero();
            switch (which) {
              case 0: v = Td.at({i, j, m, n}); break;
              case 1: v = Td.at({i, j, n, m}); break;
              case 2:
                for (int a = 0; a < N; ++a)
                  v = p.add(v, p.mul(T.at({a, j, m}), T.at({i, a, n})));
                break;
              case 3:
                for (int a = 0; a < N; ++a)
                  v = p.add(v, p.mul(T.at({a, j, n}), T.at({i, a, m})));
                break;
              default:
                for (int a = 0; a < N; ++a)
                  v = p.add(v, p.mul(T.at({a, m, n}), T.at({i, a, j})));
            }
            rows.push_back(v);
          }
  const int cols = N * N * N * N;
  EvalContext ctx(p, pt);
  Eigen::MatrixXd M(5, cols);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < cols; ++c) M(r, c) = ctx.eval(rows[r * cols + c]);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  // absolute floor guards against instances whose torsion is numerically zero
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > std::max(1e-8 * sv(0), 1e-12)) ++rank;
  return rank;
}

void suite_body(Suite& suite, ExprPool& pool, const MetricField& base,
                Expr psi, const std::vector<Point>& pts,
                const InstanceSpec& spec, bool generated, bool corrupt) {
  const int N = base.dim;

  // conformal pair (optionally corrupted image for falsification runs)
  MetricField image = conformal_image(base, psi);
  if (corrupt)
    image.G.at({0, 0}) =
        pool.add(image.G.at({0, 0}),
                 pool.mul(pool.constant(0.1), pool.coord(0)));
  ConformalSpace S(base), Sb(image);
  check_nonsingular(S.geometry(), pts);
  check_nonsingular(Sb.geometry(), pts);

  // --- identity suite -------------------------------------------------
  {
    std::mt19937_64 prng(mix_seed(spec.seed, 101));
    std::vector<std::unique_ptr<ExprPool>> pools;
    std::vector<std::unique_ptr<MetricField>> metrics;
    std::vector<std::unique_ptr<ConformalSpace>> extra;
    std::vector<ConformalSpace*> spaces{&S};
    std::string detail = "base space";
    if (generated) {
      detail = "5 seeded random spaces";
      for (int k = 1; k < 5; ++k) {
        pools.push_back(std::make_unique<ExprPool>());
        InstanceSpec sk = spec;
        sk.seed = spec.seed + static_cast<uint64_t>(k);
        metrics.push_back(std::make_unique<MetricField>(
            random_space(*pools.back(), sk)));
        extra.push_back(std::make_unique<ConformalSpace>(*metrics.back()));
        spaces.push_back(extra.back().get());
      }
    }
    // each extra space lives in its own pool, so evaluate per space and
    // take the worst deviation
    const char* names[] = {"gamma_trace_identity", "torsion_trace_identity",
                           "metricity",            "antisymmetry_F",
                           "antisymmetry_T",       "antisymmetry_R",
                           "antisymmetry_K"};
    double devs[7] = {0, 0, 0, 0, 0, 0, 0};
    bool failed = false;
    std::string err;
    // antisymmetry in the last index pair holds on the subfamily with
    // u' = -u and v' = -v (the swap maps the u-summand into the u'-summand)
    CurvatureParams prm = draw_params(prng);
    prm.u2 = -prm.u;
    prm.v2 = -prm.v;
    for (ConformalSpace* cs : spaces) {
      try {
        Geometry& geo = cs->geometry();
        ExprPool& p = geo.pool();
        const int n = geo.dim();
        Suite local(p, pts, Tolerances{}, 0);
        std::vector<std::vector<std::pair<Expr, Expr>>> pairs(7);
        const TensorField& gm = geo.gamma();
        const TensorField& T = geo.torsion();
        Expr lng = geo.ln_abs_detg();
        for (int j = 0; j < n; ++j) {
          Expr tr = p.zero(), ttr = p.zero();
          for (int a = 0; a < n; ++a) {
            tr = p.add(tr, gm.at({a, j, a}));
            ttr = p.add(ttr, T.at({a, j, a}));
          }
          pairs[0].emplace_back(tr, p.mul(p.constant(0.5), p.diff(lng, j)));
          pairs[1].emplace_back(ttr, p.zero());
        }
        TensorField dg = cov_deriv_assoc(geo.g(), geo);
        for (Expr c : dg.components()) pairs[2].emplace_back(c, p.zero());
        const TensorField& F = geo.F();
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            pairs[3].emplace_back(F.at({i, j}), p.neg(F.at({j, i})));
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
              pairs[4].emplace_back(T.at({i, j, k}), p.neg(T.at({i, k, j})));
        const TensorField& R = geo.riemann();
        TensorField K = curvature_family(prm, geo);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int m = 0; m < n; ++m)
              for (int q = 0; q < n; ++q) {
                pairs[5].emplace_back(R.at({i, j, m, q}),
                                      p.neg(R.at({i, j, q, m})));
                pairs[6].emplace_back(K.at({i, j, m, q}),
                                      p.neg(K.at({i, j, q, m})));
              }
        for (int c = 0; c < 7; ++c)
          devs[c] = std::max(devs[c], local.cmp(pairs[c]));
      } catch (const std::exception& e) {
        failed = true;
        err = e.what();
      }
    }
    for (int c = 0; c < 7; ++c) {
      if (failed)
        suite.record_error(names[c], err, 1e-10);
      else
        suite.record(names[c], detail, devs[c], 1e-10);
    }
  }

  // --- metric product invariance -------------------------------------
  try {
    std::vector<std::pair<Expr, Expr>> pairs;
    const TensorField& gi = S.geometry().ginv();
    const TensorField& gib = Sb.geometry().ginv();
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int m = 0; m < N; ++m)
          for (int n = 0; n < N; ++n)
            pairs.emplace_back(
                pool.mul(gi.at({i, j}), base.G.at({m, n})),
                pool.mul(gib.at({i, j}), image.G.at({m, n})));
    suite.record("metric_product_invariance", "all components", suite.cmp(pairs),
                 1e-9);
  } catch (const std::exception& e) {
    suite.record_error("metric_product_invariance", e.what(), 1e-9);
  }

  // --- psi gradient recovery ------------------------------------------
  try {
    TensorField f1 = psi_gradient_from_traces(S, Sb);
    TensorField f2 = psi_gradient_from_dets(S, Sb);
    std::vector<std::pair<Expr, Expr>> p1, p2;
    for (int j = 0; j < N; ++j) {
      Expr grad = pool.diff(psi, j);
      p1.emplace_back(f1.at({j}), grad);
      p2.emplace_back(f2.at({j}), grad);
    }
    suite.record("psi_gradient_from_traces", "vs analytic gradient",
                 suite.cmp(p1), 1e-9);
    suite.record("psi_gradient_from_dets", "vs analytic gradient",
                 suite.cmp(p2), 1e-9);
  } catch (const std::exception& e) {
    suite.record_error("psi_gradient_from_traces", e.what(), 1e-9);
    suite.record_error("psi_gradient_from_dets", e.what(), 1e-9);
  }

  // --- Thomas-type invariants, all 32 selectors -----------------------
  try {
    std::vector<std::pair<Expr, Expr>> pairs;
    for (int key = 0; key < 32; ++key) {
      TorsionSelector r;
      for (int i = 0; i < 5; ++i) r.r[i] = ((key >> i) & 1) + 1;
      suite.collect_diff(pairs, S.thomas(r), Sb.thomas(r));
    }
    suite.record("thomas_invariance", "all 32 selectors", suite.cmp(pairs),
                 1e-8);
  } catch (const std::exception& e) {
    suite.record_error("thomas_invariance", e.what(), 1e-8);
  }

  // --- falsification control: a non-conformal pair must be detected ---
  try {
    MetricField off = base;
    off.G.at({0, 0}) = pool.add(
        off.G.at({0, 0}), pool.mul(pool.constant(0.1), pool.coord(0)));
    ConformalSpace Sc(off);
    double sep = 0.0;
    std::vector<std::pair<Expr, Expr>> pairs;
    for (int key = 0; key < 32; ++key) {
      TorsionSelector r;
      for (int i = 0; i < 5; ++i) r.r[i] = ((key >> i) & 1) + 1;
      pairs.clear();
      suite.collect_diff(pairs, S.thomas(r), Sc.thomas(r));
      sep = std::max(sep, suite.cmp(pairs));
    }
    const double required = 1e-3;
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "max separation %.3e over 32 selectors (needs > %.0e)", sep,
                  required);
    suite.record("thomas_falsification", buf,
                 std::max(0.0, required - sep), 0.0);
  } catch (const std::exception& e) {
    suite.record_error("thomas_falsification", e.what(), 0.0);
  }

  // --- first-order transformation laws, 8 seeded draws ----------------
  try {
    std::mt19937_64 rng(mix_seed(spec.seed, 202));
    std::vector<std::pair<Expr, Expr>> inv, sig_law, th_law;
    const TensorField& T = S.geometry().torsion();
    const TensorField& Tb = Sb.geometry().torsion();
    const TensorField& Td = S.geometry().torsion_deriv();
    const TensorField& Tdb = Sb.geometry().torsion_deriv();
    std::string detail;
    for (int draw = 0; draw < 8; ++draw) {
      TorsionSelector r = draw_torsion(rng);
      TorsionSelector r2 = draw_torsion(rng);
      SigmaSelector s = draw_sigma(rng);
      if (!detail.empty()) detail += ",";
      detail += to_string(r);
      // T + tau invariance
      const TensorField& ta = S.tau(r);
      const TensorField& tb = Sb.tau(r);
      for (size_t c = 0; c < ta.components().size(); ++c)
        inv.emplace_back(pool.add(T.components()[c], ta.components()[c]),
                         pool.add(Tb.components()[c], tb.components()[c]));
      // torsion-derivative law: Tbar_|n - T_;n = sigma - sigma_bar
      TensorField sa = S.sigma(s, r);
      TensorField sb = Sb.sigma(s, r);
      for (size_t c = 0; c < sa.components().size(); ++c)
        sig_law.emplace_back(
            pool.sub(Tdb.components()[c], Td.components()[c]),
            pool.sub(sa.components()[c], sb.components()[c]));
      // torsion-product law: TbarTbar - TT = theta - theta_bar
      TensorField tha = S.theta(r, r2);
      TensorField thb = Sb.theta(r, r2);
      const int n = N;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int m = 0; m < n; ++m)
            for (int q = 0; q < n; ++q) {
              Expr lhs = pool.zero();
              for (int a = 0; a < n; ++a)
                lhs = pool.add(
                    lhs, pool.sub(pool.mul(Tb.at({a, j, m}), Tb.at({i, a, q})),
                                  pool.mul(T.at({a, j, m}), T.at({i, a, q}))));
              Expr rhs = pool.sub(tha.at({i, j, m, q}), thb.at({i, j, m, q}));
              th_law.emplace_back(lhs, rhs);
            }
    }
    suite.record("torsion_plus_tau_invariance", "8 draws: " + detail,
                 suite.cmp(inv), 1e-8);
    suite.record("sigma_transformation_law", "8 draws: " + detail,
                 suite.cmp(sig_law), 1e-8);
    suite.record("theta_transformation_law", "8 draws: " + detail,
                 suite.cmp(th_law), 1e-8);
  } catch (const std::exception& e) {
    suite.record_error("torsion_plus_tau_invariance", e.what(), 1e-8);
    suite.record_error("sigma_transformation_law", e.what(), 1e-8);
    suite.record_error("theta_transformation_law", e.what(), 1e-8);
  }

  // --- contraction relation between the curvature families ------------
  try {
    std::mt19937_64 rng(mix_seed(spec.seed, 303));
    std::vector<std::pair<Expr, Expr>> pairs;
    Geometry& geo = S.geometry();
    RicciContractions rr = ricci_contractions(geo.riemann(), geo);
    const TensorField& divT = S.torsion_divergence();
    const TensorField& TT = S.torsion_square();
    for (int t = 0; t < 5; ++t) {
      CurvatureParams prm = draw_params(rng);
      TensorField K = curvature_family(prm, geo);
      RicciContractions kc = ricci_contractions(K, geo);
      Expr u = pool.constant(prm.u);
      Expr vw = pool.constant(prm.v2 + prm.w);
      for (int j = 0; j < N; ++j)
        for (int m = 0; m < N; ++m) {
          Expr rhs = pool.add(
              rr.down.at({j, m}),
              pool.add(pool.mul(u, divT.at({j, m})),
                       pool.mul(vw, TT.at({j, m}))));
          pairs.emplace_back(kc.down.at({j, m}), rhs);
        }
    }
    suite.record("ricci_contraction_relation", "5 random parameter tuples",
                 suite.cmp(pairs), 1e-9);
  } catch (const std::exception& e) {
    suite.record_error("ricci_contraction_relation", e.what(), 1e-9);
  }

  // --- symmetric-part conformal curvature ------------------------------
  if (N >= 3) {
    try {
      MetricField sym = base;
      sym.G = split_metric_symmetric(base);
      MetricField symimg = conformal_image(sym, psi);
      if (corrupt)
        symimg.G.at({0, 0}) =
            pool.add(symimg.G.at({0, 0}),
                     pool.mul(pool.constant(0.1), pool.coord(0)));
      ConformalSpace Ss(sym), Ssb(symimg);
      std::vector<std::pair<Expr, Expr>> pairs;
      suite.collect_diff(pairs, Ss.weyl(), Ssb.weyl());
      suite.record("weyl_conformal_invariance", "symmetric-part pair",
                   suite.cmp(pairs), 1e-8);
      if (N == 3) {
        std::vector<std::pair<Expr, Expr>> z;
        TensorField w3 = Ss.weyl();
        for (Expr c : w3.components()) z.emplace_back(c, pool.zero());
        suite.record("weyl_vanishing_3d", "symmetric metric", suite.cmp(z),
                     1e-8);
      }
      // conformally flat image
      MetricField flat = base;
      flat.G = TensorField(N, {Slot::Down, Slot::Down}, pool.zero());
      for (int i = 0; i < N; ++i) flat.G.at({i, i}) = pool.one();
      MetricField flatimg = conformal_image(flat, psi);
      ConformalSpace Sf(flatimg);
      std::vector<std::pair<Expr, Expr>> zf;
      TensorField wf = Sf.weyl();
      for (Expr c : wf.components()) zf.emplace_back(c, pool.zero());
      suite.record("weyl_conformally_flat", "exp(2 psi) * flat", suite.cmp(zf),
                   1e-8);
    } catch (const std::exception& e) {
      suite.record_error("weyl_conformal_invariance", e.what(), 1e-8);
      if (N == 3) suite.record_error("weyl_vanishing_3d", e.what(), 1e-8);
      suite.record_error("weyl_conformally_flat", e.what(), 1e-8);
    }

    // --- Weyl-type family: 20 random selectors plus the two corners ----
    try {
      std::mt19937_64 rng(mix_seed(spec.seed, 404));
      std::vector<RhoSelector> rhos;
      for (int k = 0; k < 20; ++k) rhos.push_back(draw_rho(rng));
      RhoSelector ones, twos;
      for (auto* rho : {&twos}) {
        rho->s1.s = {2, 2, 2};
        rho->s2.s = {2, 2, 2};
        for (auto& r : rho->r) r.r = {2, 2, 2, 2, 2};
      }
      rhos.push_back(ones);
      rhos.push_back(twos);
      std::vector<std::pair<Expr, Expr>> up, dn;
      for (const RhoSelector& rho : rhos) {
        CurvatureParams prm = draw_params(rng);
        TensorField ca = S.weyl_type(rho, prm);
        TensorField cb = Sb.weyl_type(rho, prm);
        suite.collect_diff(up, ca, cb);
        suite.collect_diff(dn, S.geometry().lower_first(ca),
                           Sb.geometry().lower_first(cb));
      }
      suite.record("weyl_type_invariance", "20 random selectors + 2 corners",
                   suite.cmp(up), 1e-7);
      suite.record("weyl_type_covariant_invariance",
                   "20 random selectors + 2 corners", suite.cmp(dn), 1e-7);
    } catch (const std::exception& e) {
      suite.record_error("weyl_type_invariance", e.what(), 1e-7);
      suite.record_error("weyl_type_covariant_invariance", e.what(), 1e-7);
    }
  }

  // --- numeric rank of the torsion-built curvature summands ------------
  try {
    int rank = torsion_summand_rank(S, pts.front());
    char buf[96];
    std::snprintf(buf, sizeof buf, "measured rank %d of 5 summands", rank);
    suite.record("torsion_summand_rank", buf, double(5 - rank), 0.5);
  } catch (const std::exception& e) {
    suite.record_error("torsion_summand_rank", e.what(), 0.5);
  }

  std::sort(suite.report.checks.begin(), suite.report.checks.end(),
            [](const CheckRecord& a, const CheckRecord& b) {
              return a.name < b.name;
            });
}

}  // namespace

MetricField random_space(ExprPool& pool, const InstanceSpec& spec) {
  if (!(spec.eps < 0.5))
    throw Error(ErrorCode::Validation,
                "perturbation amplitude must be < 0.5");
  if (spec.dim < 2 || spec.dim > 4)
    throw Error(ErrorCode::DimensionUnsupported,
                "dimension " + std::to_string(spec.dim) +
                    " not supported (need 2..4)");
  std::vector<Point> probes = sample_points(spec);
  // box corners
  for (unsigned mask = 0; mask < (1u << spec.dim); ++mask) {
    Point c;
    for (int k = 0; k < spec.dim; ++k)
      c.x.push_back((mask >> k) & 1 ? spec.box_hi : spec.box_lo);
    probes.push_back(std::move(c));
  }
  for (int attempt = 0; attempt < 5; ++attempt) {
    uint64_t s = attempt == 0 ? spec.seed
                              : mix_seed(spec.seed, 7000 + attempt);
    MetricField m = build_space_attempt(pool, spec, s);
    Geometry geo(m);
    Expr det = geo.detg();
    bool ok = true;
    for (const Point& pt : probes) {
      double v = eval(pool, det, pt);
      if (!(std::fabs(v) > 1e-4)) {
        ok = false;
        break;
      }
    }
    if (ok) return m;
  }
  throw Error(ErrorCode::GenerationFailed,
              "could not generate an invertible metric in 5 attempts");
}

Expr random_psi(ExprPool& pool, const InstanceSpec& spec) {
  std::mt19937_64 rng(mix_seed(spec.seed, 505));
  std::uniform_real_distribution<double> coef(-0.3, 0.3);
  Expr psi = pool.zero();
  for (int k = 0; k < spec.dim; ++k)
    psi = pool.add(psi, pool.mul(pool.constant(coef(rng)), pool.coord(k)));
  psi = pool.add(psi,
                 pool.mul(pool.constant(coef(rng)), pool.sin(pool.coord(0))));
  return psi;
}

std::vector<Point> sample_points(const InstanceSpec& spec) {
  std::mt19937_64 rng(mix_seed(spec.seed, 606));
  std::uniform_real_distribution<double> u(spec.box_lo, spec.box_hi);
  std::vector<Point> pts(spec.points);
  for (Point& p : pts) {
    p.x.resize(spec.dim);
    for (double& v : p.x) v = u(rng);
  }
  return pts;
}

VerificationReport run_suite(const InstanceSpec& spec,
                             const Tolerances& overrides, int threads) {
  ExprPool pool;
  MetricField base = random_space(pool, spec);
  Expr psi = random_psi(pool, spec);
  std::vector<Point> pts = sample_points(spec);
  Suite suite(pool, pts, overrides, threads);
  suite.report.spec = spec;
  suite_body(suite, pool, base, psi, pts, spec, /*generated=*/true,
             /*corrupt=*/false);
  return std::move(suite.report);
}

VerificationReport run_suite_on(const MetricField& base, Expr psi,
                                const std::vector<Point>& points,
                                const InstanceSpec& spec,
                                const Tolerances& overrides, int threads,
                                bool corrupt) {
  Suite suite(*base.pool, points, overrides, threads);
  suite.report.spec = spec;
  suite.report.spec.dim = base.dim;
  suite.report.spec.points = static_cast<int>(points.size());
  suite_body(suite, *base.pool, base, psi, points, spec, /*generated=*/false,
             corrupt);
  return std::move(suite.report);
}

std::string report_to_json(const VerificationReport& report) {
  nlohmann::ordered_json j;
  j["environment"] = {
      {"dimension", report.spec.dim}, {"eps", report.spec.eps},
      {"seed", report.spec.seed},     {"points", report.spec.points},
      {"box", {report.spec.box_lo, report.spec.box_hi}},
  };
  j["checks"] = nlohmann::ordered_json::array();
  for (const CheckRecord& c : report.checks) {
    j["checks"].push_back({{"name", c.name},
                           {"detail", c.detail},
                           {"deviation", c.deviation},
                           {"tolerance", c.tolerance},
                           {"verdict", c.pass ? "pass" : "fail"}});
  }
  j["all_pass"] = report.all_pass();
  return j.dump(2) + "\n";
}

}  // namespace gri
