#include "gri/conformal.hpp"

#include <cmath>
#include <sstream>

namespace gri {

TorsionSelector parse_torsion_selector(const std::string& text) {
  if (text.size() != 5)
    throw Error(ErrorCode::Validation,
                "torsion selector needs exactly 5 characters of 1|2: " + text);
  TorsionSelector out;
  for (int i = 0; i < 5; ++i) {
    if (text[i] != '1' && text[i] != '2')
      throw Error(ErrorCode::Validation,
                  "torsion selector characters must be 1 or 2: " + text);
    out.r[i] = text[i] - '0';
  }
  return out;
}

SigmaSelector parse_sigma_selector(const std::string& text) {
  if (text.size() != 3)
    throw Error(ErrorCode::Validation,
                "sigma selector needs exactly 3 characters of 1|2: " + text);
  SigmaSelector out;
  for (int i = 0; i < 3; ++i) {
    if (text[i] != '1' && text[i] != '2')
      throw Error(ErrorCode::Validation,
                  "sigma selector characters must be 1 or 2: " + text);
    out.s[i] = text[i] - '0';
  }
  return out;
}

std::string to_string(const TorsionSelector& r) {
  std::string s;
  for (int v : r.r) s += static_cast<char>('0' + v);
  return s;
}

std::string to_string(const RhoSelector& rho) {
  std::string s;
  for (int v : rho.s1.s) s += static_cast<char>('0' + v);
  s += '-';
  for (int v : rho.s2.s) s += static_cast<char>('0' + v);
  for (const auto& r : rho.r) {
    s += '-';
    s += to_string(r);
  }
  return s;
}

MetricField conformal_image(const MetricField& base, Expr psi) {
  ExprPool& p = *base.pool;
  MetricField out = base;
  Expr scale = p.exp(p.mul(p.constant(2.0), psi));
  for (Expr& c : out.G.components()) c = p.mul(scale, c);
  out.psi = psi;
  return out;
}

ConformalPair make_conformal_pair(const MetricField& base, Expr psi) {
  ConformalPair pair;
  pair.base = base;
  pair.image = conformal_image(base, psi);
  pair.psi = psi;
  return pair;
}

void ConformalSpace::require_dim3() const {
  if (dim() < 3)
    throw Error(ErrorCode::DimensionUnsupported,
                "conformal curvature needs dimension >= 3");
}

const TensorField& ConformalSpace::zeta(int kind) {
  if (kind == 1) return geo_.gamma();
  if (kind != 2)
    throw Error(ErrorCode::InvalidKind, "zeta kind must be 1 or 2");
  if (!have_zeta2_) {
    ExprPool& p = pool();
    const int N = dim();
    Expr lng = geo_.ln_abs_detg();
    std::vector<Expr> L(N);
    for (int j = 0; j < N; ++j) L[j] = p.diff(lng, j);
    const TensorField& gs = geo_.g();
    const TensorField& gi = geo_.ginv();
    Expr inv2N = p.constant(1.0 / (2.0 * N));
    zeta2_ = TensorField(N, {Slot::Up, Slot::Down, Slot::Down}, p.zero());
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k) {
          Expr s = p.zero();
          if (i == k) s = p.add(s, L[j]);
          if (i == j) s = p.add(s, L[k]);
          Expr tr = p.zero();
          for (int a = 0; a < N; ++a)
            tr = p.add(tr, p.mul(L[a], p.mul(gi.at({i, a}), gs.at({j, k}))));
          s = p.sub(s, tr);
          zeta2_.at({i, j, k}) = p.mul(inv2N, s);
        }
    have_zeta2_ = true;
  }
  return zeta2_;
}

const TensorField& ConformalSpace::tau(const TorsionSelector& r) {
  auto it = tau_cache_.find(r.key());
  if (it != tau_cache_.end()) return it->second;
  ExprPool& p = pool();
  const int N = dim();
  const TensorField& gi = geo_.ginv();
  const TensorField& F = geo_.F();
  const TensorField* z[6] = {nullptr, &zeta(r.r[0]), &zeta(r.r[1]),
                             &zeta(r.r[2]), &zeta(r.r[3]), &zeta(r.r[4])};
  // trace of zeta over first/last slots; both kinds share it
  const TensorField& z1 = zeta(1);
  std::vector<Expr> tz(N, p.zero());
  for (int b = 0; b < N; ++b)
    for (int a = 0; a < N; ++a) tz[b] = p.add(tz[b], z1.at({a, b, a}));
  Expr half = p.constant(0.5);
  TensorField out(N, {Slot::Up, Slot::Down, Slot::Down}, p.zero());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        Expr t1 = p.zero(), t2 = p.zero(), t3 = p.zero(), t4 = p.zero(),
             t5 = p.zero(), tt = p.zero();
        for (int a = 0; a < N; ++a)
          for (int b = 0; b < N; ++b) {
            t1 = p.add(t1, p.mul(z[1]->at({i, a, k}),
                                 p.mul(gi.at({a, b}), F.at({j, b}))));
            t2 = p.add(t2, p.mul(z[2]->at({i, b, a}),
                                 p.mul(gi.at({b, a}), F.at({j, k}))));
            t3 = p.add(t3, p.mul(z[3]->at({i, a, j}),
                                 p.mul(gi.at({b, a}), F.at({b, k}))));
            t4 = p.add(t4, p.mul(z[4]->at({a, j, b}),
                                 p.mul(gi.at({i, b}), F.at({a, k}))));
            t5 = p.add(t5, p.mul(z[5]->at({a, k, b}),
                                 p.mul(gi.at({i, b}), F.at({j, a}))));
          }
        for (int b = 0; b < N; ++b)
          tt = p.add(tt, p.mul(tz[b], p.mul(gi.at({i, b}), F.at({j, k}))));
        Expr five = p.add(p.sub(t1, t2), p.add(t3, p.add(t4, t5)));
        out.at({i, j, k}) = p.add(p.neg(p.mul(half, five)), p.mul(half, tt));
      }
  return tau_cache_.emplace(r.key(), std::move(out)).first->second;
}

const TensorField& ConformalSpace::tau_deriv(const TorsionSelector& r) {
  auto it = dtau_cache_.find(r.key());
  if (it != dtau_cache_.end()) return it->second;
  TensorField d = cov_deriv_assoc(tau(r), geo_);
  return dtau_cache_.emplace(r.key(), std::move(d)).first->second;
}

TensorField ConformalSpace::thomas(const TorsionSelector& r) {
  ExprPool& p = pool();
  const int N = dim();
  const TensorField& G = geo_.christoffel();
  const TensorField& z2 = zeta(2);
  const TensorField& t = tau(r);
  TensorField out(N, {Slot::Up, Slot::Down, Slot::Down}, p.zero());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k)
        out.at({i, j, k}) =
            p.add(p.sub(G.at({i, j, k}), z2.at({i, j, k})), t.at({i, j, k}));
  return out;
}

TensorField ConformalSpace::sigma(const SigmaSelector& s,
                                  const TorsionSelector& r) {
  ExprPool& p = pool();
  const int N = dim();
  const TensorField& dt = tau_deriv(r);
  const TensorField& t = tau(r);
  const TensorField& T = geo_.torsion();
  const TensorField& za = zeta(s.s[0]);
  const TensorField& zb = zeta(s.s[1]);
  const TensorField& zc = zeta(s.s[2]);
  // Tt = T + tau
  TensorField Tt(N, {Slot::Up, Slot::Down, Slot::Down}, p.zero());
  for (size_t c = 0; c < Tt.components().size(); ++c)
    Tt.components()[c] = p.add(T.components()[c], t.components()[c]);
  TensorField out(N, {Slot::Up, Slot::Down, Slot::Down, Slot::Down}, p.zero());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n) {
          Expr v = dt.at({i, j, m, n});
          for (int a = 0; a < N; ++a) {
            v = p.sub(v, p.mul(za.at({i, a, n}), Tt.at({a, j, m})));
            v = p.add(v, p.mul(zb.at({a, j, n}), Tt.at({i, a, m})));
            v = p.add(v, p.mul(zc.at({a, m, n}), Tt.at({i, j, a})));
          }
          out.at({i, j, m, n}) = v;
        }
  return out;
}

TensorField ConformalSpace::theta(const TorsionSelector& r1,
                                  const TorsionSelector& r2) {
  ExprPool& p = pool();
  const int N = dim();
  const TensorField& T = geo_.torsion();
  const TensorField& t1 = tau(r1);
  const TensorField& t2 = tau(r2);
  TensorField out(N, {Slot::Up, Slot::Down, Slot::Down, Slot::Down}, p.zero());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n) {
          Expr v = p.zero();
          for (int a = 0; a < N; ++a) {
            v = p.add(v, p.mul(T.at({a, j, m}), t2.at({i, a, n})));
            v = p.add(v, p.mul(T.at({i, a, n}), t1.at({a, j, m})));
            v = p.add(v, p.mul(t1.at({a, j, m}), t2.at({i, a, n})));
          }
          out.at({i, j, m, n}) = v;
        }
  return out;
}

TensorField ConformalSpace::weyl() {
  require_dim3();
  ExprPool& p = pool();
  const int N = dim();
  const TensorField& R = geo_.riemann();
  RicciContractions rc = ricci_contractions(R, geo_);
  // sign fixed so that the tensor is conformally invariant and vanishes
  // identically in three dimensions
  for (Expr& c : rc.down.components()) c = p.neg(c);
  for (Expr& c : rc.mixed.components()) c = p.neg(c);
  rc.scalar = p.neg(rc.scalar);
  const TensorField& gs = geo_.g();
  Expr c1 = p.constant(1.0 / (N - 2));
  Expr c2 = p.constant(1.0 / ((N - 1.0) * (N - 2.0)));
  TensorField out(N, {Slot::Up, Slot::Down, Slot::Down, Slot::Down}, p.zero());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n) {
          Expr v = R.at({i, j, m, n});
          Expr a = p.zero();
          if (i == n) a = p.add(a, rc.down.at({j, m}));
          if (i == m) a = p.sub(a, rc.down.at({j, n}));
          a = p.add(a, p.mul(gs.at({j, m}), rc.mixed.at({i, n})));
          a = p.sub(a, p.mul(gs.at({j, n}), rc.mixed.at({i, m})));
          v = p.add(v, p.mul(c1, a));
          Expr b = p.zero();
          if (i == m) b = p.add(b, gs.at({j, n}));
          if (i == n) b = p.sub(b, gs.at({j, m}));
          v = p.add(v, p.mul(c2, p.mul(rc.scalar, b)));
          out.at({i, j, m, n}) = v;
        }
  return out;
}

TensorField ConformalSpace::weyl_covariant() {
  TensorField c = weyl();
  return geo_.lower_first(c);
}

const TensorField& ConformalSpace::torsion_divergence() {
  if (!have_divT_) {
    ExprPool& p = pool();
    const int N = dim();
    const TensorField& Td = geo_.torsion_deriv();
    divT_ = TensorField(N, {Slot::Down, Slot::Down}, p.zero());
    for (int j = 0; j < N; ++j)
      for (int n = 0; n < N; ++n) {
        Expr s = p.zero();
        for (int a = 0; a < N; ++a) s = p.add(s, Td.at({a, j, n, a}));
        divT_.at({j, n}) = s;
      }
    divTu_ = geo_.raise_first(divT_);
    have_divT_ = true;
  }
  return divT_;
}

const TensorField& ConformalSpace::torsion_square() {
  if (!have_TT_) {
    ExprPool& p = pool();
    const int N = dim();
    const TensorField& T = geo_.torsion();
    const TensorField& gi = geo_.ginv();
    TT_ = TensorField(N, {Slot::Down, Slot::Down}, p.zero());
    for (int j = 0; j < N; ++j)
      for (int n = 0; n < N; ++n) {
        Expr s = p.zero();
        for (int a = 0; a < N; ++a)
          for (int b = 0; b < N; ++b)
            s = p.add(s, p.mul(T.at({a, j, b}), T.at({b, a, n})));
        TT_.at({j, n}) = s;
      }
    TTu_ = geo_.raise_first(TT_);
    TTsc_ = pool().zero();
    for (int j = 0; j < N; ++j)
      for (int n = 0; n < N; ++n)
        TTsc_ = p.add(TTsc_, p.mul(gi.at({j, n}), TT_.at({j, n})));
    have_TT_ = true;
  }
  return TT_;
}

TensorField ConformalSpace::weyl_type(const RhoSelector& rho,
                                      const CurvatureParams& prm) {
  require_dim3();
  ExprPool& p = pool();
  const int N = dim();
  TensorField K = curvature_family(prm, geo_);
  RicciContractions kc = ricci_contractions(K, geo_);
  const TensorField& gs = geo_.g();
  torsion_divergence();
  torsion_square();
  TensorField sig1 = sigma(rho.s1, rho.r[0]);
  TensorField sig2 = sigma(rho.s2, rho.r[1]);
  TensorField th1 = theta(rho.r[2], rho.r[3]);
  TensorField th2 = theta(rho.r[4], rho.r[5]);
  TensorField th3 = theta(rho.r[6], rho.r[7]);
  Expr c1 = p.constant(1.0 / (N - 2));
  Expr c2 = p.constant(1.0 / ((N - 1.0) * (N - 2.0)));
  Expr u = p.constant(prm.u), u2 = p.constant(prm.u2), v = p.constant(prm.v),
       v2 = p.constant(prm.v2), w = p.constant(prm.w);
  Expr vw = p.constant(prm.v2 + prm.w);
  TensorField out(N, {Slot::Up, Slot::Down, Slot::Down, Slot::Down}, p.zero());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n) {
          Expr val = K.at({i, j, m, n});
          Expr a = p.zero();
          if (i == m) a = p.add(a, kc.down.at({j, n}));
          if (i == n) a = p.sub(a, kc.down.at({j, m}));
          a = p.add(a, p.mul(kc.mixed.at({i, m}), gs.at({j, n})));
          a = p.sub(a, p.mul(kc.mixed.at({i, n}), gs.at({j, m})));
          val = p.add(val, p.mul(c1, a));
          Expr dd = p.zero();
          if (i == m) dd = p.add(dd, gs.at({j, n}));
          if (i == n) dd = p.sub(dd, gs.at({j, m}));
          val = p.sub(val, p.mul(c2, p.mul(kc.scalar, dd)));
          val = p.add(val, p.mul(u, sig1.at({i, j, m, n})));
          val = p.add(val, p.mul(u2, sig2.at({i, j, n, m})));
          val = p.add(val, p.mul(v, th1.at({i, j, m, n})));
          val = p.add(val, p.mul(v2, th2.at({i, j, n, m})));
          val = p.add(val, p.mul(w, th3.at({i, m, n, j})));
          Expr b = p.zero();
          if (i == m) b = p.add(b, divT_.at({j, n}));
          if (i == n) b = p.sub(b, divT_.at({j, m}));
          b = p.add(b, p.mul(divTu_.at({i, m}), gs.at({j, n})));
          b = p.sub(b, p.mul(divTu_.at({i, n}), gs.at({j, m})));
          val = p.sub(val, p.mul(u, p.mul(c1, b)));
          Expr q = p.zero();
          if (i == m) q = p.add(q, TT_.at({j, n}));
          if (i == n) q = p.sub(q, TT_.at({j, m}));
          q = p.add(q, p.mul(TTu_.at({i, m}), gs.at({j, n})));
          q = p.sub(q, p.mul(TTu_.at({i, n}), gs.at({j, m})));
          val = p.sub(val, p.mul(vw, p.mul(c1, q)));
          val = p.add(val, p.mul(vw, p.mul(c2, p.mul(TTsc_, dd))));
          out.at({i, j, m, n}) = val;
        }
  return out;
}

TensorField ConformalSpace::weyl_type_covariant(const RhoSelector& rho,
                                                const CurvatureParams& prm) {
  TensorField c = weyl_type(rho, prm);
  return geo_.lower_first(c);
}

TensorField psi_gradient_from_traces(ConformalSpace& base,
                                     ConformalSpace& image) {
  ExprPool& p = base.pool();
  const int N = base.dim();
  const TensorField& gb = base.geometry().gamma();
  const TensorField& gi = image.geometry().gamma();
  Expr invN = p.constant(1.0 / N);
  TensorField out(N, {Slot::Down}, p.zero());
  for (int j = 0; j < N; ++j) {
    Expr s = p.zero();
    for (int a = 0; a < N; ++a)
      s = p.add(s, p.sub(gi.at({a, j, a}), gb.at({a, j, a})));
    out.at({j}) = p.mul(invN, s);
  }
  return out;
}

TensorField psi_gradient_from_dets(ConformalSpace& base,
                                   ConformalSpace& image) {
  ExprPool& p = base.pool();
  const int N = base.dim();
  Expr d = p.sub(image.geometry().ln_abs_detg(), base.geometry().ln_abs_detg());
  Expr inv2N = p.constant(1.0 / (2.0 * N));
  TensorField out(N, {Slot::Down}, p.zero());
  for (int j = 0; j < N; ++j) out.at({j}) = p.mul(inv2N, p.diff(d, j));
  return out;
}

DetectResult detect_conformal(const MetricField& A, const MetricField& B,
                              const std::vector<Point>& points) {
  if (A.dim != B.dim || A.coords != B.coords)
    throw Error(ErrorCode::ShapeMismatch,
                "spaces differ in dimension or coordinates");
  if (A.pool != B.pool)
    throw Error(ErrorCode::ShapeMismatch,
                "spaces must share one expression pool");
  const int N = A.dim;
  DetectResult res;
  res.conformal = true;
  for (size_t pi = 0; pi < points.size(); ++pi) {
    EvalContext ctx(*A.pool, points[pi]);
    bool have_ratio = false;
    double ratio = 0.0;
    int wi = -1, wj = -1;
    for (int i = 0; i < N && res.conformal; ++i)
      for (int j = 0; j < N; ++j) {
        double a = ctx.eval(A.G.at({i, j}));
        double b = ctx.eval(B.G.at({i, j}));
        if (std::fabs(a) <= 1e-12) continue;
        double q = b / a;
        if (!have_ratio) {
          have_ratio = true;
          ratio = q;
          wi = i;
          wj = j;
        } else if (std::fabs(q - ratio) > 1e-9) {
          res.conformal = false;
          std::ostringstream msg;
          msg << "component ratios disagree at point " << pi << ": G_{" << wi + 1
              << wj + 1 << "} gives " << ratio << ", G_{" << i + 1 << j + 1
              << "} gives " << q;
          res.witness = msg.str();
          break;
        }
      }
    if (!res.conformal) break;
    if (!have_ratio) {
      res.skipped_points.push_back(pi);
      continue;
    }
    if (ratio <= 0.0) {
      res.conformal = false;
      std::ostringstream msg;
      msg << "negative scale factor " << ratio << " at point " << pi;
      res.witness = msg.str();
      break;
    }
    res.psi_values.push_back(0.5 * std::log(ratio));
  }

  // Independent verdict: equality of the connection-level invariants.
  ConformalSpace sa(A), sb(B);
  TorsionSelector r;  // all-ones selector
  TensorField ta = sa.thomas(r), tb = sb.thomas(r);
  double dev = 0.0, scale = 0.0;
  for (const Point& pt : points) {
    EvalContext ctx(*A.pool, pt);
    for (size_t c = 0; c < ta.components().size(); ++c) {
      double va = ctx.eval(ta.components()[c]);
      double vb = ctx.eval(tb.components()[c]);
      dev = std::max(dev, std::fabs(va - vb));
      scale = std::max(scale, std::max(std::fabs(va), std::fabs(vb)));
    }
  }
  res.thomas_equal = dev / (1.0 + scale) <= 1e-7;
  return res;
}

}  // namespace gri
