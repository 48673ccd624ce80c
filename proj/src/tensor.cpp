#include "gri/tensor.hpp"

#include <cmath>

namespace gri {

TensorField::TensorField(int dim, std::vector<Slot> signature, Expr fill)
    : dim_(dim), sig_(std::move(signature)) {
  size_t n = 1;
  for (size_t k = 0; k < sig_.size(); ++k) n *= static_cast<size_t>(dim_);
  comp_.assign(n, fill);
}

size_t TensorField::offset(std::span<const int> idx) const {
  if (idx.size() != sig_.size())
    throw Error(ErrorCode::ShapeMismatch, "tensor index arity mismatch");
  size_t off = 0;
  for (int v : idx) {
    if (v < 0 || v >= dim_)
      throw Error(ErrorCode::ShapeMismatch, "tensor index out of range");
    off = off * static_cast<size_t>(dim_) + static_cast<size_t>(v);
  }
  return off;
}

MetricField MetricField::from_strings(ExprPool& pool,
                                      const std::vector<std::string>& coords,
                                      const std::vector<std::vector<std::string>>& entries,
                                      const std::string& psi_text) {
  const int N = static_cast<int>(coords.size());
  if (N < 2 || N > 4)
    throw Error(ErrorCode::DimensionUnsupported,
                "dimension " + std::to_string(N) + " not supported (need 2..4)");
  if (static_cast<int>(entries.size()) != N)
    throw Error(ErrorCode::ShapeMismatch, "metric row count != dimension");
  MetricField m;
  m.pool = &pool;
  m.dim = N;
  m.coords = coords;
  m.G = TensorField(N, {Slot::Down, Slot::Down}, pool.zero());
  for (int i = 0; i < N; ++i) {
    if (static_cast<int>(entries[i].size()) != N)
      throw Error(ErrorCode::ShapeMismatch, "metric column count != dimension");
    for (int j = 0; j < N; ++j)
      m.G.at({i, j}) = pool.parse(entries[i][j], coords);
  }
  if (!psi_text.empty()) m.psi = pool.parse(psi_text, coords);
  return m;
}

namespace {

Expr half_of(ExprPool& p, Expr e) { return p.mul(p.constant(0.5), e); }

// Determinant of an n x n Expr matrix by cofactor expansion along row 0.
Expr det_expr(ExprPool& p, const std::vector<std::vector<Expr>>& a) {
  const size_t n = a.size();
  if (n == 1) return a[0][0];
  Expr acc = p.zero();
  for (size_t j = 0; j < n; ++j) {
    std::vector<std::vector<Expr>> minor(n - 1, std::vector<Expr>(n - 1));
    for (size_t r = 1; r < n; ++r) {
      size_t cc = 0;
      for (size_t c = 0; c < n; ++c) {
        if (c == j) continue;
        minor[r - 1][cc++] = a[r][c];
      }
    }
    Expr term = p.mul(a[0][j], det_expr(p, minor));
    acc = (j % 2 == 0) ? p.add(acc, term) : p.sub(acc, term);
  }
  return acc;
}

}  // namespace

Geometry::Geometry(const MetricField& metric) : metric_(&metric) {
  if (metric.dim < 2 || metric.dim > 4)
    throw Error(ErrorCode::DimensionUnsupported,
                "dimension " + std::to_string(metric.dim) +
                    " not supported (need 2..4)");
}

const TensorField& Geometry::g() {
  if (!have_split_) {
    g_ = split_metric_symmetric(*metric_);
    F_ = split_metric_antisymmetric(*metric_);
    have_split_ = true;
  }
  return g_;
}

const TensorField& Geometry::F() {
  g();
  return F_;
}

const TensorField& Geometry::ginv() {
  if (!have_inv_) {
    ExprPool& p = pool();
    const int N = dim();
    const TensorField& gs = g();
    std::vector<std::vector<Expr>> a(N, std::vector<Expr>(N));
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) a[i][j] = gs.at({i, j});
    detg_ = det_expr(p, a);
    ginv_ = TensorField(N, {Slot::Up, Slot::Up}, p.zero());
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        // adjugate: ginv[i][j] = cofactor(j,i)/det; g symmetric so (i,j)=(j,i)
        std::vector<std::vector<Expr>> minor(N - 1, std::vector<Expr>(N - 1));
        int rr = 0;
        for (int r = 0; r < N; ++r) {
          if (r == j) continue;
          int cc = 0;
          for (int c = 0; c < N; ++c) {
            if (c == i) continue;
            minor[rr][cc++] = a[r][c];
          }
          ++rr;
        }
        Expr cof = det_expr(p, minor);
        if ((i + j) % 2 != 0) cof = p.neg(cof);
        ginv_.at({i, j}) = p.div(cof, detg_);
      }
    lng_ = half_of(p, p.ln(p.pow(detg_, 2.0)));
    have_inv_ = true;
  }
  return ginv_;
}

Expr Geometry::detg() {
  ginv();
  return detg_;
}

Expr Geometry::ln_abs_detg() {
  ginv();
  return lng_;
}

const TensorField& Geometry::christoffel_lower() {
  if (!have_gl_) {
    ExprPool& p = pool();
    const int N = dim();
    const TensorField& G = metric_->G;
    gl_ = TensorField(N, {Slot::Down, Slot::Down, Slot::Down}, p.zero());
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k) {
          Expr s = p.sub(p.diff(G.at({j, i}), k), p.diff(G.at({j, k}), i));
          s = p.add(s, p.diff(G.at({i, k}), j));
          gl_.at({i, j, k}) = half_of(p, s);
        }
    have_gl_ = true;
  }
  return gl_;
}

const TensorField& Geometry::christoffel() {
  if (!have_gamma_) {
    ExprPool& p = pool();
    const int N = dim();
    const TensorField& low = christoffel_lower();
    const TensorField& gi = ginv();
    gamma_full_ = TensorField(N, {Slot::Up, Slot::Down, Slot::Down}, p.zero());
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k) {
          Expr s = p.zero();
          for (int a = 0; a < N; ++a)
            s = p.add(s, p.mul(gi.at({i, a}), low.at({a, j, k})));
          gamma_full_.at({i, j, k}) = s;
        }
    gamma_sym_ = TensorField(N, {Slot::Up, Slot::Down, Slot::Down}, p.zero());
    torsion_ = TensorField(N, {Slot::Up, Slot::Down, Slot::Down}, p.zero());
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k) {
          Expr a = gamma_full_.at({i, j, k});
          Expr b = gamma_full_.at({i, k, j});
          gamma_sym_.at({i, j, k}) = half_of(p, p.add(a, b));
          torsion_.at({i, j, k}) = half_of(p, p.sub(a, b));
        }
    have_gamma_ = true;
  }
  return gamma_full_;
}

const TensorField& Geometry::gamma() {
  christoffel();
  return gamma_sym_;
}

const TensorField& Geometry::torsion() {
  christoffel();
  return torsion_;
}

const TensorField& Geometry::torsion_deriv() {
  if (!have_tderiv_) {
    tderiv_ = cov_deriv_assoc(torsion(), *this);
    have_tderiv_ = true;
  }
  return tderiv_;
}

const TensorField& Geometry::riemann() {
  if (!have_riemann_) {
    ExprPool& p = pool();
    const int N = dim();
    const TensorField& gm = gamma();
    riemann_ = TensorField(
        N, {Slot::Up, Slot::Down, Slot::Down, Slot::Down}, p.zero());
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int m = 0; m < N; ++m)
          for (int n = 0; n < N; ++n) {
            Expr s = p.sub(p.diff(gm.at({i, j, m}), n),
                           p.diff(gm.at({i, j, n}), m));
            for (int a = 0; a < N; ++a) {
              s = p.add(s, p.mul(gm.at({a, j, m}), gm.at({i, a, n})));
              s = p.sub(s, p.mul(gm.at({a, j, n}), gm.at({i, a, m})));
            }
            riemann_.at({i, j, m, n}) = s;
          }
    have_riemann_ = true;
  }
  return riemann_;
}

TensorField Geometry::raise_first(const TensorField& t) {
  if (t.rank() < 1 || t.signature()[0] != Slot::Down)
    throw Error(ErrorCode::ShapeMismatch, "raise_first needs a leading down slot");
  ExprPool& p = pool();
  const int N = dim();
  const TensorField& gi = ginv();
  std::vector<Slot> sig = t.signature();
  sig[0] = Slot::Up;
  TensorField out(N, sig, p.zero());
  std::vector<int> idx(t.rank(), 0);
  const size_t total = t.components().size();
  for (size_t lin = 0; lin < total; ++lin) {
    size_t rem = lin;
    for (int s = t.rank() - 1; s >= 0; --s) {
      idx[s] = static_cast<int>(rem % N);
      rem /= N;
    }
    Expr sum = p.zero();
    std::vector<int> src = idx;
    for (int a = 0; a < N; ++a) {
      src[0] = a;
      sum = p.add(sum, p.mul(gi.at({idx[0], a}), t.at(src)));
    }
    out.at(idx) = sum;
  }
  return out;
}

TensorField Geometry::lower_first(const TensorField& t) {
  if (t.rank() < 1 || t.signature()[0] != Slot::Up)
    throw Error(ErrorCode::ShapeMismatch, "lower_first needs a leading up slot");
  ExprPool& p = pool();
  const int N = dim();
  const TensorField& gs = g();
  std::vector<Slot> sig = t.signature();
  sig[0] = Slot::Down;
  TensorField out(N, sig, p.zero());
  std::vector<int> idx(t.rank(), 0);
  const size_t total = t.components().size();
  for (size_t lin = 0; lin < total; ++lin) {
    size_t rem = lin;
    for (int s = t.rank() - 1; s >= 0; --s) {
      idx[s] = static_cast<int>(rem % N);
      rem /= N;
    }
    Expr sum = p.zero();
    std::vector<int> src = idx;
    for (int a = 0; a < N; ++a) {
      src[0] = a;
      sum = p.add(sum, p.mul(gs.at({idx[0], a}), t.at(src)));
    }
    out.at(idx) = sum;
  }
  return out;
}

TensorField split_metric_symmetric(const MetricField& m) {
  ExprPool& p = *m.pool;
  TensorField out(m.dim, {Slot::Down, Slot::Down}, p.zero());
  for (int i = 0; i < m.dim; ++i)
    for (int j = 0; j < m.dim; ++j)
      out.at({i, j}) = half_of(p, p.add(m.G.at({i, j}), m.G.at({j, i})));
  return out;
}

TensorField split_metric_antisymmetric(const MetricField& m) {
  ExprPool& p = *m.pool;
  TensorField out(m.dim, {Slot::Down, Slot::Down}, p.zero());
  for (int i = 0; i < m.dim; ++i)
    for (int j = 0; j < m.dim; ++j)
      out.at({i, j}) = half_of(p, p.sub(m.G.at({i, j}), m.G.at({j, i})));
  return out;
}

TensorField cov_deriv_assoc(const TensorField& field, Geometry& geo) {
  if (field.rank() > 4)
    throw Error(ErrorCode::RankUnsupported,
                "covariant derivative limited to rank <= 4 input");
  ExprPool& p = geo.pool();
  const int N = geo.dim();
  const TensorField& gm = geo.gamma();
  std::vector<Slot> sig = field.signature();
  sig.push_back(Slot::Down);
  TensorField out(N, sig, p.zero());
  const int rank = field.rank();
  std::vector<int> idx(rank, 0);
  const size_t total = field.components().size();
  for (size_t lin = 0; lin < total; ++lin) {
    size_t rem = lin;
    for (int s = rank - 1; s >= 0; --s) {
      idx[s] = static_cast<int>(rem % N);
      rem /= N;
    }
    for (int n = 0; n < N; ++n) {
      Expr s = p.diff(field.at(idx), n);
      std::vector<int> src = idx;
      for (int slot = 0; slot < rank; ++slot) {
        const int is = idx[slot];
        for (int a = 0; a < N; ++a) {
          src[slot] = a;
          Expr term = field.at(src);
          if (field.signature()[slot] == Slot::Up)
            s = p.add(s, p.mul(gm.at({is, a, n}), term));
          else
            s = p.sub(s, p.mul(gm.at({a, is, n}), term));
        }
        src[slot] = is;
      }
      std::vector<int> oidx = idx;
      oidx.push_back(n);
      out.at(oidx) = s;
    }
  }
  return out;
}

TensorField cov_deriv_kind(int kind, const TensorField& field, Geometry& geo) {
  if (kind < 1 || kind > 4)
    throw Error(ErrorCode::InvalidKind,
                "covariant differentiation kind must be 1..4");
  if (field.rank() != 2 || field.signature()[0] != Slot::Up ||
      field.signature()[1] != Slot::Down)
    throw Error(ErrorCode::ShapeMismatch,
                "kind-selected covariant derivative expects a type (1,1) field");
  ExprPool& p = geo.pool();
  const int N = geo.dim();
  const TensorField& G = geo.christoffel();
  const bool up_swapped = (kind == 2 || kind == 4);    // Gamma^i_{k alpha}
  const bool down_swapped = (kind == 2 || kind == 3);  // Gamma^alpha_{k j}
  TensorField out(N, {Slot::Up, Slot::Down, Slot::Down}, p.zero());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        Expr s = p.diff(field.at({i, j}), k);
        for (int a = 0; a < N; ++a) {
          Expr up = up_swapped ? G.at({i, k, a}) : G.at({i, a, k});
          Expr dn = down_swapped ? G.at({a, k, j}) : G.at({a, j, k});
          s = p.add(s, p.mul(up, field.at({a, j})));
          s = p.sub(s, p.mul(dn, field.at({i, a})));
        }
        out.at({i, j, k}) = s;
      }
  return out;
}

TensorField curvature_family(const CurvatureParams& prm, Geometry& geo) {
  ExprPool& p = geo.pool();
  const int N = geo.dim();
  const TensorField& R = geo.riemann();
  const TensorField& T = geo.torsion();
  const TensorField& Td = geo.torsion_deriv();
  const Expr u = p.constant(prm.u), u2 = p.constant(prm.u2),
             v = p.constant(prm.v), v2 = p.constant(prm.v2),
             w = p.constant(prm.w);
  TensorField out(N, {Slot::Up, Slot::Down, Slot::Down, Slot::Down}, p.zero());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n) {
          Expr s = R.at({i, j, m, n});
          s = p.add(s, p.mul(u, Td.at({i, j, m, n})));
          s = p.add(s, p.mul(u2, Td.at({i, j, n, m})));
          Expr q1 = p.zero(), q2 = p.zero(), q3 = p.zero();
          for (int a = 0; a < N; ++a) {
            q1 = p.add(q1, p.mul(T.at({a, j, m}), T.at({i, a, n})));
            q2 = p.add(q2, p.mul(T.at({a, j, n}), T.at({i, a, m})));
            q3 = p.add(q3, p.mul(T.at({a, m, n}), T.at({i, a, j})));
          }
          s = p.add(s, p.mul(v, q1));
          s = p.add(s, p.mul(v2, q2));
          s = p.add(s, p.mul(w, q3));
          out.at({i, j, m, n}) = s;
        }
  return out;
}

RicciContractions ricci_contractions(const TensorField& X, Geometry& geo) {
  if (X.rank() != 4 || X.signature()[0] != Slot::Up)
    throw Error(ErrorCode::ShapeMismatch,
                "contractions expect a type (1,3) field");
  ExprPool& p = geo.pool();
  const int N = geo.dim();
  const TensorField& gi = geo.ginv();
  RicciContractions out;
  out.down = TensorField(N, {Slot::Down, Slot::Down}, p.zero());
  for (int j = 0; j < N; ++j)
    for (int m = 0; m < N; ++m) {
      Expr s = p.zero();
      for (int a = 0; a < N; ++a) s = p.add(s, X.at({a, j, m, a}));
      out.down.at({j, m}) = s;
    }
  out.mixed = TensorField(N, {Slot::Up, Slot::Down}, p.zero());
  for (int i = 0; i < N; ++i)
    for (int m = 0; m < N; ++m) {
      Expr s = p.zero();
      for (int a = 0; a < N; ++a)
        s = p.add(s, p.mul(gi.at({i, a}), out.down.at({a, m})));
      out.mixed.at({i, m}) = s;
    }
  Expr sc = p.zero();
  for (int j = 0; j < N; ++j)
    for (int m = 0; m < N; ++m)
      sc = p.add(sc, p.mul(gi.at({j, m}), out.down.at({j, m})));
  out.scalar = sc;
  return out;
}

}  // namespace gri
