#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gri/tensor.hpp"
#include "gri/verify.hpp"

using namespace gri;

namespace {

std::vector<Point> box_points(int dim, int count, uint64_t seed,
                              double lo = -0.5, double hi = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Point> pts(count);
  for (auto& p : pts) {
    p.x.resize(dim);
    for (auto& v : p.x) v = u(rng);
  }
  return pts;
}

double max_abs(ExprPool& p, const TensorField& t, const std::vector<Point>& pts) {
  double m = 0;
  for (const Point& pt : pts) {
    EvalContext ctx(p, pt);
    for (Expr e : t.components()) m = std::max(m, std::fabs(ctx.eval(e)));
  }
  return m;
}

double max_diff(ExprPool& p, const TensorField& a, const TensorField& b,
                const std::vector<Point>& pts) {
  double m = 0;
  for (const Point& pt : pts) {
    EvalContext ctx(p, pt);
    for (size_t c = 0; c < a.components().size(); ++c)
      m = std::max(m, std::fabs(ctx.eval(a.components()[c]) -
                                ctx.eval(b.components()[c])));
  }
  return m;
}

MetricField flat_metric(ExprPool& p, int N) {
  MetricField m;
  m.pool = &p;
  m.dim = N;
  for (int i = 0; i < N; ++i) m.coords.push_back("x" + std::to_string(i + 1));
  m.G = TensorField(N, {Slot::Down, Slot::Down}, p.zero());
  for (int i = 0; i < N; ++i) m.G.at({i, i}) = p.one();
  return m;
}

// N=3 flat symmetric part with F_12 = x3
MetricField delta_plus_f12(ExprPool& p) {
  MetricField m = flat_metric(p, 3);
  Expr x3 = p.coord(2);
  m.G.at({0, 1}) = p.add(m.G.at({0, 1}), x3);
  m.G.at({1, 0}) = p.sub(m.G.at({1, 0}), x3);
  return m;
}

}  // namespace

TEST_CASE("metric split: arithmetic example") {
  ExprPool p;
  MetricField m = MetricField::from_strings(
      p, {"x1", "x2"}, {{"2", "0.3"}, {"-0.1", "1"}});
  TensorField g = split_metric_symmetric(m);
  TensorField F = split_metric_antisymmetric(m);
  Point pt{{0.0, 0.0}};
  EvalContext ctx(p, pt);
  CHECK(ctx.eval(g.at({0, 0})) == doctest::Approx(2.0));
  CHECK(ctx.eval(g.at({0, 1})) == doctest::Approx(0.1));
  CHECK(ctx.eval(g.at({1, 0})) == doctest::Approx(0.1));
  CHECK(ctx.eval(F.at({0, 1})) == doctest::Approx(0.2));
  CHECK(ctx.eval(F.at({1, 0})) == doctest::Approx(-0.2));
}

TEST_CASE("metric split: symmetric metric has F = 0 and g + F = G") {
  ExprPool p;
  MetricField m = MetricField::from_strings(
      p, {"x1", "x2"}, {{"1", "x1*x2"}, {"x1*x2", "2"}});
  TensorField F = split_metric_antisymmetric(m);
  for (Expr e : F.components()) CHECK(e == p.zero());

  InstanceSpec spec;
  spec.dim = 3;
  spec.seed = 5;
  ExprPool p2;
  MetricField r = random_space(p2, spec);
  TensorField g2 = split_metric_symmetric(r);
  TensorField F2 = split_metric_antisymmetric(r);
  TensorField sum(3, {Slot::Down, Slot::Down}, p2.zero());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      sum.at({i, j}) = p2.add(g2.at({i, j}), F2.at({i, j}));
  CHECK(max_diff(p2, sum, r.G, box_points(3, 10, 1)) < 1e-12);
}

TEST_CASE("inverse metric: diagonal and identity") {
  ExprPool p;
  MetricField m = MetricField::from_strings(
      p, {"x1", "x2"}, {{"1", "0"}, {"0", "x1^2"}});
  Geometry geo(m);
  Point pt{{1.7, 0.3}};
  EvalContext ctx(p, pt);
  CHECK(ctx.eval(geo.ginv().at({0, 0})) == doctest::Approx(1.0));
  CHECK(ctx.eval(geo.ginv().at({1, 1})) == doctest::Approx(1.0 / (1.7 * 1.7)));
  CHECK(ctx.eval(geo.ginv().at({0, 1})) == doctest::Approx(0.0));
  CHECK(ctx.eval(geo.detg()) == doctest::Approx(1.7 * 1.7));

  ExprPool p2;
  MetricField id = flat_metric(p2, 4);
  Geometry geo2(id);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(eval(p2, geo2.ginv().at({i, j}), Point{{0, 0, 0, 0}}) ==
            doctest::Approx(i == j ? 1.0 : 0.0));
}

TEST_CASE("inverse metric: g * ginv = identity on random spaces") {
  for (int N : {2, 3, 4}) {
    ExprPool p;
    InstanceSpec spec;
    spec.dim = N;
    spec.seed = 7 + N;
    MetricField m = random_space(p, spec);
    Geometry geo(m);
    auto pts = box_points(N, 10, 3);
    double worst = 0;
    for (const Point& pt : pts) {
      EvalContext ctx(p, pt);
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
          double s = 0;
          for (int a = 0; a < N; ++a)
            s += ctx.eval(geo.g().at({i, a})) * ctx.eval(geo.ginv().at({a, j}));
          worst = std::max(worst, std::fabs(s - (i == j ? 1.0 : 0.0)));
        }
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("dimension limits") {
  ExprPool p;
  CHECK_THROWS_AS(MetricField::from_strings(p, {"x1"}, {{"1"}}), Error);
  std::vector<std::string> c5{"x1", "x2", "x3", "x4", "x5"};
  std::vector<std::vector<std::string>> g5(5, std::vector<std::string>(5, "0"));
  for (int i = 0; i < 5; ++i) g5[i][i] = "1";
  try {
    MetricField::from_strings(p, c5, g5);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionUnsupported);
  }
}

TEST_CASE("christoffel symbols: flat metric vanishes") {
  ExprPool p;
  MetricField m = flat_metric(p, 3);
  Geometry geo(m);
  for (Expr e : geo.christoffel().components()) CHECK(e == p.zero());
}

TEST_CASE("christoffel symbols on the 2-sphere") {
  ExprPool p;
  MetricField m = MetricField::from_strings(
      p, {"x1", "x2"}, {{"1", "0"}, {"0", "sin(x1)^2"}});
  Geometry geo(m);
  for (double th : {0.5, 1.1, 2.3}) {
    Point pt{{th, 0.8}};
    EvalContext ctx(p, pt);
    CHECK(ctx.eval(geo.gamma().at({0, 1, 1})) ==
          doctest::Approx(-std::sin(th) * std::cos(th)).epsilon(1e-12));
    CHECK(ctx.eval(geo.gamma().at({1, 0, 1})) ==
          doctest::Approx(std::cos(th) / std::sin(th)).epsilon(1e-12));
  }
}

TEST_CASE("christoffel symbols with torsion: constant components") {
  ExprPool p;
  MetricField m = delta_plus_f12(p);
  Geometry geo(m);
  auto pts = box_points(3, 5, 9);
  for (const Point& pt : pts) {
    EvalContext ctx(p, pt);
    CHECK(ctx.eval(geo.christoffel().at({0, 1, 2})) == doctest::Approx(-0.5));
    CHECK(ctx.eval(geo.torsion().at({0, 1, 2})) == doctest::Approx(-0.5));
    CHECK(ctx.eval(geo.torsion().at({1, 0, 2})) == doctest::Approx(0.5));
    CHECK(ctx.eval(geo.torsion().at({2, 0, 1})) == doctest::Approx(-0.5));
  }
}

TEST_CASE("connection traces") {
  for (int N : {3, 4}) {
    ExprPool p;
    InstanceSpec spec;
    spec.dim = N;
    spec.seed = 21 + N;
    MetricField m = random_space(p, spec);
    Geometry geo(m);
    auto pts = box_points(N, 10, 4);
    double worst_g = 0, worst_t = 0;
    for (const Point& pt : pts) {
      EvalContext ctx(p, pt);
      for (int j = 0; j < N; ++j) {
        double tr = 0, ttr = 0;
        for (int a = 0; a < N; ++a) {
          tr += ctx.eval(geo.gamma().at({a, j, a}));
          ttr += ctx.eval(geo.torsion().at({a, j, a}));
        }
        double lhs = 0.5 * ctx.eval(p.diff(geo.ln_abs_detg(), j));
        worst_g = std::max(worst_g, std::fabs(tr - lhs));
        worst_t = std::max(worst_t, std::fabs(ttr));
      }
    }
    CHECK(worst_g < 1e-10);
    CHECK(worst_t < 1e-12);
  }
}

TEST_CASE("associated covariant derivative") {
  ExprPool p;
  InstanceSpec spec;
  spec.dim = 3;
  spec.seed = 33;
  MetricField m = random_space(p, spec);
  Geometry geo(m);
  auto pts = box_points(3, 10, 5);

  // scalar: semicolon = comma
  TensorField phi(3, {}, p.parse("sin(x1)*x2", m.coords));
  TensorField dphi = cov_deriv_assoc(phi, geo);
  for (int k = 0; k < 3; ++k)
    CHECK(max_diff(p, TensorField(3, {}, dphi.at({k})),
                   TensorField(3, {}, p.diff(phi.at({}), k)), pts) == 0.0);

  // metricity of the symmetric part
  TensorField dg = cov_deriv_assoc(geo.g(), geo);
  CHECK(max_abs(p, dg, pts) < 1e-10);

  // flat space: reduces to partials
  ExprPool p2;
  MetricField flat = flat_metric(p2, 3);
  Geometry geo2(flat);
  TensorField v(3, {Slot::Up}, p2.zero());
  for (int i = 0; i < 3; ++i)
    v.at({i}) = p2.parse("sin(x" + std::to_string(i + 1) + ")", flat.coords);
  TensorField dv = cov_deriv_assoc(v, geo2);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      CHECK(dv.at({i, k}) == p2.diff(v.at({i}), k));

  // rank limit
  TensorField r5(3, {Slot::Down, Slot::Down, Slot::Down, Slot::Down,
                     Slot::Down}, p.zero());
  CHECK_THROWS_AS(cov_deriv_assoc(r5, geo), Error);
}

TEST_CASE("four covariant differentiations of a (1,1) field") {
  ExprPool p;
  InstanceSpec spec;
  spec.dim = 3;
  spec.seed = 44;
  MetricField m = random_space(p, spec);
  Geometry geo(m);
  auto pts = box_points(3, 8, 6);

  TensorField a(3, {Slot::Up, Slot::Down}, p.zero());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      a.at({i, j}) = p.parse("x" + std::to_string(i + 1) + "*x" +
                                 std::to_string(j + 1),
                             m.coords);

  CHECK_THROWS_AS(cov_deriv_kind(0, a, geo), Error);
  CHECK_THROWS_AS(cov_deriv_kind(5, a, geo), Error);

  // kind 1 - kind 2 = 2 T^i_{ak} a^a_j + 2 T^a_{kj} a^i_a
  TensorField d1 = cov_deriv_kind(1, a, geo);
  TensorField d2 = cov_deriv_kind(2, a, geo);
  const TensorField& T = geo.torsion();
  double worst = 0;
  for (const Point& pt : pts) {
    EvalContext ctx(p, pt);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          double lhs = ctx.eval(d1.at({i, j, k})) - ctx.eval(d2.at({i, j, k}));
          double rhs = 0;
          for (int al = 0; al < 3; ++al)
            rhs += 2 * ctx.eval(T.at({i, al, k})) * ctx.eval(a.at({al, j})) +
                   2 * ctx.eval(T.at({al, k, j})) * ctx.eval(a.at({i, al}));
          worst = std::max(worst, std::fabs(lhs - rhs));
        }
  }
  CHECK(worst < 1e-10);

  // identity tensor: kinds 1,2 vanish, kind 3 gives 2T, kind 4 gives -2T
  TensorField id(3, {Slot::Up, Slot::Down}, p.zero());
  for (int i = 0; i < 3; ++i) id.at({i, i}) = p.one();
  TensorField e1 = cov_deriv_kind(1, id, geo);
  TensorField e2 = cov_deriv_kind(2, id, geo);
  TensorField e3 = cov_deriv_kind(3, id, geo);
  TensorField e4 = cov_deriv_kind(4, id, geo);
  CHECK(max_abs(p, e1, pts) < 1e-12);
  CHECK(max_abs(p, e2, pts) < 1e-12);
  double w3 = 0, w4 = 0;
  for (const Point& pt : pts) {
    EvalContext ctx(p, pt);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          double t = ctx.eval(T.at({i, j, k}));
          w3 = std::max(w3, std::fabs(ctx.eval(e3.at({i, j, k})) - 2 * t));
          w4 = std::max(w4, std::fabs(ctx.eval(e4.at({i, j, k})) + 2 * t));
        }
  }
  CHECK(w3 < 1e-12);
  CHECK(w4 < 1e-12);

  // symmetric metric: all four kinds coincide with the associated derivative
  ExprPool ps;
  MetricField sym = MetricField::from_strings(
      ps, {"x1", "x2", "x3"},
      {{"1", "0.1*x3", "0"}, {"0.1*x3", "1", "0"}, {"0", "0", "1"}});
  Geometry geos(sym);
  TensorField as(3, {Slot::Up, Slot::Down}, ps.zero());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      as.at({i, j}) =
          ps.parse("sin(x" + std::to_string(1 + (i + j) % 3) + ")", sym.coords);
  TensorField ref = cov_deriv_assoc(as, geos);
  for (int kind = 1; kind <= 4; ++kind)
    CHECK(max_diff(ps, cov_deriv_kind(kind, as, geos), ref,
                   box_points(3, 5, 8)) < 1e-12);
}

TEST_CASE("curvature of the associated space") {
  ExprPool p;
  MetricField flat = flat_metric(p, 3);
  Geometry geo(flat);
  for (Expr e : geo.riemann().components()) CHECK(e == p.zero());

  // unit 2-sphere: scalar curvature +2
  ExprPool p2;
  MetricField sph = MetricField::from_strings(
      p2, {"x1", "x2"}, {{"1", "0"}, {"0", "sin(x1)^2"}});
  Geometry geo2(sph);
  RicciContractions rc = ricci_contractions(geo2.riemann(), geo2);
  for (double th : {0.6, 1.2, 2.0})
    CHECK(eval(p2, rc.scalar, Point{{th, 0.4}}) ==
          doctest::Approx(2.0).epsilon(1e-10));

  // antisymmetry in the last index pair
  ExprPool p3;
  InstanceSpec spec;
  spec.dim = 3;
  spec.seed = 55;
  MetricField m = random_space(p3, spec);
  Geometry geo3(m);
  auto pts = box_points(3, 5, 10);
  double worst = 0;
  for (const Point& pt : pts) {
    EvalContext ctx(p3, pt);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int mm = 0; mm < 3; ++mm)
          for (int n = 0; n < 3; ++n)
            worst = std::max(worst,
                             std::fabs(ctx.eval(geo3.riemann().at({i, j, mm, n})) +
                                       ctx.eval(geo3.riemann().at({i, j, n, mm}))));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("curvature family") {
  ExprPool p;
  InstanceSpec spec;
  spec.dim = 3;
  spec.seed = 66;
  MetricField m = random_space(p, spec);
  Geometry geo(m);

  // zero parameters reproduce the base curvature exactly
  TensorField K0 = curvature_family(CurvatureParams{}, geo);
  for (size_t c = 0; c < K0.components().size(); ++c)
    CHECK(K0.components()[c] == geo.riemann().components()[c]);

  // symmetric metric: torsion terms vanish for any parameters
  ExprPool p2;
  MetricField sym = MetricField::from_strings(
      p2, {"x1", "x2", "x3"},
      {{"1", "0.2*x1", "0"}, {"0.2*x1", "1", "0"}, {"0", "0", "1+x2^2"}});
  Geometry geo2(sym);
  TensorField K = curvature_family(CurvatureParams{0.7, -0.3, 0.2, 0.9, -1.1},
                                   geo2);
  CHECK(max_diff(p2, K, geo2.riemann(), box_points(3, 5, 11)) < 1e-12);
}

TEST_CASE("contraction relation between curvature families") {
  for (int N : {3, 4}) {
    ExprPool p;
    InstanceSpec spec;
    spec.dim = N;
    spec.seed = 77 + N;
    MetricField m = random_space(p, spec);
    Geometry geo(m);
    auto pts = box_points(N, 10, 12);
    RicciContractions rr = ricci_contractions(geo.riemann(), geo);
    const TensorField& T = geo.torsion();
    const TensorField& Td = geo.torsion_deriv();
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 3; ++trial) {
      CurvatureParams prm{u(rng), u(rng), u(rng), u(rng), u(rng)};
      TensorField K = curvature_family(prm, geo);
      RicciContractions kc = ricci_contractions(K, geo);
      double worst = 0;
      for (const Point& pt : pts) {
        EvalContext ctx(p, pt);
        for (int j = 0; j < N; ++j)
          for (int mm = 0; mm < N; ++mm) {
            double div = 0, tt = 0;
            for (int a = 0; a < N; ++a) {
              div += ctx.eval(Td.at({a, j, mm, a}));
              for (int b = 0; b < N; ++b)
                tt += ctx.eval(T.at({a, j, b})) * ctx.eval(T.at({b, a, mm}));
            }
            double lhs = ctx.eval(kc.down.at({j, mm}));
            double rhs = ctx.eval(rr.down.at({j, mm})) + prm.u * div +
                         (prm.v2 + prm.w) * tt;
            worst = std::max(worst, std::fabs(lhs - rhs));
          }
      }
      CHECK(worst < 1e-9);
    }
  }
}

TEST_CASE("torsion from semicolon derivatives of the antisymmetric part") {
  ExprPool p;
  InstanceSpec spec;
  spec.dim = 3;
  spec.seed = 88;
  MetricField m = random_space(p, spec);
  Geometry geo(m);
  TensorField dF = cov_deriv_assoc(geo.F(), geo);
  const TensorField& gi = geo.ginv();
  auto pts = box_points(3, 10, 13);
  double worst = 0;
  for (const Point& pt : pts) {
    EvalContext ctx(p, pt);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          double rhs = 0;
          for (int a = 0; a < 3; ++a)
            rhs += 0.5 * ctx.eval(gi.at({i, a})) *
                   (ctx.eval(dF.at({j, a, k})) - ctx.eval(dF.at({j, k, a})) +
                    ctx.eval(dF.at({a, k, j})));
          worst = std::max(
              worst, std::fabs(rhs - ctx.eval(geo.torsion().at({i, j, k}))));
        }
  }
  CHECK(worst < 1e-9);
}
