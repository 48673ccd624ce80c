// Compares the parallel point-evaluation kernel against the serial
// reference on a torsion-bearing random space.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "gri/conformal.hpp"
#include "gri/eval.hpp"
#include "gri/verify.hpp"

using namespace gri;

int main(int argc, char** argv) {
  int dim = 3, npoints = 200;
  uint64_t seed = 11;
  if (argc > 1) dim = std::stoi(argv[1]);
  if (argc > 2) npoints = std::stoi(argv[2]);
  if (argc > 3) seed = std::stoull(argv[3]);

  InstanceSpec spec;
  spec.dim = dim;
  spec.seed = seed;
  spec.points = npoints;

  ExprPool pool;
  MetricField base = random_space(pool, spec);
  Expr psi = random_psi(pool, spec);
  MetricField image = conformal_image(base, psi);
  ConformalSpace S(base), Sb(image);
  std::vector<Point> pts = sample_points(spec);

  std::vector<Expr> exprs;
  TorsionSelector r;
  r.r = {1, 2, 2, 1, 2};
  TensorField ta = S.thomas(r), tb = Sb.thomas(r);
  for (Expr e : ta.components()) exprs.push_back(e);
  for (Expr e : tb.components()) exprs.push_back(e);
  if (dim >= 3) {
    RhoSelector rho;
    CurvatureParams prm{0.3, -0.2, 0.1, 0.4, -0.1};
    TensorField ca = S.weyl_type(rho, prm), cb = Sb.weyl_type(rho, prm);
    for (Expr e : ca.components()) exprs.push_back(e);
    for (Expr e : cb.components()) exprs.push_back(e);
  }
  std::printf("dim %d, %zu expressions, %d points, pool %zu nodes\n", dim,
              exprs.size(), npoints, pool.size());

  auto clock = []() { return std::chrono::steady_clock::now(); };
  auto t0 = clock();
  std::vector<double> serial = evaluate_grid_serial(pool, exprs, pts);
  auto t1 = clock();
  std::vector<double> parallel = evaluate_grid(pool, exprs, pts);
  auto t2 = clock();

  double mismatch = 0.0;
  for (size_t i = 0; i < serial.size(); ++i)
    mismatch = std::max(mismatch, std::fabs(serial[i] - parallel[i]));

  auto ms = [](auto a, auto b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
  };
  std::printf("serial   %.1f ms\n", ms(t0, t1));
  std::printf("parallel %.1f ms  (speedup %.2fx)\n", ms(t1, t2),
              ms(t0, t1) / ms(t1, t2));
  std::printf("max |serial - parallel| = %g\n", mismatch);
  return mismatch == 0.0 ? 0 : 1;
}
