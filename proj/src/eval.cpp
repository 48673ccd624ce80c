#include "gri/eval.hpp"

#include <cmath>
#include <exception>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gri {

namespace {

void eval_row(const ExprPool& pool, std::span<const Expr> exprs,
              const Point& pt, double* out) {
  EvalContext ctx(pool, pt);
  for (size_t c = 0; c < exprs.size(); ++c) out[c] = ctx.eval(exprs[c]);
}

}  // namespace

std::vector<double> evaluate_grid(const ExprPool& pool,
                                  std::span<const Expr> exprs,
                                  std::span<const Point> points, int threads) {
  std::vector<double> out(exprs.size() * points.size());
  std::exception_ptr err;
#ifdef _OPENMP
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nt)
  for (long long r = 0; r < static_cast<long long>(points.size()); ++r) {
    try {
      eval_row(pool, exprs, points[r], out.data() + r * exprs.size());
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
#else
  (void)threads;
  for (size_t r = 0; r < points.size(); ++r) {
    try {
      eval_row(pool, exprs, points[r], out.data() + r * exprs.size());
    } catch (...) {
      if (!err) err = std::current_exception();
    }
  }
#endif
  if (err) std::rethrow_exception(err);
  return out;
}

std::vector<double> evaluate_grid_serial(const ExprPool& pool,
                                         std::span<const Expr> exprs,
                                         std::span<const Point> points) {
  std::vector<double> out(exprs.size() * points.size());
  for (size_t r = 0; r < points.size(); ++r)
    eval_row(pool, exprs, points[r], out.data() + r * exprs.size());
  return out;
}

void check_nonsingular(Geometry& geo, std::span<const Point> points) {
  Expr det = geo.detg();
  for (size_t i = 0; i < points.size(); ++i) {
    double v = eval(geo.pool(), det, points[i]);
    if (std::fabs(v) <= 1e-8) {
      std::ostringstream msg;
      msg << "metric is singular (|det g| = " << std::fabs(v) << ") at point (";
      for (size_t k = 0; k < points[i].x.size(); ++k) {
        if (k) msg << ", ";
        msg << points[i].x[k];
      }
      msg << ")";
      throw Error(ErrorCode::SingularMetric, msg.str());
    }
  }
}

}  // namespace gri
