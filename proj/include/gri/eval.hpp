#ifndef GRI_EVAL_HPP
#define GRI_EVAL_HPP

#include <span>
#include <vector>

#include "gri/tensor.hpp"

namespace gri {

/// Evaluate every expression at every point; result is row-major with one
/// row per point. Points are independent, so rows are computed in parallel
/// (one memoizing context per point). threads = 0 uses the OpenMP default.
std::vector<double> evaluate_grid(const ExprPool& pool,
                                  std::span<const Expr> exprs,
                                  std::span<const Point> points,
                                  int threads = 0);

/// Single-threaded reference implementation of evaluate_grid; the parallel
/// kernel must agree with it bit-for-bit.
std::vector<double> evaluate_grid_serial(const ExprPool& pool,
                                         std::span<const Expr> exprs,
                                         std::span<const Point> points);

/// Reject points where the symmetric-part determinant is numerically
/// singular (|det g| <= 1e-8).
void check_nonsingular(Geometry& geo, std::span<const Point> points);

}  // namespace gri

#endif
