#ifndef GRI_VERIFY_HPP
#define GRI_VERIFY_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gri/conformal.hpp"
#include "gri/tensor.hpp"

namespace gri {

struct InstanceSpec {
  int dim = 3;
  double eps = 0.1;       // perturbation amplitude, must stay < 0.5
  uint64_t seed = 0;
  double box_lo = -0.5, box_hi = 0.5;
  int points = 10;
};

struct CheckRecord {
  std::string name;
  std::string detail;  // selectors / parameters exercised
  double deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct VerificationReport {
  InstanceSpec spec;
  std::vector<CheckRecord> checks;  // sorted by name
  bool all_pass() const;
};

/// Named tolerance overrides, keyed by check name.
using Tolerances = std::map<std::string, double>;

/// G = delta + eps*(symmetric) + eps*(antisymmetric), entries drawn from
/// {c, c*x_k, c*x_k*x_l, c*sin(x_k)} with seeded coefficients in [-1, 1].
MetricField random_space(ExprPool& pool, const InstanceSpec& spec);

/// psi = sum a_k x_k + b sin(x_1), coefficients seeded in [-0.3, 0.3].
Expr random_psi(ExprPool& pool, const InstanceSpec& spec);

/// Deterministic uniform sample of the box.
std::vector<Point> sample_points(const InstanceSpec& spec);

/// Full invariance suite on a generated instance. Never aborts on a failed
/// check; every check appears in the report.
VerificationReport run_suite(const InstanceSpec& spec,
                             const Tolerances& overrides = {},
                             int threads = 0);

/// Same suite on a caller-supplied space. When corrupt is set, a
/// non-conformal perturbation is added to the image metric so the
/// invariance checks should fail.
VerificationReport run_suite_on(const MetricField& base, Expr psi,
                                const std::vector<Point>& points,
                                const InstanceSpec& spec,
                                const Tolerances& overrides = {},
                                int threads = 0, bool corrupt = false);

std::string report_to_json(const VerificationReport& report);

}  // namespace gri

#endif
