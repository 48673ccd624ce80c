#ifndef GRI_CONFORMAL_HPP
#define GRI_CONFORMAL_HPP

#include <array>
#include <map>
#include <string>
#include <vector>

#include "gri/tensor.hpp"

namespace gri {

/// Five-slot choice between the two zeta kinds; 32 possible values.
struct TorsionSelector {
  std::array<int, 5> r{1, 1, 1, 1, 1};
  int key() const {
    int k = 0;
    for (int i = 0; i < 5; ++i) k |= (r[i] - 1) << i;
    return k;
  }
};

struct SigmaSelector {
  std::array<int, 3> s{1, 1, 1};
};

/// Selector bundle for the Weyl-type family: two sigma selectors and
/// eight torsion selectors.
struct RhoSelector {
  SigmaSelector s1, s2;
  std::array<TorsionSelector, 8> r;
};

TorsionSelector parse_torsion_selector(const std::string& text);
SigmaSelector parse_sigma_selector(const std::string& text);
std::string to_string(const TorsionSelector& r);
std::string to_string(const RhoSelector& rho);

/// Rescaled metric: every component of G (and its torsion etc.) multiplied
/// by exp(2 psi). Shares the expression pool with the base metric.
MetricField conformal_image(const MetricField& base, Expr psi);

struct ConformalPair {
  MetricField base;
  MetricField image;
  Expr psi;
};

ConformalPair make_conformal_pair(const MetricField& base, Expr psi);

/// Geometry plus the conformal-theory objects, cached per selector.
class ConformalSpace {
public:
  explicit ConformalSpace(const MetricField& m) : geo_(m) {}

  Geometry& geometry() { return geo_; }
  ExprPool& pool() { return geo_.pool(); }
  int dim() const { return geo_.metric().dim; }

  const TensorField& zeta(int kind);                // kind 1 or 2
  const TensorField& tau(const TorsionSelector& r);
  const TensorField& tau_deriv(const TorsionSelector& r);

  TensorField thomas(const TorsionSelector& r);
  TensorField sigma(const SigmaSelector& s, const TorsionSelector& r);
  TensorField theta(const TorsionSelector& r1, const TorsionSelector& r2);

  /// Conformal curvature of the symmetric part (dimension >= 3).
  TensorField weyl();
  TensorField weyl_covariant();

  /// Torsion-corrected conformal curvature family (dimension >= 3).
  TensorField weyl_type(const RhoSelector& rho, const CurvatureParams& p);
  TensorField weyl_type_covariant(const RhoSelector& rho,
                                  const CurvatureParams& p);

  // contraction helpers shared by the family members
  const TensorField& torsion_divergence();  // T^a_{jn;a}
  const TensorField& torsion_square();      // T^a_{jb} T^b_{an}

private:
  void require_dim3() const;

  Geometry geo_;
  TensorField zeta2_, divT_, divTu_, TT_, TTu_;
  Expr TTsc_;
  bool have_zeta2_ = false, have_divT_ = false, have_TT_ = false;
  std::map<int, TensorField> tau_cache_, dtau_cache_;
};

/// psi_j recovered from the connection traces: (1/N)(trace(image) - trace(base)).
TensorField psi_gradient_from_traces(ConformalSpace& base, ConformalSpace& image);
/// psi_j recovered from the determinants: (1/2N) d/dx^j (ln|g_image| - ln|g_base|).
TensorField psi_gradient_from_dets(ConformalSpace& base, ConformalSpace& image);

struct DetectResult {
  bool conformal = false;     // component-ratio verdict
  bool thomas_equal = false;  // invariant-equality cross-check
  std::vector<double> psi_values;      // one per usable point
  std::vector<size_t> skipped_points;  // all base components negligible there
  std::string witness;                 // set when not conformal
};

DetectResult detect_conformal(const MetricField& A, const MetricField& B,
                              const std::vector<Point>& points);

}  // namespace gri

#endif
