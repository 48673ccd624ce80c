#ifndef GRI_TENSOR_HPP
#define GRI_TENSOR_HPP

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "gri/expr.hpp"

namespace gri {

enum class Slot : uint8_t { Up, Down };

/// Dense multi-index array of Expr with a variance signature.
class TensorField {
public:
  TensorField() = default;
  TensorField(int dim, std::vector<Slot> signature, Expr fill);

  int dim() const { return dim_; }
  int rank() const { return static_cast<int>(sig_.size()); }
  const std::vector<Slot>& signature() const { return sig_; }

  Expr& at(std::initializer_list<int> idx) {
    return comp_[offset({idx.begin(), idx.size()})];
  }
  Expr at(std::initializer_list<int> idx) const {
    return comp_[offset({idx.begin(), idx.size()})];
  }
  Expr& at(std::span<const int> idx) { return comp_[offset(idx)]; }
  Expr at(std::span<const int> idx) const { return comp_[offset(idx)]; }

  const std::vector<Expr>& components() const { return comp_; }
  std::vector<Expr>& components() { return comp_; }

  size_t offset(std::span<const int> idx) const;

private:
  int dim_ = 0;
  std::vector<Slot> sig_;
  std::vector<Expr> comp_;
};

/// Metric of a generalized Riemannian space: an N x N grid of expressions,
/// generally non-symmetric, over named coordinates. Plain data; derived
/// geometry lives in Geometry.
struct MetricField {
  ExprPool* pool = nullptr;
  int dim = 0;
  std::vector<std::string> coords;
  TensorField G;  // (down, down)
  Expr psi;       // optional scalar field; invalid if absent

  static MetricField from_strings(ExprPool& pool,
                                  const std::vector<std::string>& coords,
                                  const std::vector<std::vector<std::string>>& entries,
                                  const std::string& psi_text = "");
};

struct CurvatureParams {
  double u = 0, u2 = 0, v = 0, v2 = 0, w = 0;
};

struct RicciContractions {
  TensorField down;   // X_{jm} = X^a_{jma}
  TensorField mixed;  // X^i_m = g^{ia} X_{am}
  Expr scalar;        // X = g^{jm} X_{jm}
};

/// Derived geometry of a metric, computed symbolically on first use and
/// cached. Single-phase construction; immutable once the caches are filled.
class Geometry {
public:
  explicit Geometry(const MetricField& metric);

  const MetricField& metric() const { return *metric_; }
  ExprPool& pool() const { return *metric_->pool; }
  int dim() const { return metric_->dim; }

  const TensorField& g();      // symmetric part
  const TensorField& F();      // antisymmetric part
  const TensorField& ginv();   // g^{ij} via symbolic adjugate, N <= 4
  Expr detg();
  Expr ln_abs_detg();          // ln|g| as ln(det^2)/2, domain-safe for det<0

  const TensorField& christoffel_lower();  // Gamma_{i.jk}
  const TensorField& christoffel();        // Gamma^i_{jk}
  const TensorField& gamma();              // symmetric part of Gamma
  const TensorField& torsion();            // T^i_{jk}
  const TensorField& torsion_deriv();      // T^i_{jm;n}
  const TensorField& riemann();            // R^i_{jmn} of the associated space

  /// Raise the first slot with g^{ia} (must be Down).
  TensorField raise_first(const TensorField& t);
  /// Lower the first slot with g_{ia} (must be Up).
  TensorField lower_first(const TensorField& t);

private:
  const MetricField* metric_;
  TensorField g_, F_, ginv_, gl_, gamma_full_, gamma_sym_, torsion_, tderiv_,
      riemann_;
  Expr detg_, lng_;
  bool have_split_ = false, have_inv_ = false, have_gl_ = false,
       have_gamma_ = false, have_tderiv_ = false, have_riemann_ = false;
};

TensorField split_metric_symmetric(const MetricField& G);
TensorField split_metric_antisymmetric(const MetricField& G);

/// Covariant derivative with respect to the associated connection gamma;
/// appends one Down slot. Input rank must be <= 4.
TensorField cov_deriv_assoc(const TensorField& field, Geometry& geo);

/// The four covariant differentiations of a type (1,1) field with respect
/// to the full non-symmetric connection Gamma. kind in 1..4.
TensorField cov_deriv_kind(int kind, const TensorField& field, Geometry& geo);

/// K^i_{jmn}(u,u',v,v',w) = R + u T;n + u' T;m-swapped + quadratic torsion terms.
TensorField curvature_family(const CurvatureParams& p, Geometry& geo);

/// Contractions of a type (1,3) curvature-like tensor. The upper slot is
/// contracted with the LAST lower slot; this is the unique choice under
/// which the printed relation between R- and K-contractions is an identity.
RicciContractions ricci_contractions(const TensorField& X, Geometry& geo);

}  // namespace gri

#endif
