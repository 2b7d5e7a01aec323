#pragma once

#include "acg/degree_model.hpp"
#include "acg/exact_kernel.hpp"
#include "acg/graph.hpp"

#include <Eigen/Dense>

#include <complex>

namespace acg {

// A 2K-component vector (α⁻_1..α⁻_K, α⁺_1..α⁺_K) over the positive in- and
// out-degrees. Degree 0 carries no stubs and has no component.
class DoubleVector {
 public:
  DoubleVector() = default;
  explicit DoubleVector(int max_degree) : K_(max_degree), data_(Vector::Zero(2 * max_degree)) {}
  DoubleVector(int max_degree, Vector data);

  static DoubleVector ones_minus(int K);   // 1⁻
  static DoubleVector ones_plus(int K);    // 1⁺
  static DoubleVector ones(int K);         // 1 = 1⁻ + 1⁺
  static DoubleVector gauge(int K);        // 1̃ = 1⁻ − 1⁺
  static DoubleVector delta(int K, int j, int k);  // δ_jk = δ⁻_j + δ⁺_k

  // Stub margins as a double vector (e⁻_1..e⁻_K, e⁺_1..e⁺_K).
  static DoubleVector from_margins(const StubMargins& m);
  // Edge-type marginals (Q⁻, Q⁺).
  static DoubleVector from_marginals(const EdgeTypeDist& q);

  int max_degree() const { return K_; }
  double& minus(int j) { return data_(j - 1); }
  double minus(int j) const { return data_(j - 1); }
  double& plus(int k) { return data_(K_ + k - 1); }
  double plus(int k) const { return data_(K_ + k - 1); }

  const Vector& data() const { return data_; }
  Vector& data() { return data_; }

  double dot(const DoubleVector& other) const { return data_.dot(other.data_); }
  DoubleVector operator+(const DoubleVector& o) const { return {K_, data_ + o.data_}; }
  DoubleVector operator-(const DoubleVector& o) const { return {K_, data_ - o.data_}; }
  DoubleVector operator*(double s) const { return {K_, data_ * s}; }

 private:
  int K_ = 0;
  Vector data_;
};

// H(α; e) = Σ_kj exp(α⁻_j + α⁺_k) Q_kj − α·e
double h_value(const DoubleVector& alpha, const DoubleVector& e, const EdgeTypeDist& q);
// ∇H = Σ_jk δ_jk e^{α·δ_jk} Q_kj − e
Vector h_gradient(const DoubleVector& alpha, const DoubleVector& e, const EdgeTypeDist& q);
// ∇²H = Σ_jk δ_jk δ_jkᵀ e^{α·δ_jk} Q_kj (independent of e)
Matrix h_hessian(const DoubleVector& alpha, const EdgeTypeDist& q);

// Columns form an orthonormal basis of the complement of 1̃ in R^{2K}.
Matrix gauge_complement_basis(int K);

struct CriticalPointOptions {
  double tolerance = 1e-10;
  int max_iterations = 100;
};

struct CriticalPointResult {
  DoubleVector alpha;            // α*, with 1̃·α* = 0
  double gradient_norm = 0.0;
  int iterations = 0;
  double h_at_min = 0.0;
  double hessian_projected_det = 0.0;
};

// Gauge-fixed Newton solve of ∇H(α; x) = 0 from α = 0, with backtracking line
// search on the subspace orthogonal to 1̃. x must be balanced (1̃·x = 0),
// normalized (Σx⁻ = Σx⁺ = 1) and strictly positive exactly where Q's margins
// are positive; otherwise UnsupportedMargin. NoConvergence after
// max_iterations.
CriticalPointResult solve_critical_point(const DoubleVector& x, const EdgeTypeDist& q,
                                         const CriticalPointOptions& options = {});

// Determinant of ∇²H(α) restricted to 1̃⊥. Throws SingularHessian when not
// positive.
double det0_hessian(const DoubleVector& alpha, const EdgeTypeDist& q);
// Same, with an explicit orthonormal basis of 1̃⊥ (columns).
double det0_hessian(const DoubleVector& alpha, const EdgeTypeDist& q, const Matrix& basis);

// I(E) = ∫_{[0,2π]^{2K}} exp H(−iu; e) du = (2π)^{2K} Z_0(e).
double log_exact_I(const StubMargins& e, const EdgeTypeDist& q,
                   const EnumerationLimits& limits = {});
double exact_I(const StubMargins& e, const EdgeTypeDist& q, const EnumerationLimits& limits = {});

// log of (2π)^{K+1/2} E^{1/2−K} exp(−E log E + E H(α*(x); x)) [det₀∇²H]^{−1/2}
// with x = e/E.
double log_laplace_I_approx(const StubMargins& e, const EdgeTypeDist& q,
                            const CriticalPointOptions& options = {});

// The integrand exp H(−iu; e) of I(E) at real u.
std::complex<double> fourier_integrand(const Vector& u, const DoubleVector& e,
                                       const EdgeTypeDist& q);

// Q_kj exp(α*(x)·δ_jk): the large-E limit of E[e_kj | e]/E
// along e = E x.
double asymptotic_edge_mean(const DoubleVector& x, const EdgeTypeDist& q, int k, int j,
                            const CriticalPointOptions& options = {});
// As above, reusing a solved critical point at x.
double asymptotic_edge_mean(const CriticalPointResult& critical, const EdgeTypeDist& q, int k,
                            int j);

}  // namespace acg
