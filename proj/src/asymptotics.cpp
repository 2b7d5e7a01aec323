#include "acg/asymptotics.hpp"

#include "acg/error.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace acg {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Orthonormal basis (columns) of the complement of v in R^n.
Matrix orthogonal_complement(const Vector& v) {
  const Eigen::Index n = v.size();
  Eigen::HouseholderQR<Matrix> qr(v);
  const Matrix full = qr.householderQ() * Matrix::Identity(n, n);
  return full.rightCols(n - 1);
}

// Coordinates of a double vector that Q's margins reach (Q⁻_j > 0 or Q⁺_k > 0).
std::vector<Eigen::Index> active_coordinates(const EdgeTypeDist& q) {
  const int K = q.max_degree();
  std::vector<Eigen::Index> active;
  for (int j = 1; j <= K; ++j) {
    if (q.in_marginal()(j) > 0.0) active.push_back(j - 1);
  }
  for (int k = 1; k <= K; ++k) {
    if (q.out_marginal()(k) > 0.0) active.push_back(K + k - 1);
  }
  return active;
}

void check_domain(const DoubleVector& x, const EdgeTypeDist& q) {
  const int K = q.max_degree();
  if (x.max_degree() != K) {
    throw Error(ErrorCode::invalid_argument, "x and Q have different K");
  }
  double minus_sum = 0.0;
  double plus_sum = 0.0;
  for (int d = 1; d <= K; ++d) {
    const bool in_active = q.in_marginal()(d) > 0.0;
    const bool out_active = q.out_marginal()(d) > 0.0;
    if (x.minus(d) < 0.0 || x.plus(d) < 0.0 || (x.minus(d) > 0.0) != in_active ||
        (x.plus(d) > 0.0) != out_active) {
      std::ostringstream os;
      os << "x must be positive exactly where Q's margins are positive (degree " << d << ")";
      throw Error(ErrorCode::unsupported_margin, os.str());
    }
    minus_sum += x.minus(d);
    plus_sum += x.plus(d);
  }
  if (std::abs(minus_sum - 1.0) > 1e-9 || std::abs(plus_sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::unsupported_margin, "x must satisfy Σx⁻ = Σx⁺ = 1");
  }
}

// Basis of 1̃⊥ within the active coordinates, embedded in R^{2K}.
Matrix active_gauge_basis(const EdgeTypeDist& q) {
  const int K = q.max_degree();
  const auto active = active_coordinates(q);
  const Eigen::Index n = static_cast<Eigen::Index>(active.size());
  const Vector gauge = DoubleVector::gauge(K).data();
  Vector restricted(n);
  for (Eigen::Index i = 0; i < n; ++i) restricted(i) = gauge(active[i]);
  const Matrix local = orthogonal_complement(restricted);
  Matrix basis = Matrix::Zero(2 * K, n - 1);
  for (Eigen::Index i = 0; i < n; ++i) basis.row(active[i]) = local.row(i);
  return basis;
}

}  // namespace

DoubleVector::DoubleVector(int max_degree, Vector data) : K_(max_degree), data_(std::move(data)) {
  if (data_.size() != 2 * K_) {
    throw Error(ErrorCode::invalid_argument, "double vector must have 2K components");
  }
}

DoubleVector DoubleVector::ones_minus(int K) {
  DoubleVector v(K);
  v.data_.head(K).setOnes();
  return v;
}

DoubleVector DoubleVector::ones_plus(int K) {
  DoubleVector v(K);
  v.data_.tail(K).setOnes();
  return v;
}

DoubleVector DoubleVector::ones(int K) { return {K, Vector::Ones(2 * K)}; }

DoubleVector DoubleVector::gauge(int K) { return ones_minus(K) - ones_plus(K); }

DoubleVector DoubleVector::delta(int K, int j, int k) {
  DoubleVector v(K);
  v.minus(j) = 1.0;
  v.plus(k) = 1.0;
  return v;
}

DoubleVector DoubleVector::from_margins(const StubMargins& m) {
  const int K = m.max_degree();
  DoubleVector v(K);
  for (int d = 1; d <= K; ++d) {
    v.minus(d) = static_cast<double>(m.in[d]);
    v.plus(d) = static_cast<double>(m.out[d]);
  }
  return v;
}

DoubleVector DoubleVector::from_marginals(const EdgeTypeDist& q) {
  const int K = q.max_degree();
  DoubleVector v(K);
  for (int d = 1; d <= K; ++d) {
    v.minus(d) = q.in_marginal()(d);
    v.plus(d) = q.out_marginal()(d);
  }
  return v;
}

double h_value(const DoubleVector& alpha, const DoubleVector& e, const EdgeTypeDist& q) {
  const int K = q.max_degree();
  double sum = 0.0;
  for (int k = 1; k <= K; ++k) {
    for (int j = 1; j <= K; ++j) {
      if (q(k, j) > 0.0) sum += std::exp(alpha.minus(j) + alpha.plus(k)) * q(k, j);
    }
  }
  return sum - alpha.dot(e);
}

Vector h_gradient(const DoubleVector& alpha, const DoubleVector& e, const EdgeTypeDist& q) {
  const int K = q.max_degree();
  DoubleVector g(K);
  for (int k = 1; k <= K; ++k) {
    for (int j = 1; j <= K; ++j) {
      if (q(k, j) <= 0.0) continue;
      const double w = std::exp(alpha.minus(j) + alpha.plus(k)) * q(k, j);
      g.minus(j) += w;
      g.plus(k) += w;
    }
  }
  return g.data() - e.data();
}

Matrix h_hessian(const DoubleVector& alpha, const EdgeTypeDist& q) {
  const int K = q.max_degree();
  Matrix h = Matrix::Zero(2 * K, 2 * K);
  for (int k = 1; k <= K; ++k) {
    for (int j = 1; j <= K; ++j) {
      if (q(k, j) <= 0.0) continue;
      const double w = std::exp(alpha.minus(j) + alpha.plus(k)) * q(k, j);
      const Eigen::Index a = j - 1;
      const Eigen::Index b = K + k - 1;
      h(a, a) += w;
      h(b, b) += w;
      h(a, b) += w;
      h(b, a) += w;
    }
  }
  return h;
}

Matrix gauge_complement_basis(int K) { return orthogonal_complement(DoubleVector::gauge(K).data()); }

CriticalPointResult solve_critical_point(const DoubleVector& x, const EdgeTypeDist& q,
                                         const CriticalPointOptions& options) {
  check_domain(x, q);
  const int K = q.max_degree();
  const Matrix basis = active_gauge_basis(q);
  const Vector gauge_dir = DoubleVector::gauge(K).data();

  CriticalPointResult result;
  result.alpha = DoubleVector(K);
  DoubleVector& alpha = result.alpha;
  Vector grad = h_gradient(alpha, x, q);
  double value = h_value(alpha, x, q);

  int iter = 0;
  while (grad.norm() > options.tolerance) {
    if (iter >= options.max_iterations) {
      std::ostringstream os;
      os << "Newton solve stalled at |grad| = " << grad.norm() << " after " << iter
         << " iterations";
      throw Error(ErrorCode::no_convergence, os.str());
    }
    ++iter;
    const Vector g = basis.transpose() * grad;
    const Matrix h = basis.transpose() * h_hessian(alpha, q) * basis;
    const Vector step = -h.ldlt().solve(g);
    const double slope = g.dot(step);
    // Near the solution H changes below round-off, so the full step is taken
    // without the sufficient-decrease test.
    const bool local = grad.norm() < 1e-6;
    double t = 1.0;
    DoubleVector trial(K);
    double trial_value = 0.0;
    for (int halvings = 0;; ++halvings) {
      trial = DoubleVector(K, alpha.data() + t * (basis * step));
      trial_value = h_value(trial, x, q);
      if (local || trial_value <= value + 1e-4 * t * slope || halvings >= 60) break;
      t *= 0.5;
    }
    // keep iterates on the gauge plane
    trial.data() -= (trial.data().dot(gauge_dir) / gauge_dir.squaredNorm()) * gauge_dir;
    alpha = trial;
    value = trial_value;
    grad = h_gradient(alpha, x, q);
  }
  result.iterations = iter;
  result.gradient_norm = grad.norm();
  result.h_at_min = h_value(alpha, x, q);
  const Matrix h = basis.transpose() * h_hessian(alpha, q) * basis;
  result.hessian_projected_det = h.determinant();
  return result;
}

double det0_hessian(const DoubleVector& alpha, const EdgeTypeDist& q, const Matrix& basis) {
  const Matrix h = basis.transpose() * h_hessian(alpha, q) * basis;
  const double det = h.determinant();
  if (!(det > 0.0)) {
    std::ostringstream os;
    os << "projected Hessian determinant " << det << " is not positive";
    throw Error(ErrorCode::singular_hessian, os.str());
  }
  return det;
}

double det0_hessian(const DoubleVector& alpha, const EdgeTypeDist& q) {
  return det0_hessian(alpha, q, gauge_complement_basis(q.max_degree()));
}

double log_exact_I(const StubMargins& e, const EdgeTypeDist& q, const EnumerationLimits& limits) {
  return 2.0 * q.max_degree() * std::log(kTwoPi) + log_partition_Z(e, q, limits);
}

double exact_I(const StubMargins& e, const EdgeTypeDist& q, const EnumerationLimits& limits) {
  return std::exp(log_exact_I(e, q, limits));
}

double log_laplace_I_approx(const StubMargins& e, const EdgeTypeDist& q,
                            const CriticalPointOptions& options) {
  const int K = q.max_degree();
  if (e.max_degree() != K) throw Error(ErrorCode::margin_mismatch, "margins and Q differ in K");
  if (!e.is_balanced() || e.in_total() <= 0) {
    throw Error(ErrorCode::margin_mismatch, "margins must be balanced with E > 0");
  }
  const double E = static_cast<double>(e.in_total());
  const DoubleVector x = DoubleVector::from_margins(e) * (1.0 / E);
  const CriticalPointResult cp = solve_critical_point(x, q, options);
  const double det = det0_hessian(cp.alpha, q);
  return (K + 0.5) * std::log(kTwoPi) + (0.5 - K) * std::log(E) - E * std::log(E) +
         E * cp.h_at_min - 0.5 * std::log(det);
}

std::complex<double> fourier_integrand(const Vector& u, const DoubleVector& e,
                                       const EdgeTypeDist& q) {
  const int K = q.max_degree();
  std::complex<double> h = 0.0;
  const std::complex<double> i(0.0, 1.0);
  for (int k = 1; k <= K; ++k) {
    for (int j = 1; j <= K; ++j) {
      if (q(k, j) > 0.0) h += std::exp(-i * (u(j - 1) + u(K + k - 1))) * q(k, j);
    }
  }
  h += i * u.dot(e.data());
  return std::exp(h);
}

double asymptotic_edge_mean(const CriticalPointResult& critical, const EdgeTypeDist& q, int k,
                            int j) {
  const int K = q.max_degree();
  if (k < 1 || k > K || j < 1 || j > K) {
    throw Error(ErrorCode::invalid_argument, "edge type (k, j) must lie in {1..K}^2");
  }
  const DoubleVector& a = critical.alpha;
  // ∂H(α*(x); x)/∂x = −α*, so removing one (k, j) edge tilts the ratio of
  // partition functions by e^{α*·δ_jk}; at the critical point this equals
  // exp[1 − H − α*·x + α*·δ_jk].
  return q(k, j) * std::exp(a.minus(j) + a.plus(k));
}

double asymptotic_edge_mean(const DoubleVector& x, const EdgeTypeDist& q, int k, int j,
                            const CriticalPointOptions& options) {
  return asymptotic_edge_mean(solve_critical_point(x, q, options), q, k, j);
}

}  // namespace acg
