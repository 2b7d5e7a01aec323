#pragma once

#include <Eigen/Dense>

#include <vector>

namespace acg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kNormalizationSlack = 1e-9;
inline constexpr double kDefaultConsistencyTol = 1e-9;

struct NodeMarginals {
  Vector in;   // P⁻_j
  Vector out;  // P⁺_k
  double mean_degree = 0.0;
};

// Marginals and mean degree of a normalized (K+1)x(K+1) node-type matrix
// (row = in-degree j, column = out-degree k). Throws ZeroMeanDegree when the
// matrix has no mass on positive degrees.
NodeMarginals derive_marginals(const Matrix& p);

/// Node-type distribution P_jk over {0..K}^2.
///
/// Immutable after construction. Rows index the in-degree j, columns the
/// out-degree k.
class NodeTypeDist {
 public:
  // Accepts nonnegative weights; sums within kNormalizationSlack of one are
  // renormalized, anything else is rejected.
  static NodeTypeDist from_weights(const Matrix& weights);

  int max_degree() const { return static_cast<int>(p_.rows()) - 1; }
  double operator()(int j, int k) const { return p_(j, k); }
  const Matrix& matrix() const { return p_; }
  const Vector& in_marginal() const { return marginals_.in; }
  const Vector& out_marginal() const { return marginals_.out; }
  double mean_degree() const { return marginals_.mean_degree; }

 private:
  NodeTypeDist(Matrix p, NodeMarginals m) : p_(std::move(p)), marginals_(std::move(m)) {}

  Matrix p_;
  NodeMarginals marginals_;
};

/// Edge-type distribution Q_kj over {0..K}^2.
///
/// Rows index the out-degree k of the source, columns the in-degree j of the
/// target. Row 0 and column 0 are identically zero.
class EdgeTypeDist {
 public:
  static EdgeTypeDist from_weights(const Matrix& weights);

  int max_degree() const { return static_cast<int>(q_.rows()) - 1; }
  double operator()(int k, int j) const { return q_(k, j); }
  const Matrix& matrix() const { return q_; }
  const Vector& out_marginal() const { return out_; }  // Q⁺_k
  const Vector& in_marginal() const { return in_; }    // Q⁻_j

  // True when Q_kj = Q⁺_k Q⁻_j to within tol.
  bool is_independent(double tol = 1e-12) const;

 private:
  EdgeTypeDist(Matrix q, Vector out, Vector in)
      : q_(std::move(q)), out_(std::move(out)), in_(std::move(in)) {}

  Matrix q_;
  Vector out_;
  Vector in_;
};

struct ConsistencyReport {
  bool is_consistent = false;
  double max_violation = 0.0;
  Vector out_residual;  // |Q⁺_k − k P⁺_k / z|
  Vector in_residual;   // |Q⁻_j − j P⁻_j / z|
};

ConsistencyReport validate_pair(const NodeTypeDist& p, const EdgeTypeDist& q,
                                double tol = kDefaultConsistencyTol);

// Q_kj = k j P⁺_k P⁻_j / z², the classical configuration model.
EdgeTypeDist independent_edge_dist(const NodeTypeDist& p);

// Conditional distributions, each stored with the same (row, column) layout
// as its parent matrix. Rows whose conditioning marginal is zero are all zero.
struct ConditionalDists {
  Matrix out_given_in;  // P_{k|j} at (j,k)
  Matrix in_given_out;  // P_{j|k} at (j,k)
  Matrix edge_in_given_out;  // Q_{j|k} at (k,j)
  Matrix edge_out_given_in;  // Q_{k|j} at (k,j)
};

ConditionalDists conditional_dists(const NodeTypeDist& p, const EdgeTypeDist& q);

// Weight Q_kj / (Q⁺_k Q⁻_j), zero where Q_kj is zero.
double assortative_weight(const EdgeTypeDist& q, int k, int j);

// λ = Σ_jk jk P_jk Q_kj / (z² Q⁺_k Q⁻_j).
double self_loop_rate(const NodeTypeDist& p, const EdgeTypeDist& q);
// Expected self-loops per graph: the per-edge loop fraction
// Σ_jk jk P_jk Q_kj / (N z² Q⁺_k Q⁻_j) times E = zN, i.e. z·λ.
double expected_self_loops(const NodeTypeDist& p, const EdgeTypeDist& q);

// A (P, Q) pair as read from a parameter file.
struct DegreeModel {
  NodeTypeDist p;
  EdgeTypeDist q;
  bool q_independent = false;  // Q was given as "independent"
};

}  // namespace acg
