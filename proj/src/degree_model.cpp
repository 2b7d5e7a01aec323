#include "acg/degree_model.hpp"

#include "acg/error.hpp"

#include <cmath>
#include <sstream>

namespace acg {
namespace {

Matrix normalized_weights(const Matrix& weights, const char* name) {
  if (weights.rows() != weights.cols() || weights.rows() < 2) {
    std::ostringstream os;
    os << name << " must be a square (K+1)x(K+1) matrix with K >= 1, got " << weights.rows()
       << "x" << weights.cols();
    throw Error(ErrorCode::invalid_distribution, os.str());
  }
  for (Eigen::Index r = 0; r < weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < weights.cols(); ++c) {
      const double w = weights(r, c);
      if (!std::isfinite(w) || w < 0.0) {
        std::ostringstream os;
        os << name << "(" << r << "," << c << ") = " << w << " is not a nonnegative weight";
        throw Error(ErrorCode::invalid_distribution, os.str());
      }
    }
  }
  const double total = weights.sum();
  if (std::abs(total - 1.0) > kNormalizationSlack) {
    std::ostringstream os;
    os.precision(17);
    os << name << " sums to " << total << ", not 1";
    throw Error(ErrorCode::invalid_distribution, os.str());
  }
  return weights / total;
}

}  // namespace

NodeMarginals derive_marginals(const Matrix& p) {
  NodeMarginals m;
  m.in = p.rowwise().sum();
  m.out = p.colwise().sum().transpose();
  double z_out = 0.0;
  double z_in = 0.0;
  for (Eigen::Index d = 0; d < m.out.size(); ++d) {
    z_out += static_cast<double>(d) * m.out(d);
    z_in += static_cast<double>(d) * m.in(d);
  }
  if (z_out <= 0.0 || z_in <= 0.0) {
    throw Error(ErrorCode::zero_mean_degree, "node-type distribution has no positive degrees");
  }
  if (std::abs(z_out - z_in) > kNormalizationSlack) {
    std::ostringstream os;
    os.precision(17);
    os << "mean out-degree " << z_out << " differs from mean in-degree " << z_in;
    throw Error(ErrorCode::invalid_distribution, os.str());
  }
  m.mean_degree = z_out;
  return m;
}

NodeTypeDist NodeTypeDist::from_weights(const Matrix& weights) {
  Matrix p = normalized_weights(weights, "P");
  NodeMarginals m = derive_marginals(p);
  return NodeTypeDist(std::move(p), std::move(m));
}

EdgeTypeDist EdgeTypeDist::from_weights(const Matrix& weights) {
  Matrix q = normalized_weights(weights, "Q");
  for (Eigen::Index d = 0; d < q.rows(); ++d) {
    if (q(0, d) != 0.0 || q(d, 0) != 0.0) {
      throw Error(ErrorCode::invalid_distribution,
                  "Q must vanish on degree-0 rows and columns (no degree-0 stubs)");
    }
  }
  Vector out = q.rowwise().sum();
  Vector in = q.colwise().sum().transpose();
  return EdgeTypeDist(std::move(q), std::move(out), std::move(in));
}

bool EdgeTypeDist::is_independent(double tol) const {
  const Matrix product = out_ * in_.transpose();
  return (product - q_).cwiseAbs().maxCoeff() <= tol;
}

ConsistencyReport validate_pair(const NodeTypeDist& p, const EdgeTypeDist& q, double tol) {
  if (p.max_degree() != q.max_degree()) {
    throw Error(ErrorCode::invalid_argument, "P and Q have different maximum degree K");
  }
  const int K = p.max_degree();
  const double z = p.mean_degree();
  ConsistencyReport report;
  report.out_residual = Vector::Zero(K + 1);
  report.in_residual = Vector::Zero(K + 1);
  for (int d = 0; d <= K; ++d) {
    report.out_residual(d) = std::abs(q.out_marginal()(d) - d * p.out_marginal()(d) / z);
    report.in_residual(d) = std::abs(q.in_marginal()(d) - d * p.in_marginal()(d) / z);
  }
  report.max_violation =
      std::max(report.out_residual.maxCoeff(), report.in_residual.maxCoeff());
  report.is_consistent = report.max_violation <= tol;
  return report;
}

EdgeTypeDist independent_edge_dist(const NodeTypeDist& p) {
  const int K = p.max_degree();
  const double z = p.mean_degree();
  Vector out(K + 1), in(K + 1);
  for (int d = 0; d <= K; ++d) {
    out(d) = d * p.out_marginal()(d) / z;
    in(d) = d * p.in_marginal()(d) / z;
  }
  return EdgeTypeDist::from_weights(out * in.transpose());
}

ConditionalDists conditional_dists(const NodeTypeDist& p, const EdgeTypeDist& q) {
  const int K = p.max_degree();
  ConditionalDists c;
  c.out_given_in = Matrix::Zero(K + 1, K + 1);
  c.in_given_out = Matrix::Zero(K + 1, K + 1);
  c.edge_in_given_out = Matrix::Zero(K + 1, K + 1);
  c.edge_out_given_in = Matrix::Zero(K + 1, K + 1);
  for (int a = 0; a <= K; ++a) {
    for (int b = 0; b <= K; ++b) {
      // a = j, b = k for P; a = k, b = j for Q
      if (p.in_marginal()(a) > 0.0) c.out_given_in(a, b) = p(a, b) / p.in_marginal()(a);
      if (p.out_marginal()(b) > 0.0) c.in_given_out(a, b) = p(a, b) / p.out_marginal()(b);
      if (q.out_marginal()(a) > 0.0) c.edge_in_given_out(a, b) = q(a, b) / q.out_marginal()(a);
      if (q.in_marginal()(b) > 0.0) c.edge_out_given_in(a, b) = q(a, b) / q.in_marginal()(b);
    }
  }
  return c;
}

double assortative_weight(const EdgeTypeDist& q, int k, int j) {
  const double qkj = q(k, j);
  if (qkj == 0.0) return 0.0;
  return qkj / (q.out_marginal()(k) * q.in_marginal()(j));
}

double self_loop_rate(const NodeTypeDist& p, const EdgeTypeDist& q) {
  const int K = p.max_degree();
  const double z = p.mean_degree();
  double lambda = 0.0;
  for (int j = 1; j <= K; ++j) {
    for (int k = 1; k <= K; ++k) {
      lambda += j * k * p(j, k) * assortative_weight(q, k, j);
    }
  }
  return lambda / (z * z);
}

double expected_self_loops(const NodeTypeDist& p, const EdgeTypeDist& q) {
  return p.mean_degree() * self_loop_rate(p, q);
}

}  // namespace acg
