#include "acg/exact_kernel.hpp"

#include "acg/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace acg {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Neumaier summation; table weights span many orders of magnitude.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void check_margins(const StubMargins& m, int K, const EnumerationLimits* limits) {
  if (static_cast<int>(m.in.size()) != K + 1 || static_cast<int>(m.out.size()) != K + 1) {
    throw Error(ErrorCode::margin_mismatch, "margins must have K+1 = " + std::to_string(K + 1) +
                                                " entries per side");
  }
  if (m.in[0] != 0 || m.out[0] != 0) {
    throw Error(ErrorCode::margin_mismatch, "degree-0 classes cannot carry stubs");
  }
  for (int d = 0; d <= K; ++d) {
    if (m.in[d] < 0 || m.out[d] < 0) {
      throw Error(ErrorCode::margin_mismatch, "negative stub count");
    }
  }
  if (!m.is_balanced()) {
    throw Error(ErrorCode::margin_mismatch,
                "in-stubs " + std::to_string(m.in_total()) + " != out-stubs " +
                    std::to_string(m.out_total()));
  }
  if (limits != nullptr) {
    if (m.in_total() > limits->max_edges) {
      throw Error(ErrorCode::cap_exceeded, "E = " + std::to_string(m.in_total()) +
                                               " exceeds the enumeration cap " +
                                               std::to_string(limits->max_edges));
    }
    if (K > limits->max_degree) {
      throw Error(ErrorCode::cap_exceeded, "K = " + std::to_string(K) +
                                               " exceeds the enumeration cap " +
                                               std::to_string(limits->max_degree));
    }
  }
}

// Row-major recursive filling of the K x K interior (degrees 1..K) with
// margin pruning. Cells with allowed == false are pinned at zero.
class TableEnumerator {
 public:
  TableEnumerator(const StubMargins& m, std::vector<char> allowed, std::int64_t max_tables,
                  const std::function<void(const EdgeTypeMatrix&)>& visit)
      : K_(m.max_degree()),
        allowed_(std::move(allowed)),
        row_rem_(m.out),
        col_rem_(m.in),
        table_(K_),
        max_tables_(max_tables),
        visit_(visit) {}

  void run() {
    if (K_ < 1) return;
    fill(1, 1);
  }

 private:
  void fill(int k, int j) {
    if (k > K_) {
      if (++visited_ > max_tables_) {
        throw Error(ErrorCode::cap_exceeded, "more than " + std::to_string(max_tables_) +
                                                 " contingency tables");
      }
      visit_(table_);
      return;
    }
    const int next_k = j == K_ ? k + 1 : k;
    const int next_j = j == K_ ? 1 : j + 1;

    std::int64_t later_cols = 0;
    for (int jj = j + 1; jj <= K_; ++jj) later_cols += col_rem_[jj];
    std::int64_t later_rows = 0;
    for (int kk = k + 1; kk <= K_; ++kk) later_rows += row_rem_[kk];

    const std::int64_t hi = std::min(row_rem_[k], col_rem_[j]);
    const std::int64_t lo =
        std::max({std::int64_t{0}, row_rem_[k] - later_cols, col_rem_[j] - later_rows});
    const bool allowed = allowed_[k * (K_ + 1) + j] != 0;
    const std::int64_t top = allowed ? hi : std::min<std::int64_t>(hi, 0);
    for (std::int64_t v = lo; v <= top; ++v) {
      table_.at(k, j) = v;
      row_rem_[k] -= v;
      col_rem_[j] -= v;
      fill(next_k, next_j);
      row_rem_[k] += v;
      col_rem_[j] += v;
    }
    table_.at(k, j) = 0;
  }

  int K_;
  std::vector<char> allowed_;
  std::vector<std::int64_t> row_rem_;
  std::vector<std::int64_t> col_rem_;
  EdgeTypeMatrix table_;
  std::int64_t max_tables_;
  std::int64_t visited_ = 0;
  const std::function<void(const EdgeTypeMatrix&)>& visit_;
};

double log_factorial(std::int64_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

// (log weight, e_kj) for every positive-weight table.
std::vector<std::pair<double, double>> cell_samples(const StubMargins& margins,
                                                    const EdgeTypeDist& q, int k, int j,
                                                    const EnumerationLimits& limits) {
  std::vector<std::pair<double, double>> out;
  for_each_table(margins, q, nullptr, limits, [&](const EdgeTypeMatrix& t, double lw) {
    out.emplace_back(lw, static_cast<double>(t.at(k, j)));
  });
  return out;
}

StubMargins remove_stubs(StubMargins m, int k, int j, std::int64_t count) {
  m.in[j] -= count;
  m.out[k] -= count;
  return m;
}

bool has_stubs(const StubMargins& m, int k, int j, std::int64_t count) {
  return m.in[j] >= count && m.out[k] >= count;
}

void check_cell(const EdgeTypeDist& q, int k, int j) {
  if (k < 1 || k > q.max_degree() || j < 1 || j > q.max_degree()) {
    throw Error(ErrorCode::invalid_argument, "edge type (k, j) must lie in {1..K}^2");
  }
}

}  // namespace

void for_each_table(const StubMargins& margins, const EdgeTypeDist& q, const TiltVector* tilt,
                    const EnumerationLimits& limits,
                    const std::function<void(const EdgeTypeMatrix&, double)>& visit) {
  const int K = q.max_degree();
  check_margins(margins, K, &limits);
  std::vector<char> allowed((K + 1) * (K + 1), 0);
  Matrix log_q = Matrix::Constant(K + 1, K + 1, kNegInf);
  for (int k = 1; k <= K; ++k) {
    for (int j = 1; j <= K; ++j) {
      if (q(k, j) > 0.0) {
        allowed[k * (K + 1) + j] = 1;
        log_q(k, j) = std::log(q(k, j)) + (tilt != nullptr ? (*tilt)(k, j) : 0.0);
      }
    }
  }
  const std::function<void(const EdgeTypeMatrix&)> on_table = [&](const EdgeTypeMatrix& t) {
    double lw = 0.0;
    for (int k = 1; k <= K; ++k) {
      for (int j = 1; j <= K; ++j) {
        const std::int64_t e = t.at(k, j);
        if (e > 0) lw += static_cast<double>(e) * log_q(k, j) - log_factorial(e);
      }
    }
    visit(t, lw);
  };
  TableEnumerator(margins, std::move(allowed), limits.max_tables, on_table).run();
}

std::vector<EdgeTypeMatrix> enumerate_tables(const StubMargins& margins, const EdgeTypeDist& q,
                                             const EnumerationLimits& limits) {
  std::vector<EdgeTypeMatrix> tables;
  for_each_table(margins, q, nullptr, limits,
                 [&](const EdgeTypeMatrix& t, double) { tables.push_back(t); });
  return tables;
}

double log_tilted_partition_Z(const StubMargins& margins, const EdgeTypeDist& q,
                              const TiltVector& v, const EnumerationLimits& limits) {
  std::vector<double> log_weights;
  for_each_table(margins, q, &v, limits,
                 [&](const EdgeTypeMatrix&, double lw) { log_weights.push_back(lw); });
  if (log_weights.empty()) return kNegInf;
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  CompensatedSum sum;
  for (double lw : log_weights) sum.add(std::exp(lw - top));
  return top + std::log(sum.value());
}

double log_partition_Z(const StubMargins& margins, const EdgeTypeDist& q,
                       const EnumerationLimits& limits) {
  const int K = q.max_degree();
  return log_tilted_partition_Z(margins, q, TiltVector::Zero(K + 1, K + 1), limits);
}

double tilted_partition_Z(const StubMargins& margins, const EdgeTypeDist& q,
                          const TiltVector& v, const EnumerationLimits& limits) {
  return std::exp(log_tilted_partition_Z(margins, q, v, limits));
}

double log_partition_C(const StubMargins& margins, const EdgeTypeDist& q,
                       const EnumerationLimits& limits) {
  double log_c = log_partition_Z(margins, q, limits);
  if (log_c == kNegInf) return kNegInf;
  log_c += log_factorial(margins.in_total());
  for (int d = 0; d <= q.max_degree(); ++d) {
    log_c += log_factorial(margins.in[d]) + log_factorial(margins.out[d]);
  }
  return log_c;
}

double partition_C(const StubMargins& margins, const EdgeTypeDist& q,
                   const EnumerationLimits& limits) {
  return std::exp(log_partition_C(margins, q, limits));
}

BigInt wiring_count(const EdgeTypeMatrix& table) {
  auto factorial = [](std::int64_t n) {
    BigInt f = 1;
    for (std::int64_t i = 2; i <= n; ++i) f *= i;
    return f;
  };
  const StubMargins m = table.margins();
  BigInt numerator = factorial(table.total());
  for (int d = 0; d <= table.max_degree(); ++d) {
    numerator *= factorial(m.in[d]);
    numerator *= factorial(m.out[d]);
  }
  BigInt denominator = 1;
  for (std::int64_t e : table.cells()) denominator *= factorial(e);
  return numerator / denominator;
}

double log_wiring_count(const EdgeTypeMatrix& table) {
  const StubMargins m = table.margins();
  double value = log_factorial(table.total());
  for (int d = 0; d <= table.max_degree(); ++d) {
    value += log_factorial(m.in[d]) + log_factorial(m.out[d]);
  }
  for (std::int64_t e : table.cells()) value -= log_factorial(e);
  return value;
}

EdgeTypeMatrix wiring_table(const WiringSequence& w, int max_degree) {
  EdgeTypeMatrix t(max_degree);
  for (const StubPairing& s : w) {
    if (s.out_degree < 1 || s.out_degree > max_degree || s.in_degree < 1 ||
        s.in_degree > max_degree) {
      throw Error(ErrorCode::inconsistent_wiring, "pairing type outside {1..K}^2");
    }
    ++t.at(s.out_degree, s.in_degree);
  }
  return t;
}

double wiring_probability(const WiringSequence& w, const NodeTypeSequence& x,
                          const EdgeTypeDist& q, const EnumerationLimits& limits) {
  const int K = q.max_degree();
  std::vector<std::int64_t> out_used(x.nodes.size(), 0), in_used(x.nodes.size(), 0);
  for (const StubPairing& s : w) {
    if (s.out_node < 0 || s.out_node >= x.size() || s.in_node < 0 || s.in_node >= x.size()) {
      throw Error(ErrorCode::inconsistent_wiring, "pairing refers to a node outside X");
    }
    if (x.nodes[s.out_node].out != s.out_degree || x.nodes[s.in_node].in != s.in_degree) {
      throw Error(ErrorCode::inconsistent_wiring, "pairing type disagrees with node types");
    }
    ++out_used[s.out_node];
    ++in_used[s.in_node];
  }
  for (std::int64_t v = 0; v < x.size(); ++v) {
    if (out_used[v] != x.nodes[v].out || in_used[v] != x.nodes[v].in) {
      throw Error(ErrorCode::inconsistent_wiring,
                  "node " + std::to_string(v) + " stubs not used exactly once");
    }
  }
  const EdgeTypeMatrix t = wiring_table(w, K);
  double log_weight = 0.0;
  for (int k = 1; k <= K; ++k) {
    for (int j = 1; j <= K; ++j) {
      if (t.at(k, j) == 0) continue;
      if (q(k, j) == 0.0) return 0.0;
      log_weight += static_cast<double>(t.at(k, j)) * std::log(q(k, j));
    }
  }
  const double log_c = log_partition_C(sequence_margins(x), q, limits);
  return std::exp(log_weight - log_c);
}

EdgeMoment exact_edge_mean(const StubMargins& margins, const EdgeTypeDist& q, int k, int j,
                           const EnumerationLimits& limits) {
  check_cell(q, k, j);
  const auto samples = cell_samples(margins, q, k, j, limits);
  if (samples.empty()) {
    throw Error(ErrorCode::zero_partition, "no wiring has positive weight for these margins");
  }
  double top = kNegInf;
  for (const auto& s : samples) top = std::max(top, s.first);
  CompensatedSum weight, first;
  for (const auto& [lw, e] : samples) {
    const double w = std::exp(lw - top);
    weight.add(w);
    first.add(w * e);
  }
  EdgeMoment m;
  m.direct = first.value() / weight.value();

  if (q(k, j) > 0.0 && has_stubs(margins, k, j, 1)) {
    const double log_z = top + std::log(weight.value());
    const double log_z1 = log_partition_Z(remove_stubs(margins, k, j, 1), q, limits);
    m.via_partition = log_z1 == kNegInf ? 0.0 : q(k, j) * std::exp(log_z1 - log_z);
  }
  return m;
}

EdgeMoment exact_edge_variance(const StubMargins& margins, const EdgeTypeDist& q, int k, int j,
                               const EnumerationLimits& limits) {
  check_cell(q, k, j);
  const auto samples = cell_samples(margins, q, k, j, limits);
  if (samples.empty()) {
    throw Error(ErrorCode::zero_partition, "no wiring has positive weight for these margins");
  }
  double top = kNegInf;
  for (const auto& s : samples) top = std::max(top, s.first);
  CompensatedSum weight, first;
  for (const auto& [lw, e] : samples) {
    const double w = std::exp(lw - top);
    weight.add(w);
    first.add(w * e);
  }
  const double mean = first.value() / weight.value();
  CompensatedSum second;
  for (const auto& [lw, e] : samples) {
    const double d = e - mean;
    second.add(std::exp(lw - top) * d * d);
  }
  EdgeMoment m;
  m.direct = second.value() / weight.value();

  const double log_z = top + std::log(weight.value());
  double ratio1 = 0.0;
  double ratio2 = 0.0;
  if (q(k, j) > 0.0 && has_stubs(margins, k, j, 1)) {
    const double l1 = log_partition_Z(remove_stubs(margins, k, j, 1), q, limits);
    if (l1 != kNegInf) ratio1 = std::exp(l1 - log_z);
    if (has_stubs(margins, k, j, 2)) {
      const double l2 = log_partition_Z(remove_stubs(margins, k, j, 2), q, limits);
      if (l2 != kNegInf) ratio2 = std::exp(l2 - log_z);
    }
  }
  const double qkj = q(k, j);
  m.via_partition = qkj * ratio1 + qkj * qkj * (ratio2 - ratio1 * ratio1);
  return m;
}

double cumulant_generating_F(const TiltVector& v, const StubMargins& margins,
                             const EdgeTypeDist& q, const EnumerationLimits& limits) {
  const int K = q.max_degree();
  const double log_z0 = log_tilted_partition_Z(margins, q, TiltVector::Zero(K + 1, K + 1), limits);
  if (log_z0 == kNegInf) {
    throw Error(ErrorCode::zero_partition, "no wiring has positive weight for these margins");
  }
  return log_tilted_partition_Z(margins, q, v, limits) - log_z0;
}

double joint_first_m_prob(const StubMargins& margins, const EdgeTypeDist& q,
                          std::span<const std::pair<int, int>> types,
                          const EnumerationLimits& limits) {
  check_margins(margins, q.max_degree(), &limits);
  const std::int64_t total = margins.in_total();
  if (static_cast<std::int64_t>(types.size()) > total) {
    throw Error(ErrorCode::invalid_argument, "M exceeds the number of edges E");
  }
  StubMargins current = margins;
  double prob = 1.0;
  std::int64_t remaining = total;
  for (const auto& [k, j] : types) {
    check_cell(q, k, j);
    if (!has_stubs(current, k, j, 1) || q(k, j) == 0.0) return 0.0;
    double mean = 0.0;
    try {
      mean = exact_edge_mean(current, q, k, j, limits).direct;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::zero_partition) return 0.0;
      throw;
    }
    prob *= mean / static_cast<double>(remaining);
    current = remove_stubs(current, k, j, 1);
    --remaining;
  }
  return prob;
}

StubMargins sequence_margins(const NodeTypeSequence& x) {
  StubMargins m;
  m.in.assign(x.max_degree + 1, 0);
  m.out.assign(x.max_degree + 1, 0);
  for (const NodeType& t : x.nodes) {
    m.in[t.in] += t.in;
    m.out[t.out] += t.out;
  }
  return m;
}

void for_each_wiring(const NodeTypeSequence& x, const EdgeTypeDist& q,
                     const std::function<void(const WiringSequence&, double)>& visit) {
  if (x.max_degree != q.max_degree()) {
    throw Error(ErrorCode::invalid_argument, "sequence and Q have different K");
  }
  const StubMargins m = sequence_margins(x);
  check_margins(m, q.max_degree(), nullptr);
  const std::int64_t E = m.in_total();
  if (E > kOracleMaxEdges) {
    throw Error(ErrorCode::cap_exceeded, "brute-force oracle is limited to E <= " +
                                             std::to_string(kOracleMaxEdges));
  }
  std::vector<std::int64_t> out_owner, in_owner;
  for (std::int64_t v = 0; v < x.size(); ++v) {
    for (int s = 0; s < x.nodes[v].out; ++s) out_owner.push_back(v);
    for (int s = 0; s < x.nodes[v].in; ++s) in_owner.push_back(v);
  }
  std::vector<int> sigma(E), sigma_tilde(E);
  std::iota(sigma.begin(), sigma.end(), 0);
  WiringSequence w(E);
  do {
    std::iota(sigma_tilde.begin(), sigma_tilde.end(), 0);
    do {
      double weight = 1.0;
      for (std::int64_t l = 0; l < E; ++l) {
        const std::int64_t src = out_owner[sigma[l]];
        const std::int64_t dst = in_owner[sigma_tilde[l]];
        const int k = x.nodes[src].out;
        const int j = x.nodes[dst].in;
        w[l] = StubPairing{src, dst, k, j};
        weight *= q(k, j);
      }
      visit(w, weight);
    } while (std::next_permutation(sigma_tilde.begin(), sigma_tilde.end()));
  } while (std::next_permutation(sigma.begin(), sigma.end()));
}

OracleResult enumerate_wirings_oracle(const NodeTypeSequence& x, const EdgeTypeDist& q) {
  OracleResult result;
  CompensatedSum total;
  for_each_wiring(x, q, [&](const WiringSequence& w, double weight) {
    OracleTable& entry = result.tables[wiring_table(w, x.max_degree)];
    ++entry.wirings;
    entry.weight += weight;
    ++result.wirings;
    total.add(weight);
  });
  result.total_weight = total.value();
  for (auto& [table, entry] : result.tables) {
    entry.probability = result.total_weight > 0.0 ? entry.weight / result.total_weight : 0.0;
  }
  return result;
}

std::map<std::vector<std::pair<int, int>>, double> oracle_first_m_distribution(
    const NodeTypeSequence& x, const EdgeTypeDist& q, int m) {
  std::map<std::vector<std::pair<int, int>>, double> dist;
  double total = 0.0;
  std::vector<std::pair<int, int>> prefix(m);
  for_each_wiring(x, q, [&](const WiringSequence& w, double weight) {
    if (static_cast<int>(w.size()) < m) {
      throw Error(ErrorCode::invalid_argument, "M exceeds the number of edges E");
    }
    if (weight == 0.0) return;
    for (int i = 0; i < m; ++i) prefix[i] = {w[i].out_degree, w[i].in_degree};
    dist[prefix] += weight;
    total += weight;
  });
  for (auto& [key, p] : dist) p /= total;
  return dist;
}

namespace {

BigInt big_factorial(std::int64_t n) {
  BigInt f = 1;
  for (std::int64_t i = 2; i <= n; ++i) f *= i;
  return f;
}

Rational rational_power(const Rational& base, std::int64_t e) {
  Rational r = 1;
  for (std::int64_t i = 0; i < e; ++i) r *= base;
  return r;
}

template <typename Visit>
void for_each_rational_table(const StubMargins& margins, const RationalEdgeDist& q, Visit visit) {
  const int K = q.max_degree();
  check_margins(margins, K, nullptr);
  if (margins.in_total() > kRationalMaxEdges) {
    throw Error(ErrorCode::cap_exceeded, "rational mode is limited to E <= " +
                                             std::to_string(kRationalMaxEdges));
  }
  std::vector<char> allowed((K + 1) * (K + 1), 0);
  for (int k = 1; k <= K; ++k) {
    for (int j = 1; j <= K; ++j) allowed[k * (K + 1) + j] = q.at(k, j) != 0 ? 1 : 0;
  }
  const std::function<void(const EdgeTypeMatrix&)> on_table = [&](const EdgeTypeMatrix& t) {
    Rational w = 1;
    for (int k = 1; k <= K; ++k) {
      for (int j = 1; j <= K; ++j) {
        const std::int64_t e = t.at(k, j);
        if (e > 0) w *= rational_power(q.at(k, j), e) / Rational(big_factorial(e));
      }
    }
    visit(t, w);
  };
  TableEnumerator(margins, std::move(allowed), std::numeric_limits<std::int64_t>::max(),
                  on_table)
      .run();
}

}  // namespace

Rational partition_Z_rational(const StubMargins& margins, const RationalEdgeDist& q) {
  Rational z = 0;
  for_each_rational_table(margins, q, [&](const EdgeTypeMatrix&, const Rational& w) { z += w; });
  return z;
}

Rational partition_C_rational(const StubMargins& margins, const RationalEdgeDist& q) {
  BigInt scale = big_factorial(margins.in_total());
  for (int d = 0; d <= q.max_degree(); ++d) {
    scale *= big_factorial(margins.in[d]);
    scale *= big_factorial(margins.out[d]);
  }
  return Rational(scale) * partition_Z_rational(margins, q);
}

Rational exact_edge_mean_rational(const StubMargins& margins, const RationalEdgeDist& q, int k,
                                  int j) {
  Rational z = 0;
  Rational first = 0;
  for_each_rational_table(margins, q, [&](const EdgeTypeMatrix& t, const Rational& w) {
    z += w;
    first += w * t.at(k, j);
  });
  if (z == 0) {
    throw Error(ErrorCode::zero_partition, "no wiring has positive weight for these margins");
  }
  return first / z;
}

}  // namespace acg
