#pragma once

// Exact finite-E combinatorics of the assortative wiring measure.
//
// Conditioned on the stub margins e = (e⁻, e⁺), a wiring W (a pair of
// permutations matching the E out-stubs to the E in-stubs) has probability
// proportional to Π_kj Q_kj^{e_kj(W)}. Everything here is computed either by
// summing over contingency tables e_kj with the given margins, or (for tiny E)
// by brute force over all (E!)² permutation pairs.
//
// Margins are indexed by degree 0..K and must have zero degree-0 entries.

#include "acg/degree_model.hpp"
#include "acg/graph.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace acg {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

struct EnumerationLimits {
  std::int64_t max_edges = 60;
  int max_degree = 3;
  std::int64_t max_tables = 50'000'000;
};

inline constexpr std::int64_t kOracleMaxEdges = 7;
inline constexpr std::int64_t kRationalMaxEdges = 12;

// Exponential tilt v_kj, laid out like Q.
using TiltVector = Matrix;

// Calls visit(table, log_weight) for every table with the given margins whose
// weight Π (Q_kj e^{v_kj})^{e_kj} / e_kj! is positive. Tables are visited in a
// fixed lexicographic order. Throws MarginMismatch or CapExceeded.
void for_each_table(const StubMargins& margins, const EdgeTypeDist& q, const TiltVector* tilt,
                    const EnumerationLimits& limits,
                    const std::function<void(const EdgeTypeMatrix&, double)>& visit);

std::vector<EdgeTypeMatrix> enumerate_tables(const StubMargins& margins, const EdgeTypeDist& q,
                                             const EnumerationLimits& limits = {});

// log Z_v; −inf when no table has positive weight.
double log_tilted_partition_Z(const StubMargins& margins, const EdgeTypeDist& q,
                              const TiltVector& v, const EnumerationLimits& limits = {});
double log_partition_Z(const StubMargins& margins, const EdgeTypeDist& q,
                       const EnumerationLimits& limits = {});
// Z_v = Σ_tables Π (Q_kj e^{v_kj})^{e_kj} / e_kj!
double tilted_partition_Z(const StubMargins& margins, const EdgeTypeDist& q,
                          const TiltVector& v, const EnumerationLimits& limits = {});

// C = E! (Π_j e⁻_j!) (Π_k e⁺_k!) Z_0, the total weight of all wirings.
double log_partition_C(const StubMargins& margins, const EdgeTypeDist& q,
                       const EnumerationLimits& limits = {});
double partition_C(const StubMargins& margins, const EdgeTypeDist& q,
                   const EnumerationLimits& limits = {});

// Number of wirings W with e(W) = table:
// E! (Π_j e⁻_j!) (Π_k e⁺_k!) / Π_kj e_kj!
BigInt wiring_count(const EdgeTypeMatrix& table);
double log_wiring_count(const EdgeTypeMatrix& table);

// One matched stub pair of a wiring.
struct StubPairing {
  std::int64_t out_node = 0;
  std::int64_t in_node = 0;
  int out_degree = 0;  // k
  int in_degree = 0;   // j
};
using WiringSequence = std::vector<StubPairing>;

EdgeTypeMatrix wiring_table(const WiringSequence& w, int max_degree);

// P[W | X] = C^{-1} Π Q_kj^{e_kj(W)}. Throws InconsistentWiring when W does not
// use every stub of X exactly once or mislabels a type.
double wiring_probability(const WiringSequence& w, const NodeTypeSequence& x,
                          const EdgeTypeDist& q, const EnumerationLimits& limits = {});

// A conditional moment computed by two independent routes: a weighted average
// over tables, and a ratio of partition functions at shifted margins.
struct EdgeMoment {
  double direct = 0.0;
  double via_partition = 0.0;

  double value() const { return direct; }
};

// E[e_kj | e]. Throws ZeroPartition when no table has positive weight.
EdgeMoment exact_edge_mean(const StubMargins& margins, const EdgeTypeDist& q, int k, int j,
                           const EnumerationLimits& limits = {});
// Var[e_kj | e].
EdgeMoment exact_edge_variance(const StubMargins& margins, const EdgeTypeDist& q, int k, int j,
                               const EnumerationLimits& limits = {});

// F(v) = log E[exp(Σ v_kj e_kj) | e] = log Z_v − log Z_0.
double cumulant_generating_F(const TiltVector& v, const StubMargins& margins,
                             const EdgeTypeDist& q, const EnumerationLimits& limits = {});

// Probability that the first M edges have the given (k, j) types:
// (E−M)!/E! Π_i E[e_{k_i j_i} | e(i−1)], where e(i) removes one j_i in-stub and
// one k_i out-stub from e(i−1). Zero when a factor's margins or partition vanish.
double joint_first_m_prob(const StubMargins& margins, const EdgeTypeDist& q,
                          std::span<const std::pair<int, int>> types,
                          const EnumerationLimits& limits = {});

// Brute force over all (E!)² permutation pairs of X's stubs.
struct OracleTable {
  std::int64_t wirings = 0;   // permutation pairs producing this table
  double weight = 0.0;        // their summed weight
  double probability = 0.0;   // weight / total_weight
};

struct OracleResult {
  double total_weight = 0.0;  // C
  std::int64_t wirings = 0;   // (E!)²
  std::map<EdgeTypeMatrix, OracleTable> tables;
};

// Visits every permutation pair: wiring (out-stub owner, in-stub owner, type)
// sequence and its weight Π_ℓ Q_{k_ℓ j_ℓ}. Throws CapExceeded for E > 7.
void for_each_wiring(const NodeTypeSequence& x, const EdgeTypeDist& q,
                     const std::function<void(const WiringSequence&, double)>& visit);

OracleResult enumerate_wirings_oracle(const NodeTypeSequence& x, const EdgeTypeDist& q);

// Oracle law of the first M edge types, keyed by the (k, j) sequence.
std::map<std::vector<std::pair<int, int>>, double> oracle_first_m_distribution(
    const NodeTypeSequence& x, const EdgeTypeDist& q, int m);

// Exact rational arithmetic for small E, used for golden values.
class RationalEdgeDist {
 public:
  explicit RationalEdgeDist(int max_degree)
      : max_degree_(max_degree), cells_((max_degree + 1) * (max_degree + 1)) {}

  int max_degree() const { return max_degree_; }
  Rational& at(int k, int j) { return cells_[k * (max_degree_ + 1) + j]; }
  const Rational& at(int k, int j) const { return cells_[k * (max_degree_ + 1) + j]; }

 private:
  int max_degree_;
  std::vector<Rational> cells_;
};

Rational partition_Z_rational(const StubMargins& margins, const RationalEdgeDist& q);
Rational partition_C_rational(const StubMargins& margins, const RationalEdgeDist& q);
Rational exact_edge_mean_rational(const StubMargins& margins, const RationalEdgeDist& q, int k,
                                  int j);

// Margins of a feasible node-type sequence.
StubMargins sequence_margins(const NodeTypeSequence& x);

}  // namespace acg
