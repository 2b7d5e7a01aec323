#pragma once

#include "acg/degree_model.hpp"
#include "acg/graph.hpp"
#include "acg/rng.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace acg {

struct StubCensus {
  int max_degree = 0;
  std::int64_t nodes = 0;
  std::vector<std::int64_t> type_counts;  // u_jk at j*(K+1)+k
  std::vector<std::int64_t> in_nodes;     // u⁻_j
  std::vector<std::int64_t> out_nodes;    // u⁺_k
  StubMargins stubs;                      // e⁻_j = j u⁻_j, e⁺_k = k u⁺_k
  std::int64_t edges = 0;                 // E

  std::int64_t type_count(int j, int k) const { return type_counts[j * (max_degree + 1) + k]; }
};

// N i.i.d. node types drawn from P. Throws InvalidArgument when n < 1.
NodeTypeSequence draw_node_sequence(const NodeTypeDist& p, std::int64_t n, Rng& rng);

// T(N) = N^{1/2 + δ}
double clip_threshold(std::int64_t n, double delta);

enum class ClipStatus { accepted, rejected_threshold, rejected_overflow };

struct ClipOutcome {
  ClipStatus status = ClipStatus::rejected_threshold;
  NodeTypeSequence sequence;          // feasible when accepted
  std::vector<std::int64_t> adjusted;  // node indices that received a stub, ascending

  bool accepted() const { return status == ClipStatus::accepted; }
};

// Makes a drawn sequence feasible by adding one stub to each of |D| distinct
// nodes on the deficient side (in-stubs when D > 0, out-stubs when D < 0).
// The adjusted set is uniform among nodes whose degree on that side is below
// K; if fewer than |D| such nodes exist the draw is rejected with
// rejected_overflow. |D| > T(N) gives rejected_threshold.
ClipOutcome clip_sequence(const NodeTypeSequence& x, double delta, Rng& rng);

// Throws InfeasibleSequence when Σj ≠ Σk.
StubCensus stub_census(const NodeTypeSequence& x);

// Step law of the sequential wiring for the given remaining stubs:
// entry (k, j) is e⁻_j e⁺_k Q_kj/(Q⁺_k Q⁻_j) / C. All zero when C = 0.
Matrix edge_type_probabilities(const StubMargins& remaining, const EdgeTypeDist& q);

// C = Σ_jk e⁻_j e⁺_k Q_kj/(Q⁺_k Q⁻_j)
double wiring_normalization(const StubMargins& remaining, const EdgeTypeDist& q);

struct WiringEvent {
  std::int64_t step = 0;  // 1-based
  int out_degree = 0;     // k
  int in_degree = 0;      // j
  double normalization = 0.0;  // C(step)
  StubMargins remaining;       // stubs available before this step
};

struct WiringOptions {
  int max_restarts = 10;
  // Stop after this many edges; negative wires everything.
  std::int64_t max_steps = -1;
  bool record_events = false;
};

struct WiringResult {
  std::vector<Edge> edges;
  int restarts = 0;
  bool uniform_fallback = false;
  std::int64_t fallback_edges = 0;
  std::vector<WiringEvent> events;  // last attempt only
};

// Sequential Q-weighted stub matching. Edge types are drawn from the step law
// above; the in-stub and out-stub are then uniform within their degree class.
// A dead end (C = 0 with stubs left) restarts from scratch up to
// max_restarts times, after which the residual stubs are matched uniformly.
WiringResult sequential_wiring(const NodeTypeSequence& x, const EdgeTypeDist& q, Rng& rng,
                               const WiringOptions& options = {});

struct GenerateOptions {
  std::int64_t nodes = 0;
  double delta = 0.25;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  int max_redraws = 100;
  WiringOptions wiring;
};

// Draw, clip and wire. Deterministic in (P, Q, options). Throws
// RetriesExhausted when max_redraws draws are rejected.
MultiGraph generate_graph(const NodeTypeDist& p, const EdgeTypeDist& q,
                          const GenerateOptions& options);

// Draw and clip only; returns the accepted sequence and counts rejections.
struct NodeDrawResult {
  NodeTypeSequence sequence;
  std::int64_t discrepancy = 0;
  std::int64_t clip_count = 0;
  int redraws = 0;
};
NodeDrawResult draw_feasible_sequence(const NodeTypeDist& p, std::int64_t n, double delta,
                                      int max_redraws, Rng& rng);

struct GraphClass {
  EdgeTypeMatrix edge_types;
  std::int64_t self_loops = 0;
  // Σ over distinct (source, target) pairs of (multiplicity − 1)
  std::int64_t multi_edges = 0;
  bool is_simple = true;
};

GraphClass classify_graph(const MultiGraph& g);

}  // namespace acg
