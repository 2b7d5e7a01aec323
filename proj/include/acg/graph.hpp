#pragma once

#include <cstdint>
#include <vector>

namespace acg {

// Node type (j, k): in-degree j, out-degree k.
struct NodeType {
  int in = 0;
  int out = 0;

  friend bool operator==(const NodeType&, const NodeType&) = default;
};

struct NodeTypeSequence {
  int max_degree = 0;  // K
  std::vector<NodeType> nodes;

  std::int64_t size() const { return static_cast<std::int64_t>(nodes.size()); }
  // D = Σ_i (k_i − j_i)
  std::int64_t discrepancy() const;
  bool is_feasible() const { return discrepancy() == 0; }
};

// Stub counts per degree class, indexed 0..K. Entry 0 is always zero since a
// degree-0 node carries no stubs.
struct StubMargins {
  std::vector<std::int64_t> in;   // e⁻_j
  std::vector<std::int64_t> out;  // e⁺_k

  int max_degree() const { return static_cast<int>(in.size()) - 1; }
  std::int64_t in_total() const;
  std::int64_t out_total() const;
  bool is_balanced() const { return in_total() == out_total(); }

  friend bool operator==(const StubMargins&, const StubMargins&) = default;
};

// Edge-type counts e_kj, row k = source out-degree, column j = target in-degree.
class EdgeTypeMatrix {
 public:
  EdgeTypeMatrix() = default;
  explicit EdgeTypeMatrix(int max_degree)
      : max_degree_(max_degree), cells_((max_degree + 1) * (max_degree + 1), 0) {}

  int max_degree() const { return max_degree_; }
  std::int64_t& at(int k, int j) { return cells_[k * (max_degree_ + 1) + j]; }
  std::int64_t at(int k, int j) const { return cells_[k * (max_degree_ + 1) + j]; }

  std::int64_t out_margin(int k) const;  // e⁺_k = Σ_j e_kj
  std::int64_t in_margin(int j) const;   // e⁻_j = Σ_k e_kj
  std::int64_t total() const;
  StubMargins margins() const;

  const std::vector<std::int64_t>& cells() const { return cells_; }

  friend bool operator==(const EdgeTypeMatrix&, const EdgeTypeMatrix&) = default;
  friend auto operator<=>(const EdgeTypeMatrix& a, const EdgeTypeMatrix& b) {
    return a.cells_ <=> b.cells_;
  }

 private:
  int max_degree_ = 0;
  std::vector<std::int64_t> cells_;
};

struct Edge {
  std::int64_t source = 0;
  std::int64_t target = 0;
  int out_degree = 0;  // k of the source
  int in_degree = 0;   // j of the target

  bool self_loop() const { return source == target; }
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct GenerationMeta {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::int64_t discrepancy = 0;  // D of the accepted draw, before clipping
  std::int64_t clip_count = 0;
  int redraws = 0;
  int dead_end_restarts = 0;
  bool uniform_fallback = false;
  std::int64_t fallback_edges = 0;
};

// Directed multigraph in wiring order. Self-loops and parallel edges allowed.
struct MultiGraph {
  int max_degree = 0;
  std::vector<NodeType> nodes;
  std::vector<Edge> edges;
  GenerationMeta meta;

  std::int64_t node_count() const { return static_cast<std::int64_t>(nodes.size()); }
  std::int64_t edge_count() const { return static_cast<std::int64_t>(edges.size()); }
};

}  // namespace acg
