#pragma once

#include "acg/degree_model.hpp"
#include "acg/graph.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace acg {

// Degree value that matches any degree when counting embeddings.
inline constexpr int kAnyDegree = -1;

// in_edge: the attached node points into its parent. out_edge: the parent
// points to the attached node.
enum class Orientation { in_edge, out_edge };

struct Attachment {
  int parent = 0;  // index of an existing configuration node (0 = root)
  Orientation orientation = Orientation::in_edge;
  NodeType type;   // type of the new node; ignored when closes_on is set
  // Set when the edge lands on an existing node instead of a new one, which
  // closes a cycle.
  std::optional<int> closes_on;
};

struct ConfigEdge {
  int source = 0;
  int target = 0;
};

// A rooted configuration grown edge by edge. Node 0 is the root; every
// attachment without closes_on adds the next node index.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(NodeType root) : root_(root) {}

  // Adds a new node; returns its index.
  int attach(int parent, Orientation orientation, NodeType type);
  // Adds an edge between parent and an existing node.
  void close_cycle(int parent, Orientation orientation, int existing);

  NodeType root() const { return root_; }
  const std::vector<Attachment>& attachments() const { return attachments_; }
  int node_count() const { return node_count_; }
  int edge_count() const { return static_cast<int>(attachments_.size()); }
  bool is_tree() const { return node_count_ == edge_count() + 1; }

  std::vector<NodeType> node_types() const;
  std::vector<ConfigEdge> edges() const;

 private:
  NodeType root_;
  std::vector<Attachment> attachments_;
  int node_count_ = 1;
};

// Asymptotic probability that an edge v2 → v1 joins a (j1,k1) target to a
// (j2,k2) source: j1 k2 P_{j1k1} P_{j2k2} Q_{k2j1} / (z² Q⁺_{k2} Q⁻_{j1}).
double two_node_edge_prob(const NodeTypeDist& p, const EdgeTypeDist& q, NodeType target,
                          NodeType source);

// Product over attachments, conditional on the root type: an out-edge to a
// new node m contributes P_{k_m|j_m} Q_{j_m|k_parent}, an in-edge from m
// contributes P_{j_m|k_m} Q_{k_m|j_parent}. Throws NotATree for cycles.
double tree_config_prob(const Configuration& h, const NodeTypeDist& p, const EdgeTypeDist& q);

// The same tree rooted at `node`; edge directions are preserved.
Configuration reroot(const Configuration& h, int node);

// Splits the root's branches: the first `left_branches` (in attachment order)
// form the first tree, the rest the second. Both keep the root type.
std::pair<Configuration, Configuration> split_at_root(const Configuration& h, int left_branches);

struct LtiCheck {
  double left = 1.0;
  double right = 1.0;
  double whole = 1.0;
  double product_check = 0.0;  // |whole − left·right|
};

// Reroots h at `root_node`, splits it there and compares the tree probability
// of the whole with the product over the two parts.
LtiCheck lti_factorization(const Configuration& h, int root_node, const NodeTypeDist& p,
                           const EdgeTypeDist& q, int left_branches = 1);

// Adjacency lists of a multigraph, for repeated embedding counts.
class GraphIndex {
 public:
  explicit GraphIndex(const MultiGraph& g);

  const MultiGraph& graph() const { return *g_; }
  const std::vector<std::int64_t>& out_edges(std::int64_t v) const { return out_[v]; }
  const std::vector<std::int64_t>& in_edges(std::int64_t v) const { return in_[v]; }

 private:
  const MultiGraph* g_;
  std::vector<std::vector<std::int64_t>> out_;
  std::vector<std::vector<std::int64_t>> in_;
};

// Number of embeddings of h into g rooted at any node: configuration nodes map
// to graph nodes injectively with matching types (kAnyDegree matches all),
// configuration edges map to distinct graph edges of the same direction.
// Parallel edges give distinct embeddings.
std::int64_t count_config_occurrences(const GraphIndex& index, const Configuration& h);
std::int64_t count_config_occurrences(const MultiGraph& g, const Configuration& h);

// Fraction of edges running from a source of type s to a target of type t,
// at row t.in*(K+1)+t.out, column s.in*(K+1)+s.out.
Matrix endpoint_pair_fractions(const MultiGraph& g);

struct CycleScalingReport {
  std::int64_t nodes_small = 0;
  std::int64_t nodes_large = 0;
  std::int64_t samples = 0;
  double mean_small = 0.0;
  double mean_large = 0.0;
  double ratio = 0.0;  // mean_large / mean_small
};

CycleScalingReport cycle_order_estimate(const Configuration& h,
                                        const std::vector<MultiGraph>& small,
                                        const std::vector<MultiGraph>& large);

// Generates `samples` graphs at n and 2n nodes and compares mean counts.
CycleScalingReport cycle_order_estimate(const Configuration& h, const NodeTypeDist& p,
                                        const EdgeTypeDist& q, std::int64_t n, int samples,
                                        std::uint64_t seed, double delta = 0.25,
                                        unsigned threads = 0);

// Mutual edge pair v → w → v, v ≠ w, any types.
Configuration two_cycle();
// A single self-loop at a node of any type.
Configuration self_loop_config();
// A single edge of any types.
Configuration single_edge();

}  // namespace acg
