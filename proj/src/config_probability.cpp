#include "acg/config_probability.hpp"

#include "acg/error.hpp"
#include "acg/parallel.hpp"
#include "acg/sampler.hpp"

#include <algorithm>
#include <queue>

namespace acg {

int Configuration::attach(int parent, Orientation orientation, NodeType type) {
  if (parent < 0 || parent >= node_count_) {
    throw Error(ErrorCode::invalid_argument, "attachment parent must be an existing node");
  }
  attachments_.push_back(Attachment{parent, orientation, type, std::nullopt});
  return node_count_++;
}

void Configuration::close_cycle(int parent, Orientation orientation, int existing) {
  if (parent < 0 || parent >= node_count_ || existing < 0 || existing >= node_count_) {
    throw Error(ErrorCode::invalid_argument, "cycle edge must join existing nodes");
  }
  attachments_.push_back(Attachment{parent, orientation, NodeType{}, existing});
}

std::vector<NodeType> Configuration::node_types() const {
  std::vector<NodeType> types{root_};
  for (const Attachment& a : attachments_) {
    if (!a.closes_on) types.push_back(a.type);
  }
  return types;
}

std::vector<ConfigEdge> Configuration::edges() const {
  std::vector<ConfigEdge> out;
  int next = 1;
  for (const Attachment& a : attachments_) {
    const int other = a.closes_on ? *a.closes_on : next++;
    if (a.orientation == Orientation::out_edge) {
      out.push_back({a.parent, other});
    } else {
      out.push_back({other, a.parent});
    }
  }
  return out;
}

double two_node_edge_prob(const NodeTypeDist& p, const EdgeTypeDist& q, NodeType target,
                          NodeType source) {
  const int K = p.max_degree();
  auto in_range = [K](NodeType t) { return t.in >= 0 && t.in <= K && t.out >= 0 && t.out <= K; };
  if (!in_range(target) || !in_range(source)) {
    throw Error(ErrorCode::invalid_argument, "node type outside {0..K}^2");
  }
  const int j1 = target.in;
  const int k2 = source.out;
  if (j1 == 0 || k2 == 0) return 0.0;
  const double z = p.mean_degree();
  return j1 * k2 * p(target.in, target.out) * p(source.in, source.out) *
         assortative_weight(q, k2, j1) / (z * z);
}

double tree_config_prob(const Configuration& h, const NodeTypeDist& p, const EdgeTypeDist& q) {
  if (!h.is_tree()) throw Error(ErrorCode::not_a_tree, "configuration contains a cycle");
  const int K = p.max_degree();
  const std::vector<NodeType> types = h.node_types();
  for (const NodeType& t : types) {
    if (t.in < 0 || t.in > K || t.out < 0 || t.out > K) {
      throw Error(ErrorCode::invalid_argument, "tree probabilities need concrete node types");
    }
  }
  const ConditionalDists c = conditional_dists(p, q);
  double prob = 1.0;
  int node = 1;
  for (const Attachment& a : h.attachments()) {
    const NodeType parent = types[a.parent];
    const NodeType child = types[node++];
    if (a.orientation == Orientation::out_edge) {
      // parent's out-stub k' meets the child's in-stub j_m
      prob *= c.out_given_in(child.in, child.out) * c.edge_in_given_out(parent.out, child.in);
    } else {
      prob *= c.in_given_out(child.in, child.out) * c.edge_out_given_in(child.out, parent.in);
    }
  }
  return prob;
}

Configuration reroot(const Configuration& h, int node) {
  if (!h.is_tree()) throw Error(ErrorCode::not_a_tree, "configuration contains a cycle");
  if (node < 0 || node >= h.node_count()) {
    throw Error(ErrorCode::invalid_argument, "new root is not a configuration node");
  }
  const std::vector<NodeType> types = h.node_types();
  const std::vector<ConfigEdge> edges = h.edges();
  std::vector<std::vector<int>> incident(h.node_count());
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    incident[edges[e].source].push_back(e);
    incident[edges[e].target].push_back(e);
  }
  Configuration out(types[node]);
  std::vector<int> new_index(h.node_count(), -1);
  new_index[node] = 0;
  std::queue<int> frontier;
  frontier.push(node);
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    for (int e : incident[v]) {
      const ConfigEdge& edge = edges[e];
      const int w = edge.source == v ? edge.target : edge.source;
      if (new_index[w] >= 0) continue;
      const Orientation o = edge.source == v ? Orientation::out_edge : Orientation::in_edge;
      new_index[w] = out.attach(new_index[v], o, types[w]);
      frontier.push(w);
    }
  }
  return out;
}

std::pair<Configuration, Configuration> split_at_root(const Configuration& h, int left_branches) {
  if (!h.is_tree()) throw Error(ErrorCode::not_a_tree, "configuration contains a cycle");
  const std::vector<NodeType> types = h.node_types();
  // branch id of every node; root children open a new branch
  std::vector<int> branch(h.node_count(), -1);
  int branches = 0;
  int node = 1;
  for (const Attachment& a : h.attachments()) {
    branch[node] = a.parent == 0 ? branches++ : branch[a.parent];
    ++node;
  }
  Configuration left(h.root());
  Configuration right(h.root());
  std::vector<int> remap(h.node_count(), 0);
  node = 1;
  for (const Attachment& a : h.attachments()) {
    Configuration& target = branch[node] < left_branches ? left : right;
    remap[node] = target.attach(remap[a.parent], a.orientation, types[node]);
    ++node;
  }
  return {std::move(left), std::move(right)};
}

LtiCheck lti_factorization(const Configuration& h, int root_node, const NodeTypeDist& p,
                           const EdgeTypeDist& q, int left_branches) {
  const Configuration rooted = reroot(h, root_node);
  const auto [left, right] = split_at_root(rooted, left_branches);
  LtiCheck check;
  check.left = tree_config_prob(left, p, q);
  check.right = tree_config_prob(right, p, q);
  check.whole = tree_config_prob(rooted, p, q);
  check.product_check = std::abs(check.whole - check.left * check.right);
  return check;
}

GraphIndex::GraphIndex(const MultiGraph& g) : g_(&g), out_(g.nodes.size()), in_(g.nodes.size()) {
  for (std::int64_t e = 0; e < g.edge_count(); ++e) {
    out_[g.edges[e].source].push_back(e);
    in_[g.edges[e].target].push_back(e);
  }
}

namespace {

bool type_matches(NodeType pattern, NodeType actual) {
  return (pattern.in == kAnyDegree || pattern.in == actual.in) &&
         (pattern.out == kAnyDegree || pattern.out == actual.out);
}

class EmbeddingCounter {
 public:
  EmbeddingCounter(const GraphIndex& index, const Configuration& h)
      : index_(index), h_(h), attachments_(h.attachments()), map_(h.node_count(), -1),
        used_(index.graph().edges.size(), 0) {}

  std::int64_t count() {
    const MultiGraph& g = index_.graph();
    if (h_.node_count() > g.node_count() || h_.edge_count() > g.edge_count()) return 0;
    std::int64_t total = 0;
    for (std::int64_t v = 0; v < g.node_count(); ++v) {
      if (!type_matches(h_.root(), g.nodes[v])) continue;
      map_[0] = v;
      total += extend(0, 1);
    }
    return total;
  }

 private:
  bool is_mapped(std::int64_t v, int mapped_nodes) const {
    for (int i = 0; i < mapped_nodes; ++i) {
      if (map_[i] == v) return true;
    }
    return false;
  }

  std::int64_t extend(std::size_t step, int mapped_nodes) {
    if (step == attachments_.size()) return 1;
    const Attachment& a = attachments_[step];
    const MultiGraph& g = index_.graph();
    const std::int64_t anchor = map_[a.parent];
    const bool outward = a.orientation == Orientation::out_edge;
    const auto& candidates = outward ? index_.out_edges(anchor) : index_.in_edges(anchor);
    std::int64_t total = 0;
    for (std::int64_t e : candidates) {
      if (used_[e]) continue;
      const Edge& edge = g.edges[e];
      const std::int64_t other = outward ? edge.target : edge.source;
      if (a.closes_on) {
        if (other != map_[*a.closes_on]) continue;
        used_[e] = 1;
        total += extend(step + 1, mapped_nodes);
        used_[e] = 0;
      } else {
        if (is_mapped(other, mapped_nodes) || !type_matches(a.type, g.nodes[other])) continue;
        used_[e] = 1;
        map_[mapped_nodes] = other;
        total += extend(step + 1, mapped_nodes + 1);
        map_[mapped_nodes] = -1;
        used_[e] = 0;
      }
    }
    return total;
  }

  const GraphIndex& index_;
  const Configuration& h_;
  const std::vector<Attachment>& attachments_;
  std::vector<std::int64_t> map_;
  std::vector<char> used_;
};

}  // namespace

std::int64_t count_config_occurrences(const GraphIndex& index, const Configuration& h) {
  return EmbeddingCounter(index, h).count();
}

std::int64_t count_config_occurrences(const MultiGraph& g, const Configuration& h) {
  return count_config_occurrences(GraphIndex(g), h);
}

Matrix endpoint_pair_fractions(const MultiGraph& g) {
  const int K = g.max_degree;
  const int types = (K + 1) * (K + 1);
  Matrix f = Matrix::Zero(types, types);
  if (g.edges.empty()) return f;
  for (const Edge& e : g.edges) {
    const NodeType s = g.nodes[e.source];
    const NodeType t = g.nodes[e.target];
    f(t.in * (K + 1) + t.out, s.in * (K + 1) + s.out) += 1.0;
  }
  return f / static_cast<double>(g.edges.size());
}

CycleScalingReport cycle_order_estimate(const Configuration& h,
                                        const std::vector<MultiGraph>& small,
                                        const std::vector<MultiGraph>& large) {
  if (small.empty() || large.empty()) {
    throw Error(ErrorCode::invalid_argument, "cycle scaling needs graphs at both sizes");
  }
  auto mean_count = [&h](const std::vector<MultiGraph>& graphs) {
    double sum = 0.0;
    for (const MultiGraph& g : graphs) sum += static_cast<double>(count_config_occurrences(g, h));
    return sum / static_cast<double>(graphs.size());
  };
  CycleScalingReport r;
  r.nodes_small = small.front().node_count();
  r.nodes_large = large.front().node_count();
  r.samples = static_cast<std::int64_t>(std::min(small.size(), large.size()));
  r.mean_small = mean_count(small);
  r.mean_large = mean_count(large);
  r.ratio = r.mean_small > 0.0 ? r.mean_large / r.mean_small : 0.0;
  return r;
}

CycleScalingReport cycle_order_estimate(const Configuration& h, const NodeTypeDist& p,
                                        const EdgeTypeDist& q, std::int64_t n, int samples,
                                        std::uint64_t seed, double delta, unsigned threads) {
  std::vector<double> counts(2 * static_cast<std::size_t>(samples), 0.0);
  parallel_for(counts.size(), threads, [&](std::size_t i) {
    GenerateOptions opts;
    opts.nodes = i < static_cast<std::size_t>(samples) ? n : 2 * n;
    opts.delta = delta;
    opts.seed = seed;
    opts.stream = i;
    const MultiGraph g = generate_graph(p, q, opts);
    counts[i] = static_cast<double>(count_config_occurrences(g, h));
  });
  CycleScalingReport r;
  r.nodes_small = n;
  r.nodes_large = 2 * n;
  r.samples = samples;
  for (int i = 0; i < samples; ++i) {
    r.mean_small += counts[i];
    r.mean_large += counts[samples + i];
  }
  r.mean_small /= samples;
  r.mean_large /= samples;
  r.ratio = r.mean_small > 0.0 ? r.mean_large / r.mean_small : 0.0;
  return r;
}

Configuration two_cycle() {
  Configuration h(NodeType{kAnyDegree, kAnyDegree});
  const int other = h.attach(0, Orientation::out_edge, NodeType{kAnyDegree, kAnyDegree});
  h.close_cycle(0, Orientation::in_edge, other);
  return h;
}

Configuration self_loop_config() {
  Configuration h(NodeType{kAnyDegree, kAnyDegree});
  h.close_cycle(0, Orientation::out_edge, 0);
  return h;
}

Configuration single_edge() {
  Configuration h(NodeType{kAnyDegree, kAnyDegree});
  h.attach(0, Orientation::out_edge, NodeType{kAnyDegree, kAnyDegree});
  return h;
}

}  // namespace acg
