#include "acg/sampler.hpp"

#include "acg/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace acg {
namespace {

struct StubPools {
  std::vector<std::vector<std::int64_t>> in;   // node ids, one entry per in-stub, by j
  std::vector<std::vector<std::int64_t>> out;  // node ids, one entry per out-stub, by k
};

StubPools build_pools(const NodeTypeSequence& x) {
  StubPools pools;
  pools.in.resize(x.max_degree + 1);
  pools.out.resize(x.max_degree + 1);
  for (std::int64_t v = 0; v < x.size(); ++v) {
    const NodeType t = x.nodes[v];
    for (int s = 0; s < t.in; ++s) pools.in[t.in].push_back(v);
    for (int s = 0; s < t.out; ++s) pools.out[t.out].push_back(v);
  }
  return pools;
}

std::int64_t take_uniform(std::vector<std::int64_t>& pool, Rng& rng) {
  const std::uint64_t idx = uniform_index(rng, pool.size());
  const std::int64_t node = pool[idx];
  pool[idx] = pool.back();
  pool.pop_back();
  return node;
}

StubMargins pool_margins(const StubPools& pools) {
  StubMargins m;
  for (const auto& p : pools.in) m.in.push_back(static_cast<std::int64_t>(p.size()));
  for (const auto& p : pools.out) m.out.push_back(static_cast<std::int64_t>(p.size()));
  return m;
}

Matrix weight_matrix(const EdgeTypeDist& q) {
  const int K = q.max_degree();
  Matrix w = Matrix::Zero(K + 1, K + 1);
  for (int k = 1; k <= K; ++k) {
    for (int j = 1; j <= K; ++j) w(k, j) = assortative_weight(q, k, j);
  }
  return w;
}

// Pairs every remaining out-stub with a uniformly random remaining in-stub.
void match_uniformly(StubPools& pools, const NodeTypeSequence& x, Rng& rng,
                     std::vector<Edge>& edges, std::int64_t& matched) {
  std::vector<std::int64_t> outs, ins;
  for (auto& p : pools.out) {
    outs.insert(outs.end(), p.begin(), p.end());
    p.clear();
  }
  for (auto& p : pools.in) {
    ins.insert(ins.end(), p.begin(), p.end());
    p.clear();
  }
  for (std::size_t i = ins.size(); i > 1; --i) {
    std::swap(ins[i - 1], ins[uniform_index(rng, i)]);
  }
  for (std::size_t i = 0; i < outs.size(); ++i) {
    edges.push_back(Edge{outs[i], ins[i], x.nodes[outs[i]].out, x.nodes[ins[i]].in});
  }
  matched = static_cast<std::int64_t>(outs.size());
}

}  // namespace

NodeTypeSequence draw_node_sequence(const NodeTypeDist& p, std::int64_t n, Rng& rng) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "node count must be at least 1");
  const int K = p.max_degree();
  const Matrix& m = p.matrix();
  std::vector<double> weights;
  weights.reserve((K + 1) * (K + 1));
  for (int j = 0; j <= K; ++j) {
    for (int k = 0; k <= K; ++k) weights.push_back(m(j, k));
  }
  std::discrete_distribution<int> cell(weights.begin(), weights.end());
  NodeTypeSequence x;
  x.max_degree = K;
  x.nodes.resize(n);
  for (auto& t : x.nodes) {
    const int c = cell(rng);
    t = NodeType{c / (K + 1), c % (K + 1)};
  }
  return x;
}

double clip_threshold(std::int64_t n, double delta) {
  return std::pow(static_cast<double>(n), 0.5 + delta);
}

ClipOutcome clip_sequence(const NodeTypeSequence& x, double delta, Rng& rng) {
  if (!(delta > 0.0 && delta < 0.5)) {
    throw Error(ErrorCode::invalid_argument, "clipping exponent delta must lie in (0, 1/2)");
  }
  ClipOutcome outcome;
  const std::int64_t d = x.discrepancy();
  const std::int64_t magnitude = d < 0 ? -d : d;
  if (static_cast<double>(magnitude) > clip_threshold(x.size(), delta)) {
    outcome.status = ClipStatus::rejected_threshold;
    return outcome;
  }
  outcome.sequence = x;
  if (d == 0) {
    outcome.status = ClipStatus::accepted;
    return outcome;
  }
  const bool add_in = d > 0;
  std::vector<std::int64_t> eligible;
  eligible.reserve(x.nodes.size());
  for (std::int64_t v = 0; v < x.size(); ++v) {
    const int degree = add_in ? x.nodes[v].in : x.nodes[v].out;
    if (degree < x.max_degree) eligible.push_back(v);
  }
  if (static_cast<std::int64_t>(eligible.size()) < magnitude) {
    outcome.status = ClipStatus::rejected_overflow;
    outcome.sequence = {};
    return outcome;
  }
  // partial Fisher-Yates: the first |D| slots form a uniform subset
  for (std::int64_t i = 0; i < magnitude; ++i) {
    const std::uint64_t pick = i + uniform_index(rng, eligible.size() - i);
    std::swap(eligible[i], eligible[pick]);
  }
  outcome.adjusted.assign(eligible.begin(), eligible.begin() + magnitude);
  std::sort(outcome.adjusted.begin(), outcome.adjusted.end());
  for (std::int64_t v : outcome.adjusted) {
    if (add_in) {
      ++outcome.sequence.nodes[v].in;
    } else {
      ++outcome.sequence.nodes[v].out;
    }
  }
  outcome.status = ClipStatus::accepted;
  return outcome;
}

StubCensus stub_census(const NodeTypeSequence& x) {
  const int K = x.max_degree;
  StubCensus c;
  c.max_degree = K;
  c.nodes = x.size();
  c.type_counts.assign((K + 1) * (K + 1), 0);
  c.in_nodes.assign(K + 1, 0);
  c.out_nodes.assign(K + 1, 0);
  for (const NodeType& t : x.nodes) {
    if (t.in < 0 || t.in > K || t.out < 0 || t.out > K) {
      throw Error(ErrorCode::invalid_argument, "node degree outside {0..K}");
    }
    ++c.type_counts[t.in * (K + 1) + t.out];
    ++c.in_nodes[t.in];
    ++c.out_nodes[t.out];
  }
  c.stubs.in.resize(K + 1);
  c.stubs.out.resize(K + 1);
  for (int d = 0; d <= K; ++d) {
    c.stubs.in[d] = d * c.in_nodes[d];
    c.stubs.out[d] = d * c.out_nodes[d];
  }
  if (c.stubs.in_total() != c.stubs.out_total()) {
    throw Error(ErrorCode::infeasible_sequence,
                "in-stubs " + std::to_string(c.stubs.in_total()) + " != out-stubs " +
                    std::to_string(c.stubs.out_total()));
  }
  c.edges = c.stubs.out_total();
  return c;
}

double wiring_normalization(const StubMargins& remaining, const EdgeTypeDist& q) {
  const int K = q.max_degree();
  double c = 0.0;
  for (int j = 1; j <= K; ++j) {
    for (int k = 1; k <= K; ++k) {
      c += static_cast<double>(remaining.in[j]) * static_cast<double>(remaining.out[k]) *
           assortative_weight(q, k, j);
    }
  }
  return c;
}

Matrix edge_type_probabilities(const StubMargins& remaining, const EdgeTypeDist& q) {
  const int K = q.max_degree();
  Matrix prob = Matrix::Zero(K + 1, K + 1);
  const double c = wiring_normalization(remaining, q);
  if (c <= 0.0) return prob;
  for (int k = 1; k <= K; ++k) {
    for (int j = 1; j <= K; ++j) {
      prob(k, j) = static_cast<double>(remaining.in[j]) * static_cast<double>(remaining.out[k]) *
                   assortative_weight(q, k, j) / c;
    }
  }
  return prob;
}

WiringResult sequential_wiring(const NodeTypeSequence& x, const EdgeTypeDist& q, Rng& rng,
                               const WiringOptions& options) {
  if (x.max_degree != q.max_degree()) {
    throw Error(ErrorCode::invalid_argument, "sequence and Q have different K");
  }
  const StubCensus census = stub_census(x);
  const int K = x.max_degree;
  const Matrix w = weight_matrix(q);
  const std::int64_t total =
      options.max_steps < 0 ? census.edges : std::min(options.max_steps, census.edges);

  WiringResult result;
  for (int attempt = 0;; ++attempt) {
    StubPools pools = build_pools(x);
    std::vector<std::int64_t> in_count(census.stubs.in.begin(), census.stubs.in.end());
    std::vector<std::int64_t> out_count(census.stubs.out.begin(), census.stubs.out.end());
    // row_weight[j] = Σ_k e⁺_k w_kj
    std::vector<double> row_weight(K + 1, 0.0);
    auto refresh_rows = [&] {
      for (int j = 1; j <= K; ++j) {
        double r = 0.0;
        for (int k = 1; k <= K; ++k) r += static_cast<double>(out_count[k]) * w(k, j);
        row_weight[j] = r;
      }
    };
    refresh_rows();
    result.edges.clear();
    result.edges.reserve(total);
    result.events.clear();
    bool dead_end = false;

    for (std::int64_t step = 1; step <= total; ++step) {
      double c = 0.0;
      for (int j = 1; j <= K; ++j) c += static_cast<double>(in_count[j]) * row_weight[j];
      if (c <= 0.0) {
        dead_end = true;
        break;
      }
      if (options.record_events) {
        result.events.push_back(WiringEvent{step, 0, 0, c, pool_margins(pools)});
      }
      int chosen_j = 0;
      double target = uniform_unit(rng) * c;
      for (int j = 1; j <= K; ++j) {
        const double a = static_cast<double>(in_count[j]) * row_weight[j];
        if (a <= 0.0) continue;
        chosen_j = j;
        if (target < a) break;
        target -= a;
      }
      int chosen_k = 0;
      double row_total = 0.0;
      for (int k = 1; k <= K; ++k) row_total += static_cast<double>(out_count[k]) * w(k, chosen_j);
      target = uniform_unit(rng) * row_total;
      for (int k = 1; k <= K; ++k) {
        const double a = static_cast<double>(out_count[k]) * w(k, chosen_j);
        if (a <= 0.0) continue;
        chosen_k = k;
        if (target < a) break;
        target -= a;
      }
      if (options.record_events) {
        result.events.back().out_degree = chosen_k;
        result.events.back().in_degree = chosen_j;
      }
      const std::int64_t source = take_uniform(pools.out[chosen_k], rng);
      const std::int64_t target_node = take_uniform(pools.in[chosen_j], rng);
      result.edges.push_back(Edge{source, target_node, chosen_k, chosen_j});
      --in_count[chosen_j];
      if (--out_count[chosen_k] == 0) {
        refresh_rows();
      } else {
        for (int j = 1; j <= K; ++j) row_weight[j] -= w(chosen_k, j);
      }
    }

    if (!dead_end) break;
    if (attempt < options.max_restarts) {
      ++result.restarts;
      continue;
    }
    std::int64_t matched = 0;
    match_uniformly(pools, x, rng, result.edges, matched);
    if (options.max_steps >= 0 && static_cast<std::int64_t>(result.edges.size()) > total) {
      result.edges.resize(total);
    }
    result.uniform_fallback = true;
    result.fallback_edges = matched;
    break;
  }
  return result;
}

NodeDrawResult draw_feasible_sequence(const NodeTypeDist& p, std::int64_t n, double delta,
                                      int max_redraws, Rng& rng) {
  NodeDrawResult result;
  for (int attempt = 0; attempt < max_redraws; ++attempt) {
    const NodeTypeSequence x = draw_node_sequence(p, n, rng);
    ClipOutcome clipped = clip_sequence(x, delta, rng);
    if (clipped.accepted()) {
      result.sequence = std::move(clipped.sequence);
      result.discrepancy = x.discrepancy();
      result.clip_count = static_cast<std::int64_t>(clipped.adjusted.size());
      return result;
    }
    ++result.redraws;
  }
  throw Error(ErrorCode::retries_exhausted,
              std::to_string(max_redraws) + " node-type draws rejected by clipping");
}

MultiGraph generate_graph(const NodeTypeDist& p, const EdgeTypeDist& q,
                          const GenerateOptions& options) {
  Rng rng = make_stream(options.seed, options.stream);
  NodeDrawResult drawn =
      draw_feasible_sequence(p, options.nodes, options.delta, options.max_redraws, rng);
  WiringResult wired = sequential_wiring(drawn.sequence, q, rng, options.wiring);

  MultiGraph g;
  g.max_degree = p.max_degree();
  g.nodes = std::move(drawn.sequence.nodes);
  g.edges = std::move(wired.edges);
  g.meta.seed = options.seed;
  g.meta.stream = options.stream;
  g.meta.discrepancy = drawn.discrepancy;
  g.meta.clip_count = drawn.clip_count;
  g.meta.redraws = drawn.redraws;
  g.meta.dead_end_restarts = wired.restarts;
  g.meta.uniform_fallback = wired.uniform_fallback;
  g.meta.fallback_edges = wired.fallback_edges;
  return g;
}

GraphClass classify_graph(const MultiGraph& g) {
  GraphClass c;
  c.edge_types = EdgeTypeMatrix(g.max_degree);
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  pairs.reserve(g.edges.size());
  for (const Edge& e : g.edges) {
    ++c.edge_types.at(e.out_degree, e.in_degree);
    if (e.self_loop()) ++c.self_loops;
    pairs.emplace_back(e.source, e.target);
  }
  std::sort(pairs.begin(), pairs.end());
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    if (pairs[i] == pairs[i - 1]) ++c.multi_edges;
  }
  c.is_simple = c.self_loops == 0 && c.multi_edges == 0;
  return c;
}

}  // namespace acg
