#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "acg/error.hpp"
#include "acg/graph_io.hpp"
#include "acg/rng.hpp"
#include "acg/sampler.hpp"
#include "test_support.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <filesystem>
#include <set>

using namespace acg;
using namespace acg::test;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an acg::Error");
  return ErrorCode::io;
}

double chi_square_p(const std::vector<double>& observed, const std::vector<double>& expected) {
  double stat = 0.0;
  int cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0.0) {
      REQUIRE(observed[i] == 0.0);
      continue;
    }
    stat += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
    ++cells;
  }
  if (cells < 2) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(cells - 1), stat));
}

void check_degrees_realized(const NodeTypeSequence& x, const std::vector<Edge>& edges) {
  std::vector<int> outs(x.nodes.size(), 0), ins(x.nodes.size(), 0);
  for (const Edge& e : edges) {
    ++outs[e.source];
    ++ins[e.target];
    CHECK(e.out_degree == x.nodes[e.source].out);
    CHECK(e.in_degree == x.nodes[e.target].in);
  }
  for (std::size_t v = 0; v < x.nodes.size(); ++v) {
    CHECK(outs[v] == x.nodes[v].out);
    CHECK(ins[v] == x.nodes[v].in);
  }
}

}  // namespace

TEST_CASE("stream seeds are distinct and reproducible") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(stream_seed(42, i));
  CHECK(seen.size() == 1000);
  CHECK(stream_seed(42, 7) == stream_seed(42, 7));
  CHECK(stream_seed(42, 7) != stream_seed(43, 7));
  Rng a = make_stream(1, 2), b = make_stream(1, 2);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  Rng r = make_stream(9, 0);
  for (int i = 0; i < 10000; ++i) {
    const double u = uniform_unit(r);
    CHECK((u >= 0.0 && u < 1.0));
  }
}

TEST_CASE("node-type draws") {
  Rng rng = make_stream(1, 0);
  SUBCASE("single type") {
    const NodeTypeSequence x = draw_node_sequence(single_type(), 5, rng);
    CHECK(x.size() == 5);
    for (const NodeType& t : x.nodes) CHECK(t == NodeType{1, 1});
    CHECK(x.discrepancy() == 0);
  }
  SUBCASE("balanced model frequency") {
    const NodeTypeSequence x = draw_node_sequence(balanced2(), 10000, rng);
    std::int64_t count = 0;
    for (const NodeType& t : x.nodes) count += t == NodeType{1, 2} ? 1 : 0;
    CHECK(std::abs(count / 10000.0 - 0.5) < 0.05);
  }
  SUBCASE("empty draw is rejected") {
    CHECK(code_of([&] { draw_node_sequence(balanced2(), 0, rng); }) ==
          ErrorCode::invalid_argument);
  }
}

TEST_CASE("clipping") {
  Rng rng = make_stream(3, 0);
  SUBCASE("feasible draws pass unchanged") {
    const NodeTypeSequence x = sequence(2, {{1, 2}, {2, 1}, {1, 1}});
    const ClipOutcome c = clip_sequence(x, 0.25, rng);
    REQUIRE(c.accepted());
    CHECK(c.adjusted.empty());
    CHECK(c.sequence.nodes == x.nodes);
  }
  SUBCASE("deficit of in-stubs") {
    // Σk = 7, Σj = 3, so D = 4 and four distinct nodes gain an in-stub.
    const NodeTypeSequence x = sequence(2, {{1, 1}, {1, 1}, {0, 2}, {0, 2}, {1, 1}});
    REQUIRE(x.discrepancy() == 4);
    const ClipOutcome c = clip_sequence(x, 0.4, rng);
    REQUIRE(c.accepted());
    CHECK(c.adjusted.size() == 4);
    CHECK(std::set<std::int64_t>(c.adjusted.begin(), c.adjusted.end()).size() == 4);
    CHECK(c.sequence.discrepancy() == 0);
    int sum_j = 0, sum_k = 0;
    for (std::size_t v = 0; v < x.nodes.size(); ++v) {
      const int dj = c.sequence.nodes[v].in - x.nodes[v].in;
      CHECK((dj == 0 || dj == 1));
      CHECK(c.sequence.nodes[v].out == x.nodes[v].out);
      sum_j += c.sequence.nodes[v].in;
      sum_k += c.sequence.nodes[v].out;
    }
    CHECK(sum_j == 7);
    CHECK(sum_k == 7);
    // T(5) = 5^0.75 ≈ 3.34 < 4
    CHECK(clip_sequence(x, 0.25, rng).status == ClipStatus::rejected_threshold);
  }
  SUBCASE("large discrepancy is rejected") {
    std::vector<NodeType> nodes(60, NodeType{0, 2});
    nodes.resize(100, NodeType{0, 0});
    const NodeTypeSequence x = sequence(2, nodes);
    REQUIRE(x.discrepancy() == 120);
    CHECK(clip_threshold(100, 0.25) == doctest::Approx(std::pow(100.0, 0.75)));
    CHECK(clip_sequence(x, 0.25, rng).status == ClipStatus::rejected_threshold);
  }
  SUBCASE("deficit of out-stubs") {
    const NodeTypeSequence x = sequence(2, {{2, 0}, {1, 1}, {0, 0}, {1, 1}});
    const ClipOutcome c = clip_sequence(x, 0.4, rng);
    REQUIRE(c.accepted());
    CHECK(c.adjusted.size() == 2);
    CHECK(c.sequence.discrepancy() == 0);
  }
  SUBCASE("exactly enough eligible nodes") {
    // K = 1, D = 2, and only nodes 0 and 1 have j < K
    const NodeTypeSequence x = sequence(1, {{0, 1}, {0, 1}, {1, 1}});
    const ClipOutcome c = clip_sequence(x, 0.45, rng);
    REQUIRE(c.accepted());
    CHECK(c.adjusted == std::vector<std::int64_t>{0, 1});
  }
  SUBCASE("too few eligible nodes overflow") {
    // D = 2 but node 0 is the only one with j < K
    const NodeTypeSequence x = sequence(2, {{0, 2}, {2, 2}, {2, 2}, {2, 2}});
    REQUIRE(x.discrepancy() == 2);
    CHECK(clip_sequence(x, 0.45, rng).status == ClipStatus::rejected_overflow);
  }
  SUBCASE("invalid delta") {
    const NodeTypeSequence x = sequence(1, {{1, 1}});
    CHECK(code_of([&] { clip_sequence(x, 0.5, rng); }) == ErrorCode::invalid_argument);
    CHECK(code_of([&] { clip_sequence(x, 0.0, rng); }) == ErrorCode::invalid_argument);
  }
}

TEST_CASE("clipped subsets are uniform over eligible nodes") {
  // D = 2 over eight eligible nodes: each is chosen with probability 1/4.
  std::vector<NodeType> nodes(8, NodeType{0, 0});
  nodes.push_back({2, 2});
  nodes[0] = {0, 2};
  const NodeTypeSequence x = sequence(2, nodes);
  REQUIRE(x.discrepancy() == 2);
  Rng rng = make_stream(17, 0);
  std::vector<double> hits(9, 0.0);
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    const ClipOutcome c = clip_sequence(x, 0.4, rng);
    REQUIRE(c.accepted());
    for (std::int64_t v : c.adjusted) hits[v] += 1.0;
  }
  std::vector<double> expected(9, trials * 2.0 / 8.0);
  expected[8] = 0.0;
  CHECK(chi_square_p(hits, expected) > 1e-3);
}

TEST_CASE("stub census") {
  const StubCensus c = stub_census(sequence(2, {{0, 1}, {0, 2}, {2, 0}, {1, 0}}));
  CHECK(c.stubs.in == std::vector<std::int64_t>{0, 1, 2});
  CHECK(c.stubs.out == std::vector<std::int64_t>{0, 1, 2});
  CHECK(c.edges == 3);
  CHECK(c.nodes == 4);
  CHECK(c.type_count(0, 1) == 1);
  CHECK(c.in_nodes[0] == 2);
  const StubCensus one = stub_census(sequence(1, {{1, 1}}));
  CHECK(one.stubs.in[1] == 1);
  CHECK(one.stubs.out[1] == 1);
  CHECK(one.edges == 1);
  CHECK(code_of([] { stub_census(sequence(1, {{1, 0}})); }) == ErrorCode::infeasible_sequence);
}

TEST_CASE("first-step type law") {
  const StubMargins m = margins({1, 2}, {1, 2});
  SUBCASE("disassortative") {
    const EdgeTypeDist q = bal2_disassortative();
    // Q_kj / (Q⁺_k Q⁻_j) = 0, 3/2, 3/2, 3/4 times e⁻_j e⁺_k = 1, 2, 2, 4
    CHECK(wiring_normalization(m, q) == doctest::Approx(9.0).epsilon(1e-14));
    const Matrix pr = edge_type_probabilities(m, q);
    CHECK(pr(1, 1) == 0.0);
    CHECK(pr(1, 2) == doctest::Approx(1.0 / 3).epsilon(1e-14));
    CHECK(pr(2, 1) == doctest::Approx(1.0 / 3).epsilon(1e-14));
    CHECK(pr(2, 2) == doctest::Approx(1.0 / 3).epsilon(1e-14));
  }
  SUBCASE("independent Q is uniform stub matching") {
    const Matrix pr = edge_type_probabilities(m, bal2_independent());
    for (int k = 1; k <= 2; ++k) {
      for (int j = 1; j <= 2; ++j) {
        CHECK(pr(k, j) == doctest::Approx(m.in[j] * m.out[k] / 9.0).epsilon(1e-14));
      }
    }
  }
  SUBCASE("dead end") {
    const StubMargins only_ones = margins({2, 0}, {2, 0});
    CHECK(wiring_normalization(only_ones, bal2_disassortative()) == 0.0);
    CHECK(edge_type_probabilities(only_ones, bal2_disassortative()).sum() == 0.0);
  }
}

TEST_CASE("sequential wiring") {
  Rng rng = make_stream(21, 0);
  SUBCASE("forced single edge") {
    const NodeTypeSequence x = sequence(1, {{0, 1}, {1, 0}});
    const WiringResult w = sequential_wiring(x, single_edge_type(), rng);
    REQUIRE(w.edges.size() == 1);
    CHECK(w.edges[0].source == 0);
    CHECK(w.edges[0].target == 1);
    CHECK(w.edges[0].out_degree == 1);
    CHECK(w.edges[0].in_degree == 1);
  }
  SUBCASE("degrees are realized and stubs conserved") {
    const NodeTypeSequence x = draw_feasible_sequence(balanced2(), 2000, 0.25, 100, rng).sequence;
    WiringOptions opts;
    opts.record_events = true;
    for (const EdgeTypeDist& q : {bal2_independent(), bal2_disassortative()}) {
      const WiringResult w = sequential_wiring(x, q, rng, opts);
      check_degrees_realized(x, w.edges);
      const std::int64_t E = stub_census(x).edges;
      REQUIRE(static_cast<std::int64_t>(w.events.size()) == E);
      for (std::size_t l = 0; l < w.events.size(); ++l) {
        const WiringEvent& ev = w.events[l];
        CHECK(ev.remaining.in_total() == E - static_cast<std::int64_t>(l));
        CHECK(ev.remaining.out_total() == E - static_cast<std::int64_t>(l));
        CHECK(ev.normalization ==
              doctest::Approx(wiring_normalization(ev.remaining, q)).epsilon(1e-9));
        if (l + 1 < w.events.size()) {
          const WiringEvent& next = w.events[l + 1];
          CHECK(next.remaining.in[ev.in_degree] == ev.remaining.in[ev.in_degree] - 1);
          CHECK(next.remaining.out[ev.out_degree] == ev.remaining.out[ev.out_degree] - 1);
        }
      }
      if (!q.is_independent() && !w.uniform_fallback) {
        for (const Edge& e : w.edges) CHECK_FALSE((e.out_degree == 1 && e.in_degree == 1));
      }
    }
  }
  SUBCASE("dead end restarts then falls back to uniform matching") {
    const NodeTypeSequence x = sequence(2, {{1, 1}, {1, 1}, {1, 1}});
    const WiringResult w = sequential_wiring(x, bal2_disassortative(), rng);
    CHECK(w.restarts == 10);
    CHECK(w.uniform_fallback);
    CHECK(w.fallback_edges == 3);
    check_degrees_realized(x, w.edges);
  }
  SUBCASE("prefix wiring") {
    const NodeTypeSequence x = draw_feasible_sequence(balanced2(), 500, 0.25, 100, rng).sequence;
    WiringOptions opts;
    opts.max_steps = 3;
    CHECK(sequential_wiring(x, bal2_independent(), rng, opts).edges.size() == 3);
  }
}

TEST_CASE("empirical first-step law matches the weights") {
  // X = ((0,1),(0,2),(2,0),(1,0)), Q disassortative: weights 0, 3, 3, 3 for
  // (1,1), (1,2), (2,1), (2,2), so each allowed type has probability 1/3.
  const NodeTypeSequence x = sequence(2, {{0, 1}, {0, 2}, {2, 0}, {1, 0}});
  Rng rng = make_stream(5, 0);
  WiringOptions opts;
  opts.max_steps = 1;
  std::vector<double> counts(4, 0.0);
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    const Edge e = sequential_wiring(x, bal2_disassortative(), rng, opts).edges.at(0);
    ++counts[(e.out_degree - 1) * 2 + (e.in_degree - 1)];
  }
  CHECK(counts[0] == 0.0);
  CHECK(chi_square_p(counts, {0.0, trials / 3.0, trials / 3.0, trials / 3.0}) > 1e-3);
}

TEST_CASE("graph generation") {
  SUBCASE("single type gives a union of cycles") {
    GenerateOptions opts;
    opts.nodes = 3;
    opts.seed = 99;
    const MultiGraph g = generate_graph(single_type(), single_edge_type(), opts);
    CHECK(g.edge_count() == 3);
    check_degrees_realized(NodeTypeSequence{1, g.nodes}, g.edges);
  }
  SUBCASE("same seed, same graph; other stream, other graph") {
    GenerateOptions opts;
    opts.nodes = 10000;
    opts.seed = 7;
    const MultiGraph a = generate_graph(balanced2(), bal2_independent(), opts);
    const MultiGraph b = generate_graph(balanced2(), bal2_independent(), opts);
    CHECK(edges_tsv(a) == edges_tsv(b));
    CHECK(nodes_csv(a) == nodes_csv(b));
    opts.stream = 1;
    CHECK(edges_tsv(generate_graph(balanced2(), bal2_independent(), opts)) != edges_tsv(a));
  }
  SUBCASE("retries exhausted") {
    // P_{0,2} = P_{2,0} = 1/2 at N = 1 always has |D| = 2 > T(1) = 1
    const NodeTypeDist p = NodeTypeDist::from_weights(mat3({{0, 0, 0.5}, {0, 0, 0}, {0.5, 0, 0}}));
    GenerateOptions opts;
    opts.nodes = 1;
    opts.max_redraws = 5;
    CHECK(code_of([&] { generate_graph(p, independent_edge_dist(p), opts); }) ==
          ErrorCode::retries_exhausted);
  }
}

TEST_CASE("first draws are accepted at N = 10^4") {
  int first_try = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng = make_stream(seed, 0);
    first_try += draw_feasible_sequence(balanced2(), 10000, 0.25, 100, rng).redraws == 0 ? 1 : 0;
  }
  CHECK(first_try >= 999);
}

TEST_CASE("graph classification") {
  MultiGraph g;
  g.max_degree = 2;
  SUBCASE("single edge") {
    MultiGraph s;
    s.max_degree = 1;
    s.nodes = {{0, 1}, {1, 0}};
    s.edges = {{0, 1, 1, 1}};
    const GraphClass c = classify_graph(s);
    CHECK(c.edge_types.at(1, 1) == 1);
    CHECK(c.is_simple);
  }
  SUBCASE("self-loop") {
    MultiGraph s;
    s.max_degree = 1;
    s.nodes = {{1, 1}};
    s.edges = {{0, 0, 1, 1}};
    const GraphClass c = classify_graph(s);
    CHECK(c.self_loops == 1);
    CHECK_FALSE(c.is_simple);
  }
  SUBCASE("E = 3 example") {
    g.nodes = {{0, 1}, {0, 2}, {2, 0}, {1, 0}};
    g.edges = {{0, 2, 1, 2}, {1, 3, 2, 1}, {1, 2, 2, 2}};
    const GraphClass c = classify_graph(g);
    CHECK(c.edge_types.at(1, 2) == 1);
    CHECK(c.edge_types.at(2, 1) == 1);
    CHECK(c.edge_types.at(2, 2) == 1);
    CHECK(c.edge_types.margins() == margins({1, 2}, {1, 2}));
    CHECK(c.is_simple);
  }
  SUBCASE("parallel edges") {
    g.nodes = {{0, 2}, {2, 0}};
    g.edges = {{0, 1, 2, 2}, {0, 1, 2, 2}};
    const GraphClass c = classify_graph(g);
    CHECK(c.multi_edges == 1);
    CHECK_FALSE(c.is_simple);
  }
}

TEST_CASE("graph files round-trip") {
  GenerateOptions opts;
  opts.nodes = 300;
  opts.seed = 4;
  const MultiGraph g = generate_graph(balanced2(), bal2_disassortative(), opts);
  const auto dir = std::filesystem::temp_directory_path() / "acg_graph_io_test";
  write_graph(dir, g);
  const MultiGraph back = read_graph(dir);
  CHECK(back.nodes == g.nodes);
  REQUIRE(back.edges.size() == g.edges.size());
  CHECK(edges_tsv(back) == edges_tsv(g));
  CHECK(nodes_csv(g).rfind("id,j,k\n", 0) == 0);
  CHECK(edges_tsv(g).rfind("edge_id\tsrc\tdst\tk\tj\tself_loop\n", 0) == 0);
  std::filesystem::remove_all(dir);
}
