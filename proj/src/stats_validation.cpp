#include "acg/stats_validation.hpp"

#include "acg/error.hpp"
#include "acg/parallel.hpp"
#include "acg/sampler.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <numeric>

namespace acg {
namespace {

std::uint64_t stream_of(std::size_t size_index, std::size_t rep) {
  return (static_cast<std::uint64_t>(size_index) << 32) + rep;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void finish_slope(LLNReport& report, const SlopeWindow& window) {
  std::vector<double> x, y;
  for (const SizeDeviation& s : report.sizes) {
    x.push_back(static_cast<double>(s.nodes));
    y.push_back(s.mean_max_deviation);
  }
  bool fit = x.size() >= 2;
  for (double v : y) fit = fit && v > 0.0;
  if (fit) {
    report.slope = fit_loglog_slope(x, y);
    report.slope_ok = report.slope >= window.lo && report.slope <= window.hi;
  } else {
    // all-zero deviations (a single node type) have no slope to fit
    report.slope = 0.0;
    report.slope_ok = std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; });
  }
}

void check_options(const ValidationOptions& opts) {
  if (opts.sizes.empty() || opts.reps < 1) {
    throw Error(ErrorCode::invalid_argument, "validation needs at least one size and one rep");
  }
}

}  // namespace

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "slope fit needs two or more points");
  }
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "log-log fit needs positive values");
    }
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

LLNReport node_lln(const NodeTypeDist& p, const EdgeTypeDist&, const ValidationOptions& opts) {
  check_options(opts);
  const int K = p.max_degree();
  LLNReport report;
  for (std::size_t s = 0; s < opts.sizes.size(); ++s) {
    const std::int64_t n = opts.sizes[s];
    std::vector<double> dev(opts.reps), tv(opts.reps), redraws(opts.reps);
    parallel_for(opts.reps, opts.threads, [&](std::size_t r) {
      Rng rng = make_stream(opts.seed, stream_of(s, r));
      const NodeDrawResult drawn = draw_feasible_sequence(p, n, opts.delta, 1000, rng);
      const StubCensus c = stub_census(drawn.sequence);
      double worst = 0.0, total = 0.0;
      for (int j = 0; j <= K; ++j) {
        for (int k = 0; k <= K; ++k) {
          const double d = std::abs(static_cast<double>(c.type_count(j, k)) / n - p(j, k));
          worst = std::max(worst, d);
          total += d;
        }
      }
      dev[r] = worst;
      tv[r] = 0.5 * total;
      redraws[r] = drawn.redraws;
    });
    SizeDeviation sd;
    sd.nodes = n;
    sd.mean_max_deviation = mean_of(dev);
    sd.mean_tv_distance = mean_of(tv);
    const double rejected = std::accumulate(redraws.begin(), redraws.end(), 0.0);
    sd.acceptance_rate = opts.reps / (opts.reps + rejected);
    sd.max_deviation = std::move(dev);
    report.sizes.push_back(std::move(sd));
  }
  finish_slope(report, opts.window);
  return report;
}

LLNReport edge_lln(const NodeTypeDist& p, const EdgeTypeDist& q, const ValidationOptions& opts) {
  check_options(opts);
  const int K = p.max_degree();
  LLNReport report;
  for (std::size_t s = 0; s < opts.sizes.size(); ++s) {
    const std::int64_t n = opts.sizes[s];
    std::vector<double> dev(opts.reps), tv(opts.reps), edges(opts.reps), envelope(opts.reps);
    std::vector<char> margins_ok(opts.reps, 1);
    parallel_for(opts.reps, opts.threads, [&](std::size_t r) {
      GenerateOptions g_opts;
      g_opts.nodes = n;
      g_opts.delta = opts.delta;
      g_opts.seed = opts.seed;
      g_opts.stream = stream_of(s, r);
      const MultiGraph g = generate_graph(p, q, g_opts);
      const GraphClass cls = classify_graph(g);
      NodeTypeSequence x{K, g.nodes};
      margins_ok[r] = cls.edge_types.margins() == stub_census(x).stubs ? 1 : 0;
      const double E = static_cast<double>(g.edge_count());
      double worst = 0.0, total = 0.0;
      for (int k = 1; k <= K; ++k) {
        for (int j = 1; j <= K; ++j) {
          const double d = std::abs(cls.edge_types.at(k, j) / E - q(k, j));
          worst = std::max(worst, d);
          total += d;
        }
      }
      dev[r] = worst;
      tv[r] = 0.5 * total;
      edges[r] = E;
      envelope[r] = worst / (5.0 / std::sqrt(E));
    });
    SizeDeviation sd;
    sd.nodes = n;
    sd.mean_max_deviation = mean_of(dev);
    sd.mean_tv_distance = mean_of(tv);
    sd.mean_edges = mean_of(edges);
    sd.worst_envelope_ratio = *std::max_element(envelope.begin(), envelope.end());
    sd.margins_consistent = std::all_of(margins_ok.begin(), margins_ok.end(),
                                        [](char ok) { return ok != 0; });
    sd.max_deviation = std::move(dev);
    report.sizes.push_back(std::move(sd));
  }
  finish_slope(report, opts.window);
  report.envelope_ok = report.sizes.back().worst_envelope_ratio <= 1.0;
  for (const SizeDeviation& s : report.sizes) report.envelope_ok &= s.margins_consistent;
  return report;
}

double clip_acceptance_rate(const NodeTypeDist& p, std::int64_t n, double delta, int draws,
                            std::uint64_t seed) {
  if (draws < 1) throw Error(ErrorCode::invalid_argument, "need at least one draw");
  Rng rng = make_stream(seed, 0);
  int accepted = 0;
  for (int i = 0; i < draws; ++i) {
    const NodeTypeSequence x = draw_node_sequence(p, n, rng);
    if (clip_sequence(x, delta, rng).accepted()) ++accepted;
  }
  return static_cast<double>(accepted) / draws;
}

FirstEdgesReport first_edges_distribution(const NodeTypeDist& p, const EdgeTypeDist& q,
                                          std::int64_t n, int length, int reps,
                                          std::uint64_t seed, double delta, unsigned threads) {
  if (length < 1 || length > 5) {
    throw Error(ErrorCode::invalid_argument, "first-edge length must lie in 1..5");
  }
  if (reps < 1) throw Error(ErrorCode::invalid_argument, "need at least one rep");
  const int K = q.max_degree();
  std::vector<TypeSequence> observed(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    Rng rng = make_stream(seed, r);
    const NodeDrawResult drawn = draw_feasible_sequence(p, n, delta, 1000, rng);
    WiringOptions w;
    w.max_steps = length;
    const WiringResult wired = sequential_wiring(drawn.sequence, q, rng, w);
    if (static_cast<int>(wired.edges.size()) < length) {
      throw Error(ErrorCode::invalid_argument, "graph has fewer edges than the requested length");
    }
    TypeSequence seq;
    for (int i = 0; i < length; ++i) seq.emplace_back(wired.edges[i].out_degree, wired.edges[i].in_degree);
    observed[r] = std::move(seq);
  });

  FirstEdgesReport report;
  report.length = length;
  report.reps = reps;
  for (const TypeSequence& s : observed) ++report.counts[s];

  // every sequence of positive-probability types, in lexicographic order
  std::vector<std::pair<int, int>> support;
  for (int k = 1; k <= K; ++k) {
    for (int j = 1; j <= K; ++j) {
      if (q(k, j) > 0.0) support.emplace_back(k, j);
    }
  }
  std::vector<std::size_t> digits(length, 0);
  int cells = 0;
  for (;;) {
    TypeSequence seq;
    double expected = reps;
    for (std::size_t d : digits) {
      seq.push_back(support[d]);
      expected *= q(support[d].first, support[d].second);
    }
    const auto it = report.counts.find(seq);
    const double o = it == report.counts.end() ? 0.0 : static_cast<double>(it->second);
    report.chi_square += (o - expected) * (o - expected) / expected;
    ++cells;
    int pos = length - 1;
    while (pos >= 0 && ++digits[pos] == support.size()) digits[pos--] = 0;
    if (pos < 0) break;
  }
  for (const auto& [seq, count] : report.counts) {
    for (const auto& [k, j] : seq) {
      if (q(k, j) == 0.0) {
        report.impossible_observations += count;
        break;
      }
    }
  }
  report.degrees_of_freedom = cells - 1;
  if (report.impossible_observations > 0) {
    report.p_value = 0.0;
  } else if (report.degrees_of_freedom > 0) {
    boost::math::chi_squared dist(report.degrees_of_freedom);
    report.p_value = boost::math::cdf(boost::math::complement(dist, report.chi_square));
  }

  if (length >= 2) {
    std::map<std::pair<int, int>, double> first, second;
    std::map<std::pair<std::pair<int, int>, std::pair<int, int>>, double> joint;
    for (const TypeSequence& s : observed) {
      first[s[0]] += 1.0 / reps;
      second[s[1]] += 1.0 / reps;
      joint[{s[0], s[1]}] += 1.0 / reps;
    }
    double mi = 0.0;
    for (const auto& [ab, pab] : joint) mi += pab * std::log(pab / (first[ab.first] * second[ab.second]));
    report.mutual_information = mi;
  }
  return report;
}

SelfLoopReport self_loop_poisson(const NodeTypeDist& p, const EdgeTypeDist& q, std::int64_t n,
                                 int reps, std::uint64_t seed, double delta, unsigned threads) {
  if (reps < 2) throw Error(ErrorCode::invalid_argument, "need at least two reps");
  SelfLoopReport report;
  report.counts.assign(reps, 0);
  parallel_for(reps, threads, [&](std::size_t r) {
    GenerateOptions opts;
    opts.nodes = n;
    opts.delta = delta;
    opts.seed = seed;
    opts.stream = r;
    const MultiGraph g = generate_graph(p, q, opts);
    std::int64_t loops = 0;
    for (const Edge& e : g.edges) loops += e.self_loop() ? 1 : 0;
    report.counts[r] = loops;
  });
  double sum = 0.0;
  for (std::int64_t c : report.counts) sum += static_cast<double>(c);
  report.mean = sum / reps;
  double ss = 0.0;
  for (std::int64_t c : report.counts) ss += (c - report.mean) * (c - report.mean);
  report.variance = ss / (reps - 1);
  report.lambda = self_loop_rate(p, q);
  const double se = std::sqrt(report.variance / reps);
  report.z_score = se > 0.0 ? (report.mean - report.lambda) / se : 0.0;
  report.mean_ok = std::abs(report.mean - report.lambda) <= 4.0 * se;
  report.expected = expected_self_loops(p, q);
  report.expected_z_score = se > 0.0 ? (report.mean - report.expected) / se : 0.0;
  if (report.mean > 0.0) report.dispersion = report.variance / report.mean;
  return report;
}

double assortativity_coefficient(const MultiGraph& g) {
  if (g.edge_count() < 2) {
    throw Error(ErrorCode::invalid_argument, "assortativity needs at least two edges");
  }
  const double E = static_cast<double>(g.edge_count());
  double mk = 0.0, mj = 0.0;
  for (const Edge& e : g.edges) {
    mk += e.out_degree;
    mj += e.in_degree;
  }
  mk /= E;
  mj /= E;
  double skk = 0.0, sjj = 0.0, skj = 0.0;
  for (const Edge& e : g.edges) {
    const double dk = e.out_degree - mk;
    const double dj = e.in_degree - mj;
    skk += dk * dk;
    sjj += dj * dj;
    skj += dk * dj;
  }
  if (skk <= 0.0 || sjj <= 0.0) {
    throw Error(ErrorCode::degenerate_variance, "endpoint degrees are constant across edges");
  }
  return std::clamp(skj / std::sqrt(skk * sjj), -1.0, 1.0);
}

AssortativityReport assortativity_suite(const NodeTypeDist& p, const EdgeTypeDist& q,
                                        std::int64_t n, int reps, std::uint64_t seed,
                                        double delta, unsigned threads) {
  if (reps < 1) throw Error(ErrorCode::invalid_argument, "need at least one rep");
  AssortativityReport report;
  report.coefficients.resize(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    GenerateOptions opts;
    opts.nodes = n;
    opts.delta = delta;
    opts.seed = seed;
    opts.stream = r;
    const MultiGraph g = generate_graph(p, q, opts);
    try {
      report.coefficients[r] = assortativity_coefficient(g);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::degenerate_variance) throw;
    }
  });
  double sum = 0.0;
  std::int64_t defined = 0;
  for (const auto& c : report.coefficients) {
    if (c) {
      sum += *c;
      ++defined;
    } else {
      ++report.undefined;
    }
  }
  if (defined > 0) report.mean = sum / defined;
  return report;
}

json to_json(const LLNReport& r) {
  json out;
  json sizes = json::array();
  for (const SizeDeviation& s : r.sizes) {
    json e;
    e["N"] = s.nodes;
    e["mean_max_deviation"] = s.mean_max_deviation;
    e["mean_tv_distance"] = s.mean_tv_distance;
    e["mean_edges"] = s.mean_edges;
    e["acceptance_rate"] = s.acceptance_rate;
    e["worst_envelope_ratio"] = s.worst_envelope_ratio;
    e["margins_consistent"] = s.margins_consistent;
    e["max_deviation"] = s.max_deviation;
    sizes.push_back(std::move(e));
  }
  out["sizes"] = std::move(sizes);
  out["slope"] = r.slope;
  out["slope_ok"] = r.slope_ok;
  out["envelope_ok"] = r.envelope_ok;
  out["passed"] = r.passed();
  return out;
}

json to_json(const FirstEdgesReport& r) {
  json out;
  out["L"] = r.length;
  out["reps"] = r.reps;
  out["chi_square"] = r.chi_square;
  out["dof"] = r.degrees_of_freedom;
  out["p_value"] = r.p_value;
  out["impossible_observations"] = r.impossible_observations;
  out["mutual_information"] = r.mutual_information ? json(*r.mutual_information) : json(nullptr);
  json counts = json::array();
  for (const auto& [seq, count] : r.counts) {
    json types = json::array();
    for (const auto& [k, j] : seq) types.push_back({k, j});
    counts.push_back({{"types", types}, {"count", count}});
  }
  out["counts"] = std::move(counts);
  return out;
}

json to_json(const SelfLoopReport& r) {
  json out;
  out["counts"] = r.counts;
  out["mean"] = r.mean;
  out["variance"] = r.variance;
  out["lambda"] = r.lambda;
  out["z_score"] = r.z_score;
  out["dispersion"] = r.dispersion ? json(*r.dispersion) : json(nullptr);
  out["mean_ok"] = r.mean_ok;
  out["expected"] = r.expected;
  out["expected_z_score"] = r.expected_z_score;
  return out;
}

json to_json(const AssortativityReport& r) {
  json out;
  json coeffs = json::array();
  for (const auto& c : r.coefficients) coeffs.push_back(c ? json(*c) : json(nullptr));
  out["coefficients"] = std::move(coeffs);
  out["mean"] = r.mean ? json(*r.mean) : json(nullptr);
  out["undefined"] = r.undefined;
  return out;
}

}  // namespace acg
