#pragma once

// Monte Carlo checks of the large-N behaviour of generated graphs: node- and
// edge-type laws of large numbers, the law of the first few edge types,
// self-loop counts, and a descriptive assortativity statistic.
//
// Every report is a deterministic function of (parameters, seed): rep r at
// size index s always uses RNG stream s * 2^32 + r, however the reps are
// spread across threads.

#include "acg/degree_model.hpp"
#include "acg/graph.hpp"
#include "acg/model_io.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace acg {

struct SlopeWindow {
  double lo = -0.65;
  double hi = -0.35;
};

struct ValidationOptions {
  std::vector<std::int64_t> sizes;
  int reps = 10;
  std::uint64_t seed = 1;
  double delta = 0.25;
  unsigned threads = 0;
  SlopeWindow window;
};

struct SizeDeviation {
  std::int64_t nodes = 0;
  double mean_max_deviation = 0.0;
  double mean_tv_distance = 0.0;
  double mean_edges = 0.0;
  double acceptance_rate = 1.0;  // accepted draws / all draws
  // largest per-rep ratio of the edge max-deviation to 5/√E (edge suite only)
  double worst_envelope_ratio = 0.0;
  bool margins_consistent = true;  // classified margins equal the census
  std::vector<double> max_deviation;  // per rep
};

struct LLNReport {
  std::vector<SizeDeviation> sizes;
  double slope = 0.0;  // least-squares slope of log mean deviation vs log N
  bool slope_ok = false;
  bool envelope_ok = true;  // edge suite: every rep at the largest N within 5/√E
  bool passed() const { return slope_ok && envelope_ok; }
};

// Least-squares slope of log(y) against log(x). Needs two or more points with
// positive y.
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// max_jk |ũ_jk/N − P_jk| of clipped node-type draws.
LLNReport node_lln(const NodeTypeDist& p, const EdgeTypeDist& q, const ValidationOptions& opts);
// max_kj |e_kj/E − Q_kj| of generated graphs.
LLNReport edge_lln(const NodeTypeDist& p, const EdgeTypeDist& q, const ValidationOptions& opts);

// Fraction of raw i.i.d. draws accepted by clipping.
double clip_acceptance_rate(const NodeTypeDist& p, std::int64_t n, double delta, int draws,
                            std::uint64_t seed);

using TypeSequence = std::vector<std::pair<int, int>>;

struct FirstEdgesReport {
  int length = 0;  // L
  std::int64_t reps = 0;
  std::map<TypeSequence, std::int64_t> counts;
  double chi_square = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
  std::int64_t impossible_observations = 0;  // sequences with Π Q = 0 that occurred
  std::optional<double> mutual_information;   // first vs second edge type, nats
};

// Law of the first L edge types of the sequential wiring against Q^{⊗L}.
FirstEdgesReport first_edges_distribution(const NodeTypeDist& p, const EdgeTypeDist& q,
                                          std::int64_t n, int length, int reps,
                                          std::uint64_t seed, double delta = 0.25,
                                          unsigned threads = 0);

struct SelfLoopReport {
  std::vector<std::int64_t> counts;
  double mean = 0.0;
  double variance = 0.0;
  double lambda = 0.0;
  double z_score = 0.0;  // (mean − λ) / (sd/√reps)
  std::optional<double> dispersion;  // variance / mean
  bool mean_ok = false;  // |mean − λ| ≤ 4 sd/√reps
  double expected = 0.0;  // z·λ, the per-edge loop fraction times E
  double expected_z_score = 0.0;
};

SelfLoopReport self_loop_poisson(const NodeTypeDist& p, const EdgeTypeDist& q, std::int64_t n,
                                 int reps, std::uint64_t seed, double delta = 0.25,
                                 unsigned threads = 0);

// Pearson correlation, across edges, of the source out-degree k and the target
// in-degree j. Throws InvalidArgument for fewer than two edges and
// DegenerateVariance when either degree is constant.
double assortativity_coefficient(const MultiGraph& g);

struct AssortativityReport {
  std::vector<std::optional<double>> coefficients;
  std::optional<double> mean;  // over graphs where the coefficient is defined
  std::int64_t undefined = 0;
};

AssortativityReport assortativity_suite(const NodeTypeDist& p, const EdgeTypeDist& q,
                                        std::int64_t n, int reps, std::uint64_t seed,
                                        double delta = 0.25, unsigned threads = 0);

json to_json(const LLNReport& r);
json to_json(const FirstEdgesReport& r);
json to_json(const SelfLoopReport& r);
json to_json(const AssortativityReport& r);

}  // namespace acg
