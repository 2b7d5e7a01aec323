#include "acg/asymptotics.hpp"
#include "acg/config_probability.hpp"
#include "acg/error.hpp"
#include "acg/exact_kernel.hpp"
#include "acg/graph_io.hpp"
#include "acg/model_io.hpp"
#include "acg/parallel.hpp"
#include "acg/sampler.hpp"
#include "acg/stats_validation.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace acg;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string params;
  std::string out_dir = "acg_out";
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  json effective;  // echoed into meta.json
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::string& source) {
  if (flag) {
    source = "flag";
    return *flag;
  }
  if (const char* env = std::getenv("ACG_SEED")) {
    try {
      std::size_t used = 0;
      const std::uint64_t s = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      source = "ACG_SEED";
      return s;
    } catch (const std::exception&) {
      throw UsageError(std::string("ACG_SEED is not an unsigned integer: ") + env);
    }
  }
  std::random_device rd;
  source = "random";
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

std::vector<std::int64_t> parse_ints(const std::string& s, const char* what) {
  std::vector<std::int64_t> out;
  for (const std::string& part : split(s, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw UsageError(std::string("malformed ") + what + ": " + s);
    }
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const std::string& part : split(s, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw UsageError(std::string("malformed ") + what + ": " + s);
    }
  }
  return out;
}

// "e⁻_1,..,e⁻_K:e⁺_1,..,e⁺_K"
StubMargins parse_margins(const std::string& s, int K) {
  const auto halves = split(s, ':');
  if (halves.size() != 2) throw UsageError("--margins must look like 1,2:1,2");
  const auto in = parse_ints(halves[0], "margins");
  const auto out = parse_ints(halves[1], "margins");
  if (static_cast<int>(in.size()) != K || static_cast<int>(out.size()) != K) {
    throw UsageError("--margins needs K = " + std::to_string(K) + " entries on each side");
  }
  StubMargins m;
  m.in.assign(K + 1, 0);
  m.out.assign(K + 1, 0);
  for (int d = 1; d <= K; ++d) {
    if (in[d - 1] < 0 || out[d - 1] < 0) throw UsageError("--margins entries must be >= 0");
    m.in[d] = in[d - 1];
    m.out[d] = out[d - 1];
  }
  return m;
}

std::pair<int, int> parse_pair(const std::string& s, const char* what) {
  const auto v = parse_ints(s, what);
  if (v.size() != 2) throw UsageError(std::string(what) + " must be two integers a,b");
  return {static_cast<int>(v[0]), static_cast<int>(v[1])};
}

// "j:k,j:k,..."
NodeTypeSequence parse_sequence(const std::string& s, int K) {
  NodeTypeSequence x{K, {}};
  for (const std::string& node : split(s, ',')) {
    const auto jk = split(node, ':');
    if (jk.size() != 2) throw UsageError("--sequence entries must look like j:k");
    const auto j = parse_ints(jk[0], "sequence");
    const auto k = parse_ints(jk[1], "sequence");
    if (j[0] < 0 || j[0] > K || k[0] < 0 || k[0] > K) {
      throw UsageError("--sequence degrees must lie in 0..K");
    }
    x.nodes.push_back({static_cast<int>(j[0]), static_cast<int>(k[0])});
  }
  return x;
}

// A node-type sequence with the given stub margins: the i-th in-degree node is
// paired with the i-th out-degree node.
NodeTypeSequence sequence_from_margins(const StubMargins& m) {
  const int K = m.max_degree();
  std::vector<int> ins, outs;
  for (int d = 1; d <= K; ++d) {
    if (m.in[d] % d != 0 || m.out[d] % d != 0) {
      throw Error(ErrorCode::margin_mismatch,
                  "margin e_" + std::to_string(d) + " is not a multiple of " + std::to_string(d) +
                      "; pass --sequence instead");
    }
    ins.insert(ins.end(), m.in[d] / d, d);
    outs.insert(outs.end(), m.out[d] / d, d);
  }
  NodeTypeSequence x{K, {}};
  for (std::size_t i = 0; i < std::max(ins.size(), outs.size()); ++i) {
    x.nodes.push_back({i < ins.size() ? ins[i] : 0, i < outs.size() ? outs[i] : 0});
  }
  return x;
}

json margins_json(const StubMargins& m) {
  std::vector<std::int64_t> in(m.in.begin() + 1, m.in.end());
  std::vector<std::int64_t> out(m.out.begin() + 1, m.out.end());
  return {{"in", in}, {"out", out}};
}

json table_json(const EdgeTypeMatrix& t) {
  json rows = json::array();
  for (int k = 1; k <= t.max_degree(); ++k) {
    json row = json::array();
    for (int j = 1; j <= t.max_degree(); ++j) row.push_back(t.at(k, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string fixed10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f", v);
  return buf;
}

DegreeModel load_consistent(const std::string& path) {
  if (path.empty()) throw UsageError("--params is required");
  DegreeModel model = load_model(path);
  const ConsistencyReport c = validate_pair(model.p, model.q);
  if (!c.is_consistent) {
    std::ostringstream os;
    os << "P and Q violate Q+_k = k P+_k / z, Q-_j = j P-_j / z (max violation "
       << c.max_violation << ")";
    throw Error(ErrorCode::invalid_distribution, os.str());
  }
  return model;
}

void write_outputs(const RunConfig& rc, const json& result) {
  fs::create_directories(rc.out_dir);
  write_file_atomic(fs::path(rc.out_dir) / "meta.json", rc.effective.dump(2) + "\n");
  if (!result.is_null()) {
    write_file_atomic(fs::path(rc.out_dir) / "result.json", result.dump(2) + "\n");
  }
}

json base_config(const RunConfig& rc, const std::string& command, const std::string& sub) {
  json c;
  c["command"] = command;
  if (!sub.empty()) c["subcommand"] = sub;
  c["params"] = rc.params;
  c["out_dir"] = rc.out_dir;
  return c;
}

// --- generate -------------------------------------------------------------

struct GenerateArgs {
  std::int64_t n = 0;
  double delta = 0.25;
  int samples = 1;
  int max_redraws = 100;
};

int run_generate(RunConfig& rc, const GenerateArgs& a) {
  if (a.n < 1) throw UsageError("--n must be >= 1");
  if (a.samples < 1) throw UsageError("--samples must be >= 1");
  const DegreeModel model = load_consistent(rc.params);
  std::string seed_source;
  const std::uint64_t seed = resolve_seed(rc.seed, seed_source);
  rc.effective = base_config(rc, "generate", "");
  rc.effective["n"] = a.n;
  rc.effective["delta"] = a.delta;
  rc.effective["samples"] = a.samples;
  rc.effective["max_redraws"] = a.max_redraws;
  rc.effective["seed"] = seed;
  rc.effective["seed_source"] = seed_source;
  rc.effective["model"] = model_to_json(model);

  std::vector<MultiGraph> graphs(a.samples);
  parallel_for(a.samples, rc.threads, [&](std::size_t i) {
    GenerateOptions opts;
    opts.nodes = a.n;
    opts.delta = a.delta;
    opts.seed = seed;
    opts.stream = i;
    opts.max_redraws = a.max_redraws;
    graphs[i] = generate_graph(model.p, model.q, opts);
  });
  if (a.samples == 1) {
    json extra;
    extra["run"] = rc.effective;
    write_graph(rc.out_dir, graphs[0], extra);
  } else {
    for (int i = 0; i < a.samples; ++i) {
      write_graph(fs::path(rc.out_dir) / ("sample_" + std::to_string(i)), graphs[i]);
    }
    write_outputs(rc, nullptr);
  }
  std::cerr << "wrote " << a.samples << " graph(s) to " << rc.out_dir << " (seed " << seed
            << ")\n";
  return 0;
}

// --- exact ------------------------------------------------------------------

struct ExactArgs {
  std::string margins;
  std::string sequence;
  std::string type;
  std::string types;
  std::int64_t max_edges = EnumerationLimits{}.max_edges;
  std::int64_t max_tables = EnumerationLimits{}.max_tables;
  bool rational = false;
};

// Simplest fraction within 1e-12 of v, by continued fractions.
Rational nearest_rational(double v) {
  using boost::multiprecision::cpp_int;
  cpp_int h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double x = v;
  for (int i = 0; i < 40; ++i) {
    const double a = std::floor(x);
    const cpp_int ai = static_cast<long long>(a);
    const cpp_int h2 = ai * h1 + h0;
    const cpp_int k2 = ai * k1 + k0;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    const Rational r(h1, k1);
    if (std::abs(static_cast<double>(r) - v) <= 1e-12 || x - a < 1e-15) return r;
    x = 1.0 / (x - a);
  }
  return Rational(h1, k1);
}

RationalEdgeDist rational_q(const EdgeTypeDist& q) {
  const int K = q.max_degree();
  RationalEdgeDist r(K);
  for (int k = 0; k <= K; ++k) {
    for (int j = 0; j <= K; ++j) r.at(k, j) = nearest_rational(q(k, j));
  }
  return r;
}

int run_exact(RunConfig& rc, const std::string& sub, const ExactArgs& a) {
  const DegreeModel model = load_consistent(rc.params);
  const int K = model.p.max_degree();
  const EdgeTypeDist& q = model.q;
  EnumerationLimits limits;
  limits.max_edges = a.max_edges;
  limits.max_tables = a.max_tables;
  limits.max_degree = std::max(limits.max_degree, K);

  std::optional<NodeTypeSequence> seq;
  StubMargins margins;
  if (!a.sequence.empty()) {
    seq = parse_sequence(a.sequence, K);
    margins = sequence_margins(*seq);
  } else if (!a.margins.empty()) {
    margins = parse_margins(a.margins, K);
  } else {
    throw UsageError("exact needs --margins or --sequence");
  }

  rc.effective = base_config(rc, "exact", sub);
  rc.effective["margins"] = margins_json(margins);
  rc.effective["max_edges"] = limits.max_edges;
  rc.effective["max_tables"] = limits.max_tables;
  rc.effective["rational"] = a.rational;
  rc.effective["model"] = model_to_json(model);

  json result;
  result["margins"] = margins_json(margins);
  std::string printed;
  if (sub == "partition") {
    const auto tables = enumerate_tables(margins, q, limits);
    result["tables"] = tables.size();
    result["log_Z"] = log_partition_Z(margins, q, limits);
    result["log_C"] = log_partition_C(margins, q, limits);
    result["C"] = partition_C(margins, q, limits);
    if (a.rational) result["C_rational"] = partition_C_rational(margins, rational_q(q)).str();
    printed = fixed10(result["C"].get<double>());
  } else if (sub == "mean" || sub == "var") {
    if (a.type.empty()) throw UsageError("--type k,j is required");
    const auto [k, j] = parse_pair(a.type, "--type");
    result["type"] = {k, j};
    const EdgeMoment m = sub == "mean" ? exact_edge_mean(margins, q, k, j, limits)
                                       : exact_edge_variance(margins, q, k, j, limits);
    result["direct"] = m.direct;
    result["via_partition"] = m.via_partition;
    if (a.rational && sub == "mean") {
      result["rational"] = exact_edge_mean_rational(margins, rational_q(q), k, j).str();
    }
    printed = fixed10(m.value());
  } else if (sub == "joint") {
    if (a.types.empty()) throw UsageError("--types k,j;k,j;... is required");
    std::vector<std::pair<int, int>> types;
    for (const std::string& t : split(a.types, ';')) types.push_back(parse_pair(t, "--types"));
    json jt = json::array();
    for (const auto& [k, j] : types) jt.push_back({k, j});
    result["types"] = jt;
    const double prob = joint_first_m_prob(margins, q, types, limits);
    result["probability"] = prob;
    printed = fixed10(prob);
  } else if (sub == "oracle") {
    const NodeTypeSequence x = seq ? *seq : sequence_from_margins(margins);
    const OracleResult o = enumerate_wirings_oracle(x, q);
    json nodes = json::array();
    for (const NodeType& t : x.nodes) nodes.push_back({t.in, t.out});
    result["sequence"] = nodes;
    result["wirings"] = o.wirings;
    result["total_weight"] = o.total_weight;
    json tables = json::array();
    for (const auto& [table, entry] : o.tables) {
      tables.push_back({{"e_kj", table_json(table)},
                        {"wirings", entry.wirings},
                        {"wiring_count", wiring_count(table).str()},
                        {"probability", entry.probability}});
    }
    result["tables"] = std::move(tables);
  } else {
    throw UsageError("unknown exact subcommand " + sub);
  }
  write_outputs(rc, result);
  if (printed.empty()) {
    std::cout << result.dump(2) << "\n";
  } else {
    std::cout << printed << "\n";
  }
  return 0;
}

// --- asymptotics ------------------------------------------------------------

struct AsymptoticsArgs {
  std::string x;
  std::string margins;
  std::string type;
  std::string scales = "5,10,20";
  double tolerance = CriticalPointOptions{}.tolerance;
  int max_iterations = CriticalPointOptions{}.max_iterations;
};

DoubleVector parse_x(const AsymptoticsArgs& a, const EdgeTypeDist& q) {
  const int K = q.max_degree();
  if (!a.x.empty()) {
    const auto halves = split(a.x, ':');
    if (halves.size() != 2) throw UsageError("--x must look like x-_1,..:x+_1,..");
    const auto in = parse_doubles(halves[0], "--x");
    const auto out = parse_doubles(halves[1], "--x");
    if (static_cast<int>(in.size()) != K || static_cast<int>(out.size()) != K) {
      throw UsageError("--x needs K entries on each side");
    }
    DoubleVector x(K);
    for (int d = 1; d <= K; ++d) {
      x.minus(d) = in[d - 1];
      x.plus(d) = out[d - 1];
    }
    return x;
  }
  if (!a.margins.empty()) {
    const StubMargins m = parse_margins(a.margins, K);
    if (!m.is_balanced() || m.in_total() == 0) {
      throw Error(ErrorCode::margin_mismatch, "--margins must be balanced with E > 0");
    }
    return DoubleVector::from_margins(m) * (1.0 / static_cast<double>(m.in_total()));
  }
  return DoubleVector::from_marginals(q);
}

json double_vector_json(const DoubleVector& v) {
  std::vector<double> minus, plus;
  for (int d = 1; d <= v.max_degree(); ++d) {
    minus.push_back(v.minus(d));
    plus.push_back(v.plus(d));
  }
  return {{"minus", minus}, {"plus", plus}};
}

int run_asymptotics(RunConfig& rc, const std::string& sub, const AsymptoticsArgs& a) {
  const DegreeModel model = load_consistent(rc.params);
  const EdgeTypeDist& q = model.q;
  const int K = q.max_degree();
  CriticalPointOptions opts;
  opts.tolerance = a.tolerance;
  opts.max_iterations = a.max_iterations;
  rc.effective = base_config(rc, "asymptotics", sub);
  rc.effective["tolerance"] = opts.tolerance;
  rc.effective["max_iterations"] = opts.max_iterations;
  rc.effective["model"] = model_to_json(model);

  json result;
  std::string printed;
  if (sub == "critical-point" || sub == "edge-mean") {
    const DoubleVector x = parse_x(a, q);
    rc.effective["x"] = double_vector_json(x);
    const CriticalPointResult cp = solve_critical_point(x, q, opts);
    result["x"] = double_vector_json(x);
    result["alpha"] = double_vector_json(cp.alpha);
    result["H"] = cp.h_at_min;
    result["gradient_norm"] = cp.gradient_norm;
    result["iterations"] = cp.iterations;
    result["det0"] = cp.hessian_projected_det;
    if (sub == "edge-mean") {
      json means = json::array();
      for (int k = 1; k <= K; ++k) {
        json row = json::array();
        for (int j = 1; j <= K; ++j) row.push_back(asymptotic_edge_mean(cp, q, k, j));
        means.push_back(std::move(row));
      }
      result["mean_fraction"] = std::move(means);
      if (!a.type.empty()) {
        const auto [k, j] = parse_pair(a.type, "--type");
        result["type"] = {k, j};
        const double v = asymptotic_edge_mean(cp, q, k, j);
        result["value"] = v;
        printed = fixed10(v);
      }
    }
  } else if (sub == "laplace-check") {
    if (a.margins.empty()) throw UsageError("laplace-check needs --margins");
    const StubMargins base = parse_margins(a.margins, K);
    rc.effective["margins"] = margins_json(base);
    rc.effective["scales"] = a.scales;
    json rows = json::array();
    EnumerationLimits limits;
    limits.max_degree = std::max(limits.max_degree, K);
    for (const std::int64_t m : parse_ints(a.scales, "--scales")) {
      if (m < 1) throw UsageError("--scales entries must be >= 1");
      StubMargins scaled = base;
      for (auto& v : scaled.in) v *= m;
      for (auto& v : scaled.out) v *= m;
      const double log_exact = log_exact_I(scaled, q, limits);
      const double log_approx = log_laplace_I_approx(scaled, q, opts);
      rows.push_back({{"m", m},
                      {"E", scaled.in_total()},
                      {"log_exact_I", log_exact},
                      {"log_laplace_I", log_approx},
                      {"ratio", std::exp(log_exact - log_approx)}});
    }
    result["scales"] = std::move(rows);
  } else {
    throw UsageError("unknown asymptotics subcommand " + sub);
  }
  write_outputs(rc, result);
  if (printed.empty()) {
    std::cout << result.dump(2) << "\n";
  } else {
    std::cout << printed << "\n";
  }
  return 0;
}

// --- configs ----------------------------------------------------------------

NodeType node_type_json(const json& t) {
  if (!t.is_array() || t.size() != 2 || !t[0].is_number_integer() || !t[1].is_number_integer()) {
    throw UsageError("node types must be [j, k] integer pairs (-1 matches any degree)");
  }
  return {t[0].get<int>(), t[1].get<int>()};
}

Configuration configuration_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("root")) throw UsageError("configuration needs a root");
  Configuration h(node_type_json(doc["root"]));
  for (const json& a : doc.value("attachments", json::array())) {
    const int parent = a.at("parent").get<int>();
    const std::string o = a.at("orientation").get<std::string>();
    if (o != "in" && o != "out") throw UsageError("orientation must be \"in\" or \"out\"");
    const Orientation orientation = o == "in" ? Orientation::in_edge : Orientation::out_edge;
    if (parent < 0 || parent >= h.node_count()) throw UsageError("attachment parent out of range");
    if (a.contains("closes_on")) {
      const int existing = a["closes_on"].get<int>();
      if (existing < 0 || existing >= h.node_count()) throw UsageError("closes_on out of range");
      h.close_cycle(parent, orientation, existing);
    } else {
      h.attach(parent, orientation, node_type_json(a.at("type")));
    }
  }
  return h;
}

struct ConfigsArgs {
  std::string config;
  std::string graph_dir;
  std::int64_t n = 0;
  int samples = 1;
  double delta = 0.25;
};

int run_configs(RunConfig& rc, const std::string& sub, const ConfigsArgs& a) {
  if (a.config.empty()) throw UsageError("--config is required");
  std::ifstream in(a.config);
  if (!in) throw Error(ErrorCode::io, "cannot open " + a.config);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::io, std::string("malformed configuration JSON: ") + e.what());
  }
  const Configuration h = configuration_from_json(doc);
  rc.effective = base_config(rc, "configs", sub);
  rc.effective["config"] = doc;

  json result;
  result["nodes"] = h.node_count();
  result["edges"] = h.edge_count();
  result["is_tree"] = h.is_tree();
  if (sub == "predict") {
    const DegreeModel model = load_consistent(rc.params);
    rc.effective["model"] = model_to_json(model);
    result["tree_probability"] = h.is_tree() ? json(tree_config_prob(h, model.p, model.q))
                                             : json(nullptr);
    if (h.edge_count() == 1 && h.is_tree()) {
      const std::vector<NodeType> types = h.node_types();
      const ConfigEdge e = h.edges()[0];
      result["edge_probability"] =
          two_node_edge_prob(model.p, model.q, types[e.target], types[e.source]);
    }
    std::cout << result.dump(2) << "\n";
  } else if (sub == "count") {
    std::vector<std::int64_t> counts;
    if (!a.graph_dir.empty()) {
      rc.effective["graph_dir"] = a.graph_dir;
      counts.push_back(count_config_occurrences(read_graph(a.graph_dir), h));
    } else {
      if (a.n < 1 || a.samples < 1) throw UsageError("count needs --graph-dir or --n/--samples");
      const DegreeModel model = load_consistent(rc.params);
      std::string seed_source;
      const std::uint64_t seed = resolve_seed(rc.seed, seed_source);
      rc.effective["model"] = model_to_json(model);
      rc.effective["n"] = a.n;
      rc.effective["samples"] = a.samples;
      rc.effective["delta"] = a.delta;
      rc.effective["seed"] = seed;
      rc.effective["seed_source"] = seed_source;
      counts.assign(a.samples, 0);
      parallel_for(a.samples, rc.threads, [&](std::size_t i) {
        GenerateOptions opts;
        opts.nodes = a.n;
        opts.delta = a.delta;
        opts.seed = seed;
        opts.stream = i;
        counts[i] = count_config_occurrences(generate_graph(model.p, model.q, opts), h);
      });
    }
    double sum = 0.0;
    for (std::int64_t c : counts) sum += static_cast<double>(c);
    result["counts"] = counts;
    result["mean"] = sum / static_cast<double>(counts.size());
    std::cout << result.dump(2) << "\n";
  } else {
    throw UsageError("unknown configs subcommand " + sub);
  }
  write_outputs(rc, result);
  return 0;
}

// --- validate ---------------------------------------------------------------

struct ValidateArgs {
  std::string suite = "all";
  std::string sizes = "1000,10000,100000";
  int reps = 10;
  double delta = 0.25;
  std::int64_t n = 2000;
  int length = 2;
};

std::string deviation_tsv(const LLNReport& r) {
  std::ostringstream os;
  os << "N\tmean_max_deviation\tmean_tv_distance\n";
  for (const SizeDeviation& s : r.sizes) {
    os << s.nodes << '\t' << s.mean_max_deviation << '\t' << s.mean_tv_distance << '\n';
  }
  return os.str();
}

int run_validate(RunConfig& rc, const ValidateArgs& a) {
  static const std::vector<std::string> suites = {"node-lln", "edge-lln", "first-edges",
                                                  "self-loops", "assortativity"};
  std::vector<std::string> chosen;
  if (a.suite == "all") {
    chosen = suites;
  } else if (std::find(suites.begin(), suites.end(), a.suite) != suites.end()) {
    chosen = {a.suite};
  } else {
    throw UsageError("unknown suite " + a.suite);
  }
  if (a.reps < 1) throw UsageError("--reps must be >= 1");
  const DegreeModel model = load_consistent(rc.params);
  std::string seed_source;
  const std::uint64_t seed = resolve_seed(rc.seed, seed_source);
  ValidationOptions opts;
  for (const std::int64_t n : parse_ints(a.sizes, "--sizes")) {
    if (n < 1) throw UsageError("--sizes entries must be >= 1");
    opts.sizes.push_back(n);
  }
  opts.reps = a.reps;
  opts.seed = seed;
  opts.delta = a.delta;
  opts.threads = rc.threads;

  rc.effective = base_config(rc, "validate", "");
  rc.effective["suite"] = a.suite;
  rc.effective["sizes"] = opts.sizes;
  rc.effective["reps"] = a.reps;
  rc.effective["delta"] = a.delta;
  rc.effective["n"] = a.n;
  rc.effective["length"] = a.length;
  rc.effective["seed"] = seed;
  rc.effective["seed_source"] = seed_source;
  rc.effective["model"] = model_to_json(model);

  fs::create_directories(rc.out_dir);
  json report;
  for (const std::string& s : chosen) {
    if (s == "node-lln" || s == "edge-lln") {
      const LLNReport r = s == "node-lln" ? node_lln(model.p, model.q, opts)
                                          : edge_lln(model.p, model.q, opts);
      report[s] = to_json(r);
      write_file_atomic(fs::path(rc.out_dir) / (s + ".tsv"), deviation_tsv(r));
    } else if (s == "first-edges") {
      report[s] = to_json(first_edges_distribution(model.p, model.q, a.n, a.length, a.reps, seed,
                                                   a.delta, rc.threads));
    } else if (s == "self-loops") {
      if (a.reps < 2) throw UsageError("self-loops needs --reps >= 2");
      const SelfLoopReport r =
          self_loop_poisson(model.p, model.q, a.n, a.reps, seed, a.delta, rc.threads);
      report[s] = to_json(r);
      std::ostringstream os;
      os << "rep\tself_loops\n";
      for (std::size_t i = 0; i < r.counts.size(); ++i) os << i << '\t' << r.counts[i] << '\n';
      write_file_atomic(fs::path(rc.out_dir) / "self-loops.tsv", os.str());
    } else {
      report[s] = to_json(
          assortativity_suite(model.p, model.q, a.n, a.reps, seed, a.delta, rc.threads));
    }
  }
  write_file_atomic(fs::path(rc.out_dir) / "report.json", report.dump(2) + "\n");
  write_outputs(rc, nullptr);
  std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Assortative configuration graphs: generation, exact kernels, asymptotics, "
               "configuration probabilities and validation"};
  app.require_subcommand(1);
  RunConfig rc;

  auto add_common = [&](CLI::App* cmd, bool seeded) {
    cmd->add_option("--params", rc.params, "parameter JSON (K, P, Q)");
    cmd->add_option("--out-dir", rc.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--threads", rc.threads, "worker threads (0 = all cores)");
    if (seeded) cmd->add_option("--seed", rc.seed, "RNG seed (falls back to ACG_SEED)");
  };

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "sample multigraphs");
  add_common(generate, true);
  generate->add_option("--n", gen.n, "number of nodes")->required();
  generate->add_option("--delta", gen.delta, "clipping exponent in (0, 1/2)")->capture_default_str();
  generate->add_option("--samples", gen.samples, "number of graphs")->capture_default_str();
  generate->add_option("--max-redraws", gen.max_redraws)->capture_default_str();

  ExactArgs ex;
  std::string exact_sub;
  CLI::App* exact = app.add_subcommand("exact", "finite-size exact kernel");
  exact->require_subcommand(1);
  for (const char* name : {"partition", "mean", "var", "joint", "oracle"}) {
    CLI::App* s = exact->add_subcommand(name);
    add_common(s, false);
    s->add_option("--margins", ex.margins, "stub margins e-_1,..,e-_K:e+_1,..,e+_K");
    s->add_option("--sequence", ex.sequence, "node types j:k,j:k,...");
    s->add_option("--type", ex.type, "edge type k,j");
    s->add_option("--types", ex.types, "edge types k,j;k,j;...");
    s->add_option("--max-edges", ex.max_edges)->capture_default_str();
    s->add_option("--max-tables", ex.max_tables)->capture_default_str();
    s->add_flag("--rational", ex.rational, "also report exact rational values");
    s->callback([&exact_sub, name] { exact_sub = name; });
  }

  AsymptoticsArgs as;
  std::string asym_sub;
  CLI::App* asym = app.add_subcommand("asymptotics", "large-N machinery");
  asym->require_subcommand(1);
  for (const char* name : {"critical-point", "edge-mean", "laplace-check"}) {
    CLI::App* s = asym->add_subcommand(name);
    add_common(s, false);
    s->add_option("--x", as.x, "normalized margins x-_1,..:x+_1,..");
    s->add_option("--margins", as.margins, "stub margins e-_1,..:e+_1,..");
    s->add_option("--type", as.type, "edge type k,j");
    s->add_option("--scales", as.scales, "margin multipliers")->capture_default_str();
    s->add_option("--tolerance", as.tolerance)->capture_default_str();
    s->add_option("--max-iterations", as.max_iterations)->capture_default_str();
    s->callback([&asym_sub, name] { asym_sub = name; });
  }

  ConfigsArgs cf;
  std::string configs_sub;
  CLI::App* configs = app.add_subcommand("configs", "configuration probabilities");
  configs->require_subcommand(1);
  for (const char* name : {"predict", "count"}) {
    CLI::App* s = configs->add_subcommand(name);
    add_common(s, true);
    s->add_option("--config", cf.config, "configuration JSON")->required();
    s->add_option("--graph-dir", cf.graph_dir, "count in a graph written by generate");
    s->add_option("--n", cf.n, "nodes per generated graph");
    s->add_option("--samples", cf.samples)->capture_default_str();
    s->add_option("--delta", cf.delta)->capture_default_str();
    s->callback([&configs_sub, name] { configs_sub = name; });
  }

  ValidateArgs va;
  CLI::App* validate = app.add_subcommand("validate", "Monte Carlo validation suites");
  add_common(validate, true);
  validate->add_option("--suite", va.suite)
      ->check(CLI::IsMember({"node-lln", "edge-lln", "first-edges", "self-loops",
                             "assortativity", "all"}))
      ->capture_default_str();
  validate->add_option("--sizes", va.sizes, "comma-separated N values")->capture_default_str();
  validate->add_option("--reps", va.reps)->capture_default_str();
  validate->add_option("--delta", va.delta)->capture_default_str();
  validate->add_option("--n", va.n, "N for first-edges, self-loops, assortativity")
      ->capture_default_str();
  validate->add_option("--length", va.length, "L for first-edges")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (generate->parsed()) return run_generate(rc, gen);
    if (exact->parsed()) return run_exact(rc, exact_sub, ex);
    if (asym->parsed()) return run_asymptotics(rc, asym_sub, as);
    if (configs->parsed()) return run_configs(rc, configs_sub, cf);
    if (validate->parsed()) return run_validate(rc, va);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return e.code() == ErrorCode::invalid_argument ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
