#include "acg/graph_io.hpp"

#include "acg/error.hpp"

#include <fstream>
#include <sstream>

namespace acg {

std::string nodes_csv(const MultiGraph& g) {
  std::ostringstream os;
  os << "id,j,k\n";
  for (std::int64_t v = 0; v < g.node_count(); ++v) {
    os << v << ',' << g.nodes[v].in << ',' << g.nodes[v].out << '\n';
  }
  return os.str();
}

std::string edges_tsv(const MultiGraph& g) {
  std::ostringstream os;
  os << "edge_id\tsrc\tdst\tk\tj\tself_loop\n";
  for (std::int64_t i = 0; i < g.edge_count(); ++i) {
    const Edge& e = g.edges[i];
    os << i << '\t' << e.source << '\t' << e.target << '\t' << e.out_degree << '\t'
       << e.in_degree << '\t' << (e.self_loop() ? 1 : 0) << '\n';
  }
  return os.str();
}

json graph_meta_json(const MultiGraph& g, const GraphClass& cls) {
  json meta;
  meta["seed"] = g.meta.seed;
  meta["stream"] = g.meta.stream;
  meta["N"] = g.node_count();
  meta["E"] = g.edge_count();
  meta["K"] = g.max_degree;
  meta["D"] = g.meta.discrepancy;
  meta["clip_count"] = g.meta.clip_count;
  meta["redraws"] = g.meta.redraws;
  meta["restarts"] = g.meta.dead_end_restarts;
  meta["uniform_fallback"] = g.meta.uniform_fallback;
  meta["fallback_edges"] = g.meta.fallback_edges;
  meta["self_loops"] = cls.self_loops;
  meta["multi_edges"] = cls.multi_edges;
  meta["is_simple"] = cls.is_simple;
  json ekj = json::array();
  for (int k = 0; k <= g.max_degree; ++k) {
    json row = json::array();
    for (int j = 0; j <= g.max_degree; ++j) row.push_back(cls.edge_types.at(k, j));
    ekj.push_back(std::move(row));
  }
  meta["e_kj"] = std::move(ekj);
  return meta;
}

void write_graph(const std::filesystem::path& dir, const MultiGraph& g, const json& extra) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "nodes.csv", nodes_csv(g));
  write_file_atomic(dir / "edges.tsv", edges_tsv(g));
  json meta = graph_meta_json(g, classify_graph(g));
  if (extra.is_object()) meta.update(extra);
  write_file_atomic(dir / "meta.json", meta.dump(2) + "\n");
}

MultiGraph read_graph(const std::filesystem::path& dir) {
  MultiGraph g;
  std::ifstream meta_in(dir / "meta.json");
  if (!meta_in) throw Error(ErrorCode::io, "missing meta.json in " + dir.string());
  json meta;
  meta_in >> meta;
  g.max_degree = meta.at("K").get<int>();
  g.meta.seed = meta.value("seed", std::uint64_t{0});
  g.meta.stream = meta.value("stream", std::uint64_t{0});

  std::ifstream nodes_in(dir / "nodes.csv");
  if (!nodes_in) throw Error(ErrorCode::io, "missing nodes.csv in " + dir.string());
  std::string line;
  std::getline(nodes_in, line);
  while (std::getline(nodes_in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::int64_t id = 0;
    NodeType t;
    char comma = 0;
    if (!(row >> id >> comma >> t.in >> comma >> t.out) || id != g.node_count()) {
      throw Error(ErrorCode::io, "malformed nodes.csv line: " + line);
    }
    g.nodes.push_back(t);
  }

  std::ifstream edges_in(dir / "edges.tsv");
  if (!edges_in) throw Error(ErrorCode::io, "missing edges.tsv in " + dir.string());
  std::getline(edges_in, line);
  while (std::getline(edges_in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::int64_t id = 0;
    int loop = 0;
    Edge e;
    if (!(row >> id >> e.source >> e.target >> e.out_degree >> e.in_degree >> loop)) {
      throw Error(ErrorCode::io, "malformed edges.tsv line: " + line);
    }
    if (e.source < 0 || e.source >= g.node_count() || e.target < 0 ||
        e.target >= g.node_count()) {
      throw Error(ErrorCode::io, "edge endpoint out of range: " + line);
    }
    g.edges.push_back(e);
  }
  return g;
}

}  // namespace acg
