#pragma once

#include "acg/graph.hpp"
#include "acg/model_io.hpp"
#include "acg/sampler.hpp"

#include <filesystem>
#include <string>

namespace acg {

// nodes.csv: "id,j,k" header then one row per node.
std::string nodes_csv(const MultiGraph& g);
// edges.tsv: "edge_id\tsrc\tdst\tk\tj\tself_loop" header then one row per edge
// in wiring order.
std::string edges_tsv(const MultiGraph& g);
// Generation metadata plus the e_kj matrix (rows k = 0..K, columns j = 0..K).
json graph_meta_json(const MultiGraph& g, const GraphClass& cls);

// Writes nodes.csv, edges.tsv and meta.json into dir (created if absent).
// `extra` is merged into meta.json.
void write_graph(const std::filesystem::path& dir, const MultiGraph& g, const json& extra = {});

// Reads a graph previously written by write_graph.
MultiGraph read_graph(const std::filesystem::path& dir);

}  // namespace acg
