#include "acg/model_io.hpp"

#include "acg/error.hpp"

#include <fstream>
#include <sstream>

namespace acg {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows, int size, const char* name) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != size) {
    throw Error(ErrorCode::invalid_distribution,
                std::string(name) + " must have K+1 = " + std::to_string(size) + " rows");
  }
  Matrix m(size, size);
  for (int r = 0; r < size; ++r) {
    const json& row = rows[r];
    if (!row.is_array() || static_cast<int>(row.size()) != size) {
      throw Error(ErrorCode::invalid_distribution, std::string(name) + " row " +
                                                       std::to_string(r) + " must have " +
                                                       std::to_string(size) + " entries");
    }
    for (int c = 0; c < size; ++c) {
      if (!row[c].is_number()) {
        throw Error(ErrorCode::invalid_distribution, std::string(name) + " entries must be numbers");
      }
      m(r, c) = row[c].get<double>();
    }
  }
  return m;
}

DegreeModel model_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("K") || !doc.contains("P") || !doc.contains("Q")) {
    throw Error(ErrorCode::invalid_distribution, "parameter document needs K, P and Q");
  }
  if (!doc["K"].is_number_integer() || doc["K"].get<int>() < 1) {
    throw Error(ErrorCode::invalid_distribution, "K must be an integer >= 1");
  }
  const int K = doc["K"].get<int>();
  NodeTypeDist p = NodeTypeDist::from_weights(matrix_from_json(doc["P"], K + 1, "P"));
  const json& qdoc = doc["Q"];
  if (qdoc.is_string()) {
    if (qdoc.get<std::string>() != "independent") {
      throw Error(ErrorCode::invalid_distribution, "Q must be a matrix or \"independent\"");
    }
    EdgeTypeDist q = independent_edge_dist(p);
    return DegreeModel{std::move(p), std::move(q), true};
  }
  EdgeTypeDist q = EdgeTypeDist::from_weights(matrix_from_json(qdoc, K + 1, "Q"));
  return DegreeModel{std::move(p), std::move(q), false};
}

DegreeModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open parameter file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::io, "malformed JSON in " + path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

json model_to_json(const DegreeModel& model) {
  json doc;
  doc["K"] = model.p.max_degree();
  doc["P"] = matrix_to_json(model.p.matrix());
  if (model.q_independent) {
    doc["Q"] = "independent";
  } else {
    doc["Q"] = matrix_to_json(model.q.matrix());
  }
  return doc;
}

json derived_report(const DegreeModel& model) {
  const int K = model.p.max_degree();
  json out;
  out["K"] = K;
  std::vector<double> p_in, p_out, q_in, q_out;
  for (int d = 0; d <= K; ++d) {
    p_in.push_back(model.p.in_marginal()(d));
    p_out.push_back(model.p.out_marginal()(d));
    if (d > 0) {
      q_in.push_back(model.q.in_marginal()(d));
      q_out.push_back(model.q.out_marginal()(d));
    }
  }
  out["P_in"] = p_in;
  out["P_out"] = p_out;
  out["Q_in"] = q_in;
  out["Q_out"] = q_out;
  out["z"] = model.p.mean_degree();
  const ConsistencyReport c = validate_pair(model.p, model.q);
  out["consistent"] = c.is_consistent;
  out["max_violation"] = c.max_violation;
  out["lambda"] = self_loop_rate(model.p, model.q);
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write " + tmp.string());
    out << contents;
    if (!out) throw Error(ErrorCode::io, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::io, "cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace acg
