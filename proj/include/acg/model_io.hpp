#pragma once

#include "acg/degree_model.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace acg {

using json = nlohmann::json;

// Parameter document: {"K": int, "P": [[...]], "Q": [[...]] | "independent"}.
// P is indexed [j][k], Q is indexed [k][j]; both are (K+1)x(K+1).
DegreeModel model_from_json(const json& doc);
DegreeModel load_model(const std::filesystem::path& path);

// Emits a document that model_from_json re-parses to the same model.
json model_to_json(const DegreeModel& model);

// Derived quantities: marginals, z, λ and the consistency residual. Q
// marginals omit the degree-0 entry.
json derived_report(const DegreeModel& model);

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& rows, int size, const char* name);

// Writes to a sibling temporary file and renames over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace acg
