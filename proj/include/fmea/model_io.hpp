#pragma once

#include "fmea/located_json.hpp"
#include "fmea/model.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace fmea {

inline constexpr int kSchemaVersion = 1;

/// Reads a model document without semantic validation. Throws ParseError.
FmeaModel parse_model_document(std::string_view text);
FmeaModel model_from_json(const LocatedJson& doc);

/// parse_model_document followed by validate_model; throws ValidationError on violations.
FmeaModel parse_model(std::string_view text);

/// Canonical document. Variables are listed under their owning function, so a
/// model whose variables are not grouped by function in function order comes
/// back reordered.
nlohmann::json model_to_json(const FmeaModel& model);
std::string serialize_model(const FmeaModel& model);

/// Graphviz digraph of the model structure and the influence graph.
std::string export_dot(const FmeaModel& model);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

} // namespace fmea
