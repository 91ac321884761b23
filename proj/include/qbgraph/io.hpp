#pragma once

#include "qbgraph/aggregate.hpp"
#include "qbgraph/diagnostics.hpp"
#include "qbgraph/orchestrator.hpp"
#include "qbgraph/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qbgraph {

using Json = nlohmann::json;
namespace fs = std::filesystem;

/// Shortest decimal string that parses back to exactly `x`; "NA" for NaN.
std::string format_double(double x);
/// Inverse of format_double. Throws InvalidArgument on malformed input.
double parse_double(const std::string& text);

// CSV files may begin with '#' comment lines; readers skip them.

/// n rows of p comma-separated values, no header.
void write_data_csv(const fs::path& path, const Matrix& values,
                    const std::vector<std::string>& comments = {});
Matrix read_data_csv(const fs::path& path);

/// Header row of node ids 1..p, then p rows.
void write_matrix_csv(const fs::path& path, const Matrix& m,
                      const std::vector<std::string>& comments = {});
Matrix read_matrix_csv(const fs::path& path);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

Json to_json(const ChainSummary& s);
ChainSummary chain_summary_from_json(const Json& j);
Json to_json(const FitResult& fit);
FitResult fit_result_from_json(const Json& j);
Json to_json(const GraphEstimate& est);
GraphEstimate graph_estimate_from_json(const Json& j);
Json to_json(const TheoryReport& report);
Json to_json(const Metrics& m);

/// Flat "section.key = value" lines; "[section]" headers prefix the keys that
/// follow. Blank lines and text after '#' are ignored.
/// Throws InvalidArgument on a malformed line or a repeated key.
std::map<std::string, std::string> parse_config(const std::string& text);

/// One bar per off-diagonal entry (i < j, lexicographic), spanning its
/// interval, with a dot at the true value when `truth` is given.
std::string interval_svg(const GraphEstimate& estimate, const std::optional<PrecisionMatrix>& truth);
void render_interval_svg(const GraphEstimate& estimate, const std::optional<PrecisionMatrix>& truth,
                         const fs::path& path);

}  // namespace qbgraph
