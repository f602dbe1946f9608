#pragma once

#include "json.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mssv {

struct ModelSpec;
struct GroupParams;
struct Estimate;

using Json = nlohmann::ordered_json;

/// Round-trip rendering with 17 significant digits.
std::string format_double(double v);

/// Serializes JSON with every floating-point number at 17 significant digits.
std::string dump_json(const Json& j);

std::string read_text_file(const std::string& path);

/// Writes to `path.tmp` and renames, so a failed run never leaves a partial file.
void write_text_file_atomic(const std::string& path, const std::string& contents);

ModelSpec model_spec_from_json(const Json& j);
Json to_json(const ModelSpec& spec);

/// Accepts either the full set (sigma_bar, sigma_star, v0, v1, v2, v3) or the
/// reduced set (sigma_star, v0, v1, v3); missing entries default to the
/// reduced convention.
GroupParams group_params_from_json(const Json& j);
Json to_json(const GroupParams& gp);

Json to_json(const Estimate& e);

/// Minimal CSV: header row plus numeric rows, comma separated.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
std::string to_csv(const CsvTable& table);

}  // namespace mssv
