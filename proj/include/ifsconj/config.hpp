#pragma once

// JSON schemas for maps, sequences and IFSs.  Unknown fields are rejected
// with a ConfigError naming the JSON path.

#include "ifsconj/core.hpp"
#include "ifsconj/multidim.hpp"

#include <json.hpp>

#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

namespace ifsconj {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "1.0.0";

/// Parses a JSON document; ConfigError carries line and column on failure.
Json parse_json_text(const std::string& text, const std::string& source);
Json read_json_file(const std::string& path);

/// Throws ConfigError for a non-object or for keys outside `allowed`.
void check_fields(const Json& j, const std::string& path, std::initializer_list<const char*> allowed);

double get_number(const Json& j, const char* key, const std::string& path);
std::optional<double> get_optional_number(const Json& j, const char* key, const std::string& path);
std::size_t get_count(const Json& j, const char* key, const std::string& path);
std::optional<std::size_t> get_optional_count(const Json& j, const char* key, const std::string& path);
std::optional<std::string> get_optional_string(const Json& j, const char* key, const std::string& path);
std::optional<bool> get_optional_bool(const Json& j, const char* key, const std::string& path);

/// {"kind":"linear","k":..}
/// {"kind":"linear-lipschitz","k":..,"perturbation":{"shape":"sine"|"rational","c":..,"epsilon":..}}
/// {"kind":"smooth","name":"rational-bump","params":[k, c]}
/// {"kind":"affine","k":..,"b":..}
ScalarMap map_from_json(const Json& j, const std::string& path);
Json map_to_json(const ScalarMap& f);

/// {"type":"explicit","indices":[..]} | {"type":"periodic","pattern":[..]}
/// {"type":"bernoulli","p":..,"seed":..} | {"type":"sparse","special":..,"rule":"perfect-squares"|"powers-of-two"}
SymbolSequence sequence_from_json(const Json& j, const std::string& path);
Json sequence_to_json(const SymbolSequence& s);

struct IfsSpec {
    IfsDescriptor ifs;
    double radius = kDefaultRadius;
};

/// Reads "maps", optional "domain": {"R": ..} and optional "label" from an
/// object; other keys are left to the caller.
IfsSpec ifs_from_json(const Json& j, const std::string& path);
Json ifs_to_json(const IfsSpec& spec);

std::vector<DiagonalMap> diagonal_maps_from_json(const Json& j, const std::string& path);
Json diagonal_maps_to_json(const std::vector<DiagonalMap>& maps);

Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& path);
Json matrix_to_json(const Eigen::MatrixXd& m);

std::vector<double> vector_from_json(const Json& j, const std::string& path);

/// Non-finite values become null.
Json number_json(double v);

}  // namespace ifsconj
