#include "ifsconj/config.hpp"

#include "ifsconj/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace ifsconj {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const Json& require(const Json& j, const char* key, const std::string& path) {
    const auto it = j.find(key);
    if (it == j.end()) throw ConfigError("missing field " + join(path, key));
    return *it;
}

std::vector<int> index_list(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path + " must be a nonempty array of symbols");
    std::vector<int> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number_integer() || j[i].get<long long>() < 1)
            throw ConfigError(path + "[" + std::to_string(i) + "] must be a positive integer symbol");
        out.push_back(j[i].get<int>());
    }
    return out;
}

template <class F>
auto wrap(const std::string& path, F&& build) {
    try {
        return build();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace

Json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError("malformed JSON in " + source + ": " + e.what());
    }
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_json_text(buf.str(), path);
}

void check_fields(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError((path.empty() ? std::string("input") : path) + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) throw ConfigError("unknown field " + join(path, key));
    }
}

double get_number(const Json& j, const char* key, const std::string& path) {
    const Json& v = require(j, key, path);
    if (!v.is_number()) throw ConfigError(join(path, key) + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(join(path, key) + " must be finite");
    return d;
}

std::optional<double> get_optional_number(const Json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) return std::nullopt;
    return get_number(j, key, path);
}

std::size_t get_count(const Json& j, const char* key, const std::string& path) {
    const Json& v = require(j, key, path);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError(join(path, key) + " must be a nonnegative integer");
    return v.get<std::size_t>();
}

std::optional<std::size_t> get_optional_count(const Json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) return std::nullopt;
    return get_count(j, key, path);
}

std::optional<std::string> get_optional_string(const Json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) return std::nullopt;
    if (!j[key].is_string()) throw ConfigError(join(path, key) + " must be a string");
    return j[key].get<std::string>();
}

std::optional<bool> get_optional_bool(const Json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) return std::nullopt;
    if (!j[key].is_boolean()) throw ConfigError(join(path, key) + " must be true or false");
    return j[key].get<bool>();
}

ScalarMap map_from_json(const Json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + " must be a JSON object");
    const auto kind = get_optional_string(j, "kind", path);
    if (!kind) throw ConfigError("missing field " + join(path, "kind"));
    return wrap(path, [&] {
        if (*kind == "linear") {
            check_fields(j, path, {"kind", "k"});
            return ScalarMap::linear(get_number(j, "k", path));
        }
        if (*kind == "linear-lipschitz") {
            check_fields(j, path, {"kind", "k", "perturbation"});
            const std::string ppath = join(path, "perturbation");
            const Json& p = require(j, "perturbation", path);
            check_fields(p, ppath, {"shape", "c", "epsilon"});
            const std::string shape = get_optional_string(p, "shape", ppath).value_or("sine");
            const double c = get_number(p, "c", ppath);
            const auto eps = get_optional_number(p, "epsilon", ppath);
            Perturbation phi;
            if (shape == "sine")
                phi = Perturbation::sine(c, eps);
            else if (shape == "rational")
                phi = Perturbation::rational(c, eps);
            else
                throw ConfigError(join(ppath, "shape") + " must be \"sine\" or \"rational\", got \"" + shape + "\"");
            return ScalarMap::perturbed(get_number(j, "k", path), phi);
        }
        if (*kind == "smooth") {
            check_fields(j, path, {"kind", "name", "params"});
            const std::string name = get_optional_string(j, "name", path).value_or("");
            if (name != "rational-bump") throw ConfigError(join(path, "name") + " must be \"rational-bump\", got \"" + name + "\"");
            const std::vector<double> params = vector_from_json(require(j, "params", path), join(path, "params"));
            if (params.size() != 2) throw ConfigError(join(path, "params") + " must be [k, c]");
            return ScalarMap::rational_bump(params[0], params[1]);
        }
        if (*kind == "affine") {
            check_fields(j, path, {"kind", "k", "b"});
            return ScalarMap::affine(get_number(j, "k", path), get_number(j, "b", path));
        }
        throw ConfigError(join(path, "kind") + " must be one of linear, linear-lipschitz, smooth, affine, got \"" + *kind + "\"");
    });
}

Json map_to_json(const ScalarMap& f) {
    Json j;
    switch (f.kind()) {
        case ScalarMap::Kind::Linear:
            j["kind"] = "linear";
            j["k"] = f.slope();
            break;
        case ScalarMap::Kind::LinearPlusLipschitz: {
            const auto& p = std::get<PerturbedLinearForm>(f.form()).perturbation;
            j["kind"] = "linear-lipschitz";
            j["k"] = f.slope();
            j["perturbation"] = {{"shape", to_string(p.shape)}, {"c", p.amplitude}, {"epsilon", p.declared_lipschitz}};
            break;
        }
        case ScalarMap::Kind::SmoothCatalog: {
            const auto& r = std::get<RationalBumpForm>(f.form());
            j["kind"] = "smooth";
            j["name"] = "rational-bump";
            j["params"] = {r.k, r.c};
            break;
        }
        case ScalarMap::Kind::Affine:
            j["kind"] = "affine";
            j["k"] = f.slope();
            j["b"] = std::get<AffineForm>(f.form()).b;
            break;
    }
    return j;
}

SymbolSequence sequence_from_json(const Json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + " must be a JSON object");
    const auto type = get_optional_string(j, "type", path);
    if (!type) throw ConfigError("missing field " + join(path, "type"));
    return wrap(path, [&] {
        if (*type == "explicit") {
            check_fields(j, path, {"type", "indices"});
            return SymbolSequence::explicit_symbols(index_list(require(j, "indices", path), join(path, "indices")));
        }
        if (*type == "periodic") {
            check_fields(j, path, {"type", "pattern"});
            return SymbolSequence::periodic(index_list(require(j, "pattern", path), join(path, "pattern")));
        }
        if (*type == "bernoulli") {
            check_fields(j, path, {"type", "p", "seed"});
            return SymbolSequence::bernoulli(get_number(j, "p", path), get_optional_count(j, "seed", path).value_or(0));
        }
        if (*type == "sparse") {
            check_fields(j, path, {"type", "special", "rule"});
            const auto special = get_count(j, "special", path);
            const std::string rule = get_optional_string(j, "rule", path).value_or("perfect-squares");
            PositionRule r;
            if (rule == "perfect-squares")
                r = PositionRule::PerfectSquares;
            else if (rule == "powers-of-two")
                r = PositionRule::PowersOfTwo;
            else
                throw ConfigError(join(path, "rule") + " must be \"perfect-squares\" or \"powers-of-two\", got \"" + rule + "\"");
            return SymbolSequence::sparse(static_cast<int>(special), r);
        }
        throw ConfigError(join(path, "type") + " must be one of explicit, periodic, bernoulli, sparse, got \"" + *type + "\"");
    });
}

Json sequence_to_json(const SymbolSequence& s) {
    return std::visit(
        [](const auto& g) -> Json {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, SymbolSequence::Explicit>)
                return {{"type", "explicit"}, {"indices", g.indices}};
            else if constexpr (std::is_same_v<T, SymbolSequence::Periodic>)
                return {{"type", "periodic"}, {"pattern", g.pattern}};
            else if constexpr (std::is_same_v<T, SymbolSequence::Bernoulli>)
                return {{"type", "bernoulli"}, {"p", g.p}, {"seed", g.seed}};
            else
                return {{"type", "sparse"}, {"special", g.special}, {"rule", to_string(g.rule)}};
        },
        s.generator());
}

IfsSpec ifs_from_json(const Json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError((path.empty() ? std::string("input") : path) + " must be a JSON object");
    const Json& maps = require(j, "maps", path);
    const std::string mpath = join(path, "maps");
    if (!maps.is_array() || maps.empty()) throw ConfigError(mpath + " must be a nonempty array");
    std::vector<ScalarMap> list;
    for (std::size_t i = 0; i < maps.size(); ++i) list.push_back(map_from_json(maps[i], mpath + "[" + std::to_string(i) + "]"));
    double radius = kDefaultRadius;
    if (j.contains("domain")) {
        const std::string dpath = join(path, "domain");
        check_fields(j["domain"], dpath, {"R"});
        radius = get_number(j["domain"], "R", dpath);
        if (!(radius > 0.0)) throw ConfigError(join(dpath, "R") + " must be positive");
    }
    const std::string label = get_optional_string(j, "label", path).value_or("");
    return {IfsDescriptor(std::move(list), label), radius};
}

Json ifs_to_json(const IfsSpec& spec) {
    Json maps = Json::array();
    for (const auto& f : spec.ifs.maps()) maps.push_back(map_to_json(f));
    Json j;
    if (!spec.ifs.label().empty()) j["label"] = spec.ifs.label();
    j["maps"] = std::move(maps);
    j["domain"] = {{"R", spec.radius}};
    return j;
}

std::vector<DiagonalMap> diagonal_maps_from_json(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path + " must be a nonempty array");
    std::vector<DiagonalMap> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        check_fields(j[i], p, {"diag"});
        out.push_back(wrap(p, [&] { return DiagonalMap(vector_from_json(require(j[i], "diag", p), join(p, "diag"))); }));
    }
    return out;
}

Json diagonal_maps_to_json(const std::vector<DiagonalMap>& maps) {
    Json j = Json::array();
    for (const auto& d : maps) j.push_back({{"diag", d.diag}});
    return j;
}

Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path + " must be a nonempty array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const std::vector<double> row = vector_from_json(j[r], path + "[" + std::to_string(r) + "]");
        if (row.size() != cols) throw ConfigError(path + " rows must have equal length");
        for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
    }
    return m;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
    Json j = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        j.push_back(std::move(row));
    }
    return j;
}

std::vector<double> vector_from_json(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path + " must be a nonempty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "] must be a number");
        out.push_back(j[i].get<double>());
    }
    return out;
}

Json number_json(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace ifsconj
