#include "ifsconj/cli.hpp"

#include "ifsconj/attractor.hpp"
#include "ifsconj/config.hpp"
#include "ifsconj/conjugacy1d.hpp"
#include "ifsconj/errors.hpp"
#include "ifsconj/linearization.hpp"
#include "ifsconj/multidim.hpp"
#include "ifsconj/stability.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

namespace ifsconj {

namespace {

struct Outcome {
    Json report;
    std::string csv;
    int exit_code = 0;
};

class Csv {
public:
    explicit Csv(std::initializer_list<const char*> header) {
        bool first = true;
        for (const char* h : header) {
            os_ << (first ? "" : ",") << h;
            first = false;
        }
        os_ << '\n';
        os_.precision(17);
    }
    template <class... Ts>
    void row(const Ts&... values) {
        bool first = true;
        ((os_ << (first ? "" : ","), put(values), first = false), ...);
        os_ << '\n';
    }
    std::string str() const { return os_.str(); }

private:
    void put(double v) {
        if (std::isnan(v))
            os_ << "nan";
        else if (std::isinf(v))
            os_ << (v > 0 ? "inf" : "-inf");
        else
            os_ << v;
    }
    template <class T>
    void put(const T& v) {
        os_ << v;
    }
    std::ostringstream os_;
};

BridgeKind bridge_from(const Json& in) {
    const std::string b = get_optional_string(in, "bridge", "").value_or("linear");
    if (b == "linear") return BridgeKind::LinearInterpolation;
    if (b == "power-law") return BridgeKind::PowerLaw;
    throw ConfigError("bridge must be \"linear\" or \"power-law\"");
}

double linear_slope(const ScalarMap& f, const char* which) {
    if (f.kind() != ScalarMap::Kind::Linear)
        throw UnsupportedMapError(std::string(which) + " must be a linear map for this command");
    return f.slope();
}

Json report_json(const ConjugacyReport& r) {
    Json j;
    j["pass"] = r.pass;
    j["residual_sup"] = number_json(r.residual_sup);
    j["abs_residual_sup"] = number_json(r.abs_residual_sup);
    j["tolerance"] = r.tolerance;
    j["worst_point"] = r.worst_point;
    j["grid_size"] = r.grid.size();
    if (r.failure) j["failure"] = *r.failure;
    return j;
}

std::string report_csv(const ConjugacyReport& r) {
    Csv csv({"x", "h_x", "residual"});
    for (std::size_t i = 0; i < r.grid.size(); ++i) csv.row(r.grid[i], r.h_values[i], r.residuals[i]);
    return csv.str();
}

IfsSpec ifs_with_radius(const Json& in, const std::string& path, const RunConfig& cfg) {
    IfsSpec spec = ifs_from_json(in, path);
    if (cfg.radius) {
        if (!(*cfg.radius > 0.0)) throw ConfigError("--radius must be positive");
        spec.radius = *cfg.radius;
    }
    return spec;
}

IfsSpec nested_ifs(const Json& in, const char* key, const RunConfig& cfg) {
    if (!in.contains(key)) throw ConfigError(std::string("missing field ") + key);
    check_fields(in[key], key, {"maps", "domain", "label"});
    return ifs_with_radius(in[key], key, cfg);
}

// ---------------------------------------------------------------------------

Outcome pair_conjugacy(const Json& in, const RunConfig& cfg, Json& resolved) {
    check_fields(in, "", {"f", "g", "bridge", "anchor", "domain"});
    const ScalarMap f = map_from_json(in.at("f"), "f");
    const ScalarMap g = map_from_json(in.at("g"), "g");
    const BridgeKind bridge = bridge_from(in);
    const double anchor = get_optional_number(in, "anchor", "").value_or(1.0);
    double radius = kDefaultRadius;
    if (in.contains("domain")) {
        check_fields(in["domain"], "domain", {"R"});
        radius = get_number(in["domain"], "R", "domain");
    }
    radius = cfg.radius.value_or(radius);
    const std::size_t grid = cfg.grid.value_or(1001);
    const double tol = cfg.tolerance.value_or(1e-9);
    resolved["f"] = map_to_json(f);
    resolved["g"] = map_to_json(g);
    resolved["bridge"] = to_string(bridge);
    resolved["anchor"] = anchor;
    resolved["radius"] = radius;
    resolved["grid"] = grid;
    resolved["tolerance"] = tol;

    const double k = linear_slope(f, "f");
    const double m = linear_slope(g, "g");
    Outcome out;
    const SlopeInterval tk = classify_slope_interval(k);
    const SlopeInterval tm = classify_slope_interval(m);
    out.report["f_interval"] = to_string(tk);
    out.report["g_interval"] = to_string(tm);
    if (tk != SlopeInterval::Boundary && tm != SlopeInterval::Boundary && tk != tm) {
        out.report["verdict"] = "obstructed";
        out.report["obstruction"] = to_string(obstruction_between(tk, tm));
        out.exit_code = 2;
        return out;
    }
    const Homeomorphism1D h = build_linear_conjugacy(k, m, anchor, bridge, radius);
    const ConjugacyReport rep = verify_conjugacy(f, g, h, grid, tol, radius);
    out.report["verdict"] = rep.pass ? "pass" : "fail";
    out.report["homeomorphism"] = h.describe();
    out.report["verification"] = report_json(rep);
    out.csv = report_csv(rep);
    out.exit_code = rep.pass ? 0 : 1;
    return out;
}

Outcome weak_verification(const Json& in, const RunConfig& cfg, Json& resolved) {
    check_fields(in, "", {"F", "G", "sequence", "n", "bridge", "anchor"});
    const IfsSpec f = nested_ifs(in, "F", cfg);
    const IfsSpec g = nested_ifs(in, "G", cfg);
    if (!in.contains("sequence")) throw ConfigError("missing field sequence");
    const SymbolSequence sigma = sequence_from_json(in["sequence"], "sequence");
    const std::size_t n = cfg.n_max.value_or(get_count(in, "n", ""));
    const BridgeKind bridge = bridge_from(in);
    const double anchor = get_optional_number(in, "anchor", "").value_or(1.0);
    const std::size_t grid = cfg.grid.value_or(1001);
    const double tol = cfg.tolerance.value_or(1e-9);
    resolved["F"] = ifs_to_json(f);
    resolved["G"] = ifs_to_json(g);
    resolved["sequence"] = sequence_to_json(sigma);
    resolved["n"] = n;
    resolved["bridge"] = to_string(bridge);
    resolved["anchor"] = anchor;
    resolved["grid"] = grid;
    resolved["tolerance"] = tol;

    Outcome out;
    const IntervalTest test = same_interval_test(f.ifs, g.ifs);
    Json tags = Json::object();
    Json ft = Json::array();
    Json gt = Json::array();
    for (auto t : test.f_tags) ft.push_back(to_string(t));
    for (auto t : test.g_tags) gt.push_back(to_string(t));
    tags["F"] = ft;
    tags["G"] = gt;
    out.report["interval_tags"] = tags;
    if (!test.conjugable) {
        out.report["verdict"] = "obstructed";
        out.report["obstruction"] = to_string(test.obstruction);
        out.report["offending_pair"] = {test.offending_pair->first.to_string(),
                                        test.offending_pair->second.to_string()};
        out.exit_code = 2;
        return out;
    }
    const Homeomorphism1D h = weak_conjugacy_linear(f.ifs, g.ifs, sigma, n, anchor, bridge, f.radius);
    const ConjugacyReport rep = verify_weak_conjugacy(f.ifs, g.ifs, sigma, n, h, grid, tol, f.radius);
    out.report["k_star"] = effective_slope(f.ifs, sigma, n);
    out.report["m_star"] = effective_slope(g.ifs, sigma, n);
    out.report["verdict"] = rep.pass ? "pass" : "fail";
    out.report["homeomorphism"] = h.describe();
    out.report["verification"] = report_json(rep);
    out.csv = report_csv(rep);
    out.exit_code = rep.pass ? 0 : 1;
    return out;
}

Outcome cmd_verify(const Json& in, const RunConfig& cfg, Json& resolved) {
    if (in.is_object() && in.contains("F")) return weak_verification(in, cfg, resolved);
    return pair_conjugacy(in, cfg, resolved);
}

Outcome cmd_orbit(const Json& in, const RunConfig& cfg, Json& resolved) {
    check_fields(in, "", {"maps", "domain", "label", "sequence", "x0", "n"});
    const IfsSpec spec = ifs_with_radius(in, "", cfg);
    if (!in.contains("sequence")) throw ConfigError("missing field sequence");
    const SymbolSequence sigma = sequence_from_json(in["sequence"], "sequence");
    const double x0 = cfg.x0.value_or(get_optional_number(in, "x0", "").value_or(1.0));
    const std::size_t n = cfg.n_max.value_or(get_optional_count(in, "n", "").value_or(20));
    resolved["ifs"] = ifs_to_json(spec);
    resolved["sequence"] = sequence_to_json(sigma);
    resolved["x0"] = x0;
    resolved["n"] = n;

    Outcome out;
    Csv csv({"n", "symbol", "x"});
    Json orbit = Json::array();
    csv.row(0, 0, x0);
    orbit.push_back(x0);
    double x = x0;
    for (std::size_t i = 1; i <= n; ++i) {
        const int s = sigma.at(i);
        x = spec.ifs.map(s)(x);
        csv.row(i, s, x);
        orbit.push_back(number_json(x));
    }
    out.report["symbols"] = sigma.prefix(n);
    out.report["orbit"] = orbit;
    out.report["final"] = number_json(x);
    if (spec.ifs.all_linear()) out.report["effective_slope"] = number_json(effective_slope(spec.ifs, sigma, n));
    out.csv = csv.str();
    return out;
}

Outcome cmd_linearize(const Json& in, const RunConfig& cfg, Json& resolved) {
    check_fields(in, "", {"maps", "domain", "label", "koenigs"});
    const IfsSpec spec = ifs_with_radius(in, "", cfg);
    resolved["ifs"] = ifs_to_json(spec);
    const LinearPartResult lp = linear_part(spec.ifs);

    Outcome out;
    Json maps = Json::array();
    for (const auto& g : lp.linear_part.maps()) maps.push_back(map_to_json(g));
    Json tags = Json::array();
    for (auto t : lp.interval_tags) tags.push_back(to_string(t));
    out.report["linear_part"] = {{"maps", maps}};
    out.report["slopes"] = lp.slopes;
    out.report["interval_tags"] = tags;
    out.report["hg_case"] = to_string(lp.hg_case);

    Csv csv({"map", "slope", "interval", "koenigs_residual"});
    std::vector<double> residuals(spec.ifs.size(), std::numeric_limits<double>::quiet_NaN());
    if (in.contains("koenigs")) {
        check_fields(in["koenigs"], "koenigs", {"radius", "nodes", "n_max"});
        KoenigsOptions opt;
        opt.radius = get_optional_number(in["koenigs"], "radius", "koenigs").value_or(opt.radius);
        opt.nodes = cfg.grid.value_or(get_optional_count(in["koenigs"], "nodes", "koenigs").value_or(opt.nodes));
        opt.n_max = cfg.n_max.value_or(get_optional_count(in["koenigs"], "n_max", "koenigs").value_or(opt.n_max));
        resolved["koenigs"] = {{"radius", opt.radius}, {"nodes", opt.nodes}, {"n_max", opt.n_max}};
        Json kr = Json::array();
        for (std::size_t i = 0; i < spec.ifs.size(); ++i) {
            const ScalarMap& f = spec.ifs.maps()[i];
            const Homeomorphism1D h = koenigs_conjugacy(f, opt);
            const KoenigsResidual r = koenigs_residual(f, h, opt.radius, opt.nodes);
            residuals[i] = r.sup;
            kr.push_back({{"map", i + 1},
                          {"residual_sup", number_json(r.sup)},
                          {"worst_point", r.worst_point},
                          {"checked_points", r.checked},
                          {"pass", r.sup <= 1e-6}});
        }
        out.report["koenigs"] = kr;
    }
    for (std::size_t i = 0; i < spec.ifs.size(); ++i)
        csv.row(i + 1, lp.slopes[i], to_string(lp.interval_tags[i]), residuals[i]);
    out.csv = csv.str();
    return out;
}

Outcome cmd_classify(const Json& in, const RunConfig& cfg, Json& resolved) {
    check_fields(in, "", {"maps", "domain", "label", "sequence", "x0", "epsilon", "n_max", "margin"});
    const IfsSpec spec = ifs_with_radius(in, "", cfg);
    if (!in.contains("sequence")) throw ConfigError("missing field sequence");
    const SymbolSequence sigma = sequence_from_json(in["sequence"], "sequence");
    const double x0 = cfg.x0.value_or(get_optional_number(in, "x0", "").value_or(1.0));
    const double eps = cfg.epsilon.value_or(get_optional_number(in, "epsilon", "").value_or(0.0));
    const std::size_t n_max = cfg.n_max.value_or(get_optional_count(in, "n_max", "").value_or(400));
    const double margin = get_optional_number(in, "margin", "").value_or(0.01);
    resolved["ifs"] = ifs_to_json(spec);
    resolved["sequence"] = sequence_to_json(sigma);
    resolved["x0"] = x0;
    resolved["epsilon"] = eps;
    resolved["n_max"] = n_max;
    resolved["margin"] = margin;

    const SequenceFateReport rep = classify_sequence_fate(spec.ifs, sigma, n_max, x0, eps, margin);
    Outcome out;
    out.report["predicted_fate"] = to_string(rep.predicted_fate);
    out.report["lyapunov_sum"] = rep.lyapunov_sum;
    out.report["contracting_symbols"] = rep.contracting_symbols;
    out.report["expanding_symbols"] = rep.expanding_symbols;
    Csv csv({"n", "n1", "n2", "ratio", "orbit_F", "orbit_G", "bound"});
    Json ratios = Json::array();
    Json samples = Json::array();
    for (const auto& s : rep.trajectory) {
        csv.row(s.n, s.n1, s.n2, s.ratio, s.orbit_f, s.orbit_g, s.bound);
        ratios.push_back(number_json(s.ratio));
        samples.push_back({s.n, number_json(s.orbit_f)});
    }
    if (!rep.trajectory.empty()) {
        const auto& last = rep.trajectory.back();
        out.report["final"] = {{"n", last.n},
                               {"n1", last.n1},
                               {"n2", last.n2},
                               {"orbit_F", number_json(last.orbit_f)},
                               {"orbit_G", number_json(last.orbit_g)},
                               {"bound", number_json(last.bound)}};
    }
    out.report["n1_over_n2"] = ratios;
    out.report["orbit_samples"] = samples;
    out.csv = csv.str();
    return out;
}

Outcome cmd_multidim(const Json& in, const RunConfig& cfg, Json& resolved) {
    check_fields(in, "", {"dimension", "maps", "target_maps", "similarity", "sequence", "n", "bridge", "anchor",
                          "reading", "points", "domain"});
    const std::vector<DiagonalMap> maps = diagonal_maps_from_json(in.contains("maps") ? in["maps"] : Json(), "maps");
    const std::size_t m = common_dimension(maps);
    if (const auto d = get_optional_count(in, "dimension", ""); d && *d != m)
        throw ConfigError("dimension is " + std::to_string(*d) + " but the maps have dimension " + std::to_string(m));
    if (!in.contains("sequence")) throw ConfigError("missing field sequence");
    const SymbolSequence sigma = sequence_from_json(in["sequence"], "sequence");
    const std::size_t n = cfg.n_max.value_or(get_count(in, "n", ""));
    double radius = kDefaultRadius;
    if (in.contains("domain")) {
        check_fields(in["domain"], "domain", {"R"});
        radius = get_number(in["domain"], "R", "domain");
    }
    radius = cfg.radius.value_or(radius);
    resolved["dimension"] = m;
    resolved["maps"] = diagonal_maps_to_json(maps);
    resolved["sequence"] = sequence_to_json(sigma);
    resolved["n"] = n;
    resolved["radius"] = radius;
    resolved["seed"] = cfg.seed;

    if (!in.contains("target_maps") && !in.contains("similarity"))
        throw ConfigError("multidim needs target_maps, similarity, or both");

    Outcome out;
    Csv csv({"check", "index", "residual", "bound", "pass"});
    bool all_pass = true;
    if (in.contains("target_maps")) {
        const std::vector<DiagonalMap> targets = diagonal_maps_from_json(in["target_maps"], "target_maps");
        const BridgeKind bridge = bridge_from(in);
        const double anchor = get_optional_number(in, "anchor", "").value_or(1.0);
        const std::string reading_name = get_optional_string(in, "reading", "").value_or("global");
        HypothesisReading reading;
        if (reading_name == "global")
            reading = HypothesisReading::Global;
        else if (reading_name == "per-coordinate")
            reading = HypothesisReading::PerCoordinate;
        else
            throw ConfigError("reading must be \"global\" or \"per-coordinate\"");
        const std::size_t grid = cfg.grid.value_or(33);
        const double tol = cfg.tolerance.value_or(1e-8);
        resolved["target_maps"] = diagonal_maps_to_json(targets);
        resolved["bridge"] = to_string(bridge);
        resolved["anchor"] = anchor;
        resolved["reading"] = to_string(reading);
        resolved["grid"] = grid;
        resolved["tolerance"] = tol;
        const VectorHomeomorphism h = componentwise_conjugacy(maps, targets, sigma, n, bridge, reading, anchor, radius);
        const VectorConjugacyReport rep =
            verify_vector_conjugacy(maps, targets, sigma, n, h, tol, grid, radius, cfg.seed);
        out.report["componentwise"] = {{"homeomorphism", h.describe()},
                                       {"points", rep.points},
                                       {"full_grid", rep.full_grid},
                                       {"residual_sup", number_json(rep.residual_sup)},
                                       {"abs_residual_sup", number_json(rep.abs_residual_sup)},
                                       {"worst_point", rep.worst_point},
                                       {"tolerance", tol},
                                       {"pass", rep.pass}};
        csv.row("componentwise", 0, rep.residual_sup, tol, rep.pass ? 1 : 0);
        all_pass = all_pass && rep.pass;
    }
    if (in.contains("similarity")) {
        check_fields(in["similarity"], "similarity", {"A", "A_inverse"});
        const Eigen::MatrixXd a = matrix_from_json(in["similarity"].at("A"), "similarity.A");
        std::optional<Eigen::MatrixXd> a_inv;
        if (in["similarity"].contains("A_inverse"))
            a_inv = matrix_from_json(in["similarity"]["A_inverse"], "similarity.A_inverse");
        const SimilarityIfs s(maps, a, a_inv);
        resolved["similarity"] = {{"A", matrix_to_json(s.A())}, {"A_inverse", matrix_to_json(s.A_inverse())}};

        std::vector<Vector> points;
        if (in.contains("points")) {
            if (!in["points"].is_array()) throw ConfigError("points must be an array of vectors");
            for (std::size_t i = 0; i < in["points"].size(); ++i)
                points.push_back(vector_from_json(in["points"][i], "points[" + std::to_string(i) + "]"));
        } else {
            const std::size_t count = cfg.trials.value_or(1000);
            for (std::size_t p = 0; p < count; ++p) {
                Vector x(m);
                for (std::size_t i = 0; i < m; ++i) x[i] = radius * (2.0 * uniform_from(cfg.seed, p * m + i) - 1.0);
                points.push_back(std::move(x));
            }
        }
        resolved["points"] = points.size();
        double worst = 0.0;
        bool pass = true;
        std::optional<std::string> warning;
        for (std::size_t p = 0; p < points.size(); ++p) {
            const SimilarityReport rep = similarity_conjugacy(s, sigma, n, points[p]);
            worst = std::max(worst, rep.residual / rep.bound);
            pass = pass && rep.pass;
            warning = rep.warning;
            csv.row("similarity", p + 1, rep.residual, rep.bound, rep.pass ? 1 : 0);
        }
        Json sim = {{"points", points.size()},
                    {"max_residual_over_bound", worst},
                    {"condition_estimate", number_json(s.condition_estimate())},
                    {"pass", pass}};
        if (warning) sim["warning"] = *warning;
        out.report["similarity"] = sim;
        all_pass = all_pass && pass;
    }
    out.report["verdict"] = all_pass ? "pass" : "fail";
    out.csv = csv.str();
    out.exit_code = all_pass ? 0 : 1;
    return out;
}

Outcome cmd_distance(const Json& in, const RunConfig& cfg, Json& resolved) {
    check_fields(in, "", {"F", "G", "level", "mode"});
    const IfsSpec f = nested_ifs(in, "F", cfg);
    const IfsSpec g = nested_ifs(in, "G", cfg);
    const int level = cfg.level.value_or(static_cast<int>(get_optional_count(in, "level", "").value_or(1)));
    const std::string mode_name = get_optional_string(in, "mode", "").value_or("cross-pair");
    DistanceMode mode;
    if (mode_name == "cross-pair")
        mode = DistanceMode::CrossPair;
    else if (mode_name == "matched")
        mode = DistanceMode::Matched;
    else
        throw ConfigError("mode must be \"cross-pair\" or \"matched\"");
    const std::size_t grid = cfg.grid.value_or(kDefaultMetricGrid);
    resolved["F"] = ifs_to_json(f);
    resolved["G"] = ifs_to_json(g);
    resolved["level"] = level;
    resolved["mode"] = to_string(mode);
    resolved["grid"] = grid;

    const IfsDistanceReport rep = ifs_distance(f.ifs, g.ifs, level, mode, grid, f.radius);
    Outcome out;
    out.report["identical"] = rep.identical;
    out.report["d0"] = rep.d0;
    out.report["d1"] = rep.d1;
    out.report["value"] = rep.value;
    if (rep.argmax_pair)
        out.report["argmax_pair"] = {rep.argmax_pair->first, rep.argmax_pair->second};
    else
        out.report["argmax_pair"] = nullptr;
    out.report["excluded_points"] = rep.excluded_points;

    Csv csv({"i", "j", "rho0", "rho1", "excluded_points"});
    if (!rep.identical) {
        for (std::size_t i = 0; i < f.ifs.size(); ++i)
            for (std::size_t j = 0; j < g.ifs.size(); ++j) {
                if (mode == DistanceMode::Matched && i != j) continue;
                const MetricReport m = map_distance(f.ifs.maps()[i], g.ifs.maps()[j], grid, f.radius);
                csv.row(i + 1, j + 1, m.rho0, m.rho1, m.excluded_points);
            }
    }
    out.csv = csv.str();
    return out;
}

Outcome cmd_audit(const Json& in, const RunConfig& cfg, Json& resolved) {
    check_fields(in, "", {"maps", "domain", "label"});
    const IfsSpec spec = ifs_with_radius(in, "", cfg);
    const double tol = cfg.tolerance.value_or(1e-6);
    const std::size_t grid = cfg.grid.value_or(4096);
    resolved["ifs"] = ifs_to_json(spec);
    resolved["tolerance"] = tol;
    resolved["grid"] = grid;

    const HyperbolicityAudit audit = hyperbolicity_audit(spec.ifs, spec.radius, tol, grid);
    Outcome out;
    Json points = Json::array();
    Csv csv({"map", "fixed_point", "derivative", "margin", "verdict"});
    for (const auto& p : audit.fixed_points) {
        points.push_back({{"map", p.map_index},
                          {"point", p.point},
                          {"derivative", p.derivative},
                          {"margin", p.margin},
                          {"verdict", to_string(p.verdict)}});
        csv.row(p.map_index, p.point, p.derivative, p.margin, to_string(p.verdict));
    }
    out.report["fixed_points"] = points;
    out.report["satisfied"] = audit.satisfied;
    out.report["verdict"] = audit.satisfied ? "hyperbolic" : "non-hyperbolic";
    out.csv = csv.str();
    out.exit_code = audit.satisfied ? 0 : 2;
    return out;
}

Outcome cmd_probe(const Json& in, const RunConfig& cfg, Json& resolved) {
    check_fields(in, "", {"maps", "domain", "label", "delta", "trials"});
    const IfsSpec spec = ifs_with_radius(in, "", cfg);
    const double delta = cfg.delta.value_or(get_optional_number(in, "delta", "").value_or(0.01));
    const std::size_t trials = cfg.trials.value_or(get_optional_count(in, "trials", "").value_or(50));
    const std::size_t grid = cfg.grid.value_or(401);
    resolved["ifs"] = ifs_to_json(spec);
    resolved["delta"] = delta;
    resolved["trials"] = trials;
    resolved["seed"] = cfg.seed;
    resolved["grid"] = grid;

    const ProbeReport rep = perturbation_probe(spec.ifs, delta, trials, cfg.seed, spec.radius, grid);
    Outcome out;
    out.report["pass_fraction"] = rep.pass_fraction;
    out.report["attempts"] = rep.attempts;
    Json list = Json::array();
    Csv csv({"trial", "distance", "interval_ok", "n", "weak_residual", "identity_gap", "pass"});
    for (const auto& t : rep.trials) {
        list.push_back({{"trial", t.trial},
                        {"perturbed", ifs_to_json({t.perturbed, spec.radius})["maps"]},
                        {"distance", t.distance},
                        {"interval_ok", t.interval_ok},
                        {"n", t.n},
                        {"weak_residual", number_json(t.weak_residual)},
                        {"identity_gap", number_json(t.identity_gap)},
                        {"pass", t.pass}});
        csv.row(t.trial, t.distance, t.interval_ok ? 1 : 0, t.n, t.weak_residual, t.identity_gap, t.pass ? 1 : 0);
    }
    out.report["trials"] = list;
    out.csv = csv.str();
    return out;
}

Outcome cmd_attractor(const Json& in, const RunConfig& cfg, Json& resolved) {
    check_fields(in, "", {"maps", "diagonal_maps", "domain", "label", "x0", "iterations", "burn_in", "allow_affine"});
    ChaosGameOptions opt;
    opt.seed = cfg.seed;
    opt.iterations = cfg.n_max.value_or(get_optional_count(in, "iterations", "").value_or(opt.iterations));
    opt.burn_in = get_optional_count(in, "burn_in", "").value_or(opt.burn_in);
    opt.allow_affine = get_optional_bool(in, "allow_affine", "").value_or(false);
    resolved["iterations"] = opt.iterations;
    resolved["burn_in"] = opt.burn_in;
    resolved["seed"] = opt.seed;
    resolved["allow_affine"] = opt.allow_affine;

    AttractorSample sample;
    if (in.contains("diagonal_maps")) {
        if (in.contains("maps")) throw ConfigError("give either maps or diagonal_maps, not both");
        const auto maps = diagonal_maps_from_json(in["diagonal_maps"], "diagonal_maps");
        const std::size_t m = common_dimension(maps);
        Vector x0(m, 0.0);
        if (in.contains("x0")) x0 = vector_from_json(in["x0"], "x0");
        resolved["diagonal_maps"] = diagonal_maps_to_json(maps);
        resolved["x0"] = x0;
        sample = chaos_game(maps, x0, opt);
    } else {
        const IfsSpec spec = ifs_with_radius(in, "", cfg);
        opt.radius = spec.radius;
        const double x0 = cfg.x0.value_or(get_optional_number(in, "x0", "").value_or(0.0));
        resolved["ifs"] = ifs_to_json(spec);
        resolved["x0"] = x0;
        sample = chaos_game(spec.ifs, x0, opt);
    }

    Outcome out;
    out.report["dimension"] = sample.dimension;
    out.report["count"] = sample.size();
    Json points = Json::array();
    std::ostringstream csv;
    csv.precision(17);
    if (sample.dimension == 1) {
        csv << "x\n";
    } else {
        for (std::size_t i = 0; i < sample.dimension; ++i) csv << (i ? "," : "") << "x" << i + 1;
        csv << '\n';
    }
    for (std::size_t p = 0; p < sample.size(); ++p) {
        const auto pt = sample.point(p);
        if (sample.dimension == 1)
            points.push_back(pt[0]);
        else
            points.push_back(Vector(pt.begin(), pt.end()));
        for (std::size_t i = 0; i < pt.size(); ++i) csv << (i ? "," : "") << pt[i];
        csv << '\n';
    }
    out.report["points"] = points;
    out.csv = csv.str();
    return out;
}

Outcome dispatch(const std::string& command, const Json& in, const RunConfig& cfg, Json& resolved) {
    if (command == "conjugacy") return pair_conjugacy(in, cfg, resolved);
    if (command == "verify") return cmd_verify(in, cfg, resolved);
    if (command == "orbit") return cmd_orbit(in, cfg, resolved);
    if (command == "linearize") return cmd_linearize(in, cfg, resolved);
    if (command == "classify") return cmd_classify(in, cfg, resolved);
    if (command == "multidim") return cmd_multidim(in, cfg, resolved);
    if (command == "distance") return cmd_distance(in, cfg, resolved);
    if (command == "audit") return cmd_audit(in, cfg, resolved);
    if (command == "probe") return cmd_probe(in, cfg, resolved);
    if (command == "attractor") return cmd_attractor(in, cfg, resolved);
    throw ConfigError("unknown command " + command);
}

void write_atomically(const std::string& path, const std::string& text) {
    const std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write output file " + path);
        out << text;
        out.flush();
        if (!out) throw ConfigError("failed writing output file " + path);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw ConfigError("cannot move report into place at " + path + ": " + ec.message());
    }
}

Json base_config(const RunConfig& cfg) {
    Json j;
    j["command"] = cfg.command;
    j["input"] = cfg.input_path;
    j["format"] = cfg.format;
    j["seed"] = cfg.seed;
    return j;
}

}  // namespace

RunResult run(const RunConfig& cfg) {
    RunResult result;
    Json resolved = base_config(cfg);
    Outcome outcome;
    try {
        if (std::find(kCommands.begin(), kCommands.end(), cfg.command) == kCommands.end())
            throw ConfigError("unknown command " + cfg.command);
        if (cfg.format != "json" && cfg.format != "csv") throw ConfigError("--format must be json or csv");
        const Json in = read_json_file(cfg.input_path);
        try {
            outcome = dispatch(cfg.command, in, cfg, resolved);
        } catch (const ObstructionError& e) {
            outcome.report["verdict"] = "obstructed";
            outcome.report["error"] = e.what();
            outcome.exit_code = 2;
            result.error = e.what();
        }
        Json report;
        report["version"] = kVersion;
        report["command"] = cfg.command;
        report["config"] = resolved;
        for (auto& [k, v] : outcome.report.items()) report[k] = v;
        result.output = cfg.format == "json" ? report.dump(2) + "\n" : outcome.csv;
        if (!cfg.output_path.empty()) write_atomically(cfg.output_path, result.output);
        result.exit_code = outcome.exit_code;
        if (result.exit_code == 2 && result.error.empty()) {
            result.error = outcome.report.value("verdict", std::string("obstructed"));
            if (outcome.report.contains("obstruction"))
                result.error += " (" + outcome.report["obstruction"].get<std::string>() + ")";
        }
        if (result.exit_code == 1 && result.error.empty()) result.error = "verification failed";
    } catch (const std::exception& e) {
        result.exit_code = 1;
        result.output.clear();
        result.error = e.what();
    }
    return result;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Construct and verify topological conjugacies of iterated function systems."};
    app.footer(
        "CSV columns:\n"
        "  conjugacy, verify  x,h_x,residual\n"
        "  orbit              n,symbol,x\n"
        "  linearize          map,slope,interval,koenigs_residual\n"
        "  classify           n,n1,n2,ratio,orbit_F,orbit_G,bound\n"
        "  multidim           check,index,residual,bound,pass\n"
        "  distance           i,j,rho0,rho1,excluded_points\n"
        "  audit              map,fixed_point,derivative,margin,verdict\n"
        "  probe              trial,distance,interval_ok,n,weak_residual,identity_gap,pass\n"
        "  attractor          x  (or x1,...,xm)\n"
        "Exit status: 0 success, 2 mathematical obstruction, 1 usage or numeric error.\n"
        "IFS_CONJ_THREADS caps the number of worker threads.");
    RunConfig cfg;
    app.add_option("command", cfg.command, "Subcommand")->required()->check(CLI::IsMember(kCommands));
    app.add_option("-i,--input", cfg.input_path, "Input JSON file")->required();
    app.add_option("-o,--output", cfg.output_path, "Report file (default: standard output)");
    app.add_option("--format", cfg.format, "Report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    app.add_option("--grid", cfg.grid, "Grid size (default per command: 1001 verify, 2001 distance, 4096 audit, 33 per axis multidim)");
    app.add_option("--tolerance", cfg.tolerance, "Residual tolerance (default 1e-9; 1e-8 multidim; 1e-6 audit)");
    app.add_option("--radius", cfg.radius, "Working interval radius R (default 10)");
    app.add_option("--n-max", cfg.n_max, "Sequence length n (classify default 400, orbit 20; attractor iterations)");
    app.add_option("--level", cfg.level, "Distance level 0 or 1 (default 1)")->check(CLI::IsMember({0, 1}));
    app.add_option("--delta", cfg.delta, "Probe radius delta (default 0.01)");
    app.add_option("--trials", cfg.trials, "Probe trials (default 50); random points for similarity (default 1000)");
    app.add_option("--x0", cfg.x0, "Start point (default 1 for orbit and classify, 0 for attractor)");
    app.add_option("--epsilon", cfg.epsilon, "Lipschitz margin epsilon for classify (default 0)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n";
        return 1;
    }
    const RunResult result = run(cfg);
    if (cfg.output_path.empty()) out << result.output;
    if (result.exit_code != 0) err << (result.exit_code == 2 ? "obstruction: " : "error: ") << result.error << "\n";
    return result.exit_code;
}

}  // namespace ifsconj
