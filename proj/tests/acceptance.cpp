// Acceptance gate: one line per criterion, nonzero exit when any fails.

#include "ifsconj/attractor.hpp"
#include "ifsconj/config.hpp"
#include "ifsconj/conjugacy1d.hpp"
#include "ifsconj/errors.hpp"
#include "ifsconj/linearization.hpp"
#include "ifsconj/multidim.hpp"
#include "ifsconj/stability.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace ifsconj;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> body;
};

std::string num(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

IfsDescriptor linear_ifs(std::vector<double> slopes) {
    std::vector<ScalarMap> maps;
    for (double k : slopes) maps.push_back(ScalarMap::linear(k));
    return IfsDescriptor(std::move(maps));
}

struct Pair {
    double k;
    double m;
};

std::vector<Pair> contracting_pairs() {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    std::vector<Pair> out;
    for (int i = 0; i < 25; ++i) out.push_back({u(rng), u(rng)});
    return out;
}

Outcome power_law_oracle() {
    Outcome o;
    double worst = 0.0;
    const std::vector<double> grid = Interval::symmetric(10.0).grid(1000);
    for (const auto& [k, m] : contracting_pairs()) {
        const Homeomorphism1D h = build_linear_conjugacy(k, m, 1.0, BridgeKind::PowerLaw);
        const double alpha = std::log(m) / std::log(k);
        for (double x : grid) {
            if (std::abs(x) < 1e-6) continue;
            const double expected = std::copysign(std::pow(std::abs(x), alpha), x);
            worst = std::max(worst, std::abs(h(x) - expected) / std::abs(expected));
        }
    }
    o.pass = worst <= 1e-9;
    o.detail = "max relative error " + num(worst);
    return o;
}

Outcome functional_equation() {
    std::vector<Pair> pairs = contracting_pairs();
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> e(1.05, 20.0);
    std::uniform_real_distribution<double> c(0.05, 0.95);
    for (int i = 0; i < 10; ++i) pairs.push_back({e(rng), e(rng)});
    for (int i = 0; i < 10; ++i) {
        // negative pairs from both the contracting and the expanding side
        if (i % 2 == 0)
            pairs.push_back({-c(rng), -c(rng)});
        else
            pairs.push_back({-e(rng), -e(rng)});
    }
    double worst = 0.0;
    std::size_t runs = 0;
    for (const auto& [k, m] : pairs)
        for (BridgeKind b : {BridgeKind::LinearInterpolation, BridgeKind::PowerLaw}) {
            const Homeomorphism1D h = build_linear_conjugacy(k, m, 1.0, b);
            const ConjugacyReport r = verify_conjugacy(ScalarMap::linear(k), ScalarMap::linear(m), h, 1000, 1e-8);
            worst = std::max(worst, r.residual_sup);
            ++runs;
        }
    return {worst <= 1e-8, std::to_string(runs) + " runs, max residual " + num(worst)};
}

Outcome weak_conjugacy() {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> c(0.05, 0.95);
    std::uniform_real_distribution<double> e(1.05, 20.0);
    double worst = 0.0;
    std::size_t runs = 0;
    for (int cls = 0; cls < 4; ++cls)
        for (int t = 0; t < 20; ++t) {
            auto draw = [&] {
                const double mag = cls < 2 ? c(rng) : e(rng);
                return cls % 2 == 0 ? mag : -mag;
            };
            const IfsDescriptor f = linear_ifs({draw(), draw()});
            const IfsDescriptor g = linear_ifs({draw(), draw()});
            const SymbolSequence sigma = SymbolSequence::bernoulli(0.5, static_cast<std::uint64_t>(1000 * cls + t));
            for (std::size_t n : {1u, 5u, 20u}) {
                const Homeomorphism1D h = weak_conjugacy_linear(f, g, sigma, n);
                const ConjugacyReport r = verify_weak_conjugacy(f, g, sigma, n, h, 1000, 1e-8);
                worst = std::max(worst, r.residual_sup);
                ++runs;
            }
        }
    return {worst <= 1e-8, std::to_string(runs) + " runs, max residual " + num(worst)};
}

Outcome obstructions() {
    struct Case {
        double k;
        double m;
        Obstruction expected;
    };
    const std::vector<Case> cases{{2.0, 0.5, Obstruction::AttractRepelMismatch},
                                  {3.0, -3.0, Obstruction::OrientationMismatch},
                                  {-4.0, -0.25, Obstruction::AttractRepelMismatch},
                                  {0.2, -0.2, Obstruction::OrientationMismatch}};
    std::vector<Homeomorphism1D> candidates;
    for (double a : {0.25, 0.5, 1.0, 2.0, 4.0}) candidates.push_back(Homeomorphism1D::power_law(a));
    candidates.push_back(build_linear_conjugacy(0.5, 0.25));
    candidates.push_back(build_linear_conjugacy(3.0, 1.5, 1.0, BridgeKind::PowerLaw));
    bool ok = true;
    double least = std::numeric_limits<double>::infinity();
    for (const auto& c : cases) {
        const IntervalTest t = same_interval_test(linear_ifs({c.k}), linear_ifs({c.m}));
        if (t.conjugable || t.obstruction != c.expected) ok = false;
        for (const auto& h : candidates) {
            const ConjugacyReport r = verify_conjugacy(ScalarMap::linear(c.k), ScalarMap::linear(c.m), h, 1001, 1e-9);
            if (r.pass) ok = false;
            least = std::min(least, r.residual_sup);
        }
    }
    return {ok && least > 0.1, "4 pairs obstructed as expected; least candidate residual " + num(least)};
}

Outcome decay_bound() {
    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> k(0.02, 0.9);
    std::uniform_real_distribution<double> share(0.0, 0.99);
    std::uniform_real_distribution<double> x(-10.0, 10.0);
    std::uniform_int_distribution<std::size_t> n(1, 30);
    std::size_t violations = 0;
    for (int t = 0; t < 10000; ++t) {
        const double sign = t % 2 == 0 ? 1.0 : -1.0;
        std::vector<ScalarMap> maps;
        for (int i = 0; i < 3; ++i) {
            const double ki = k(rng);
            const double eps = share(rng) * (1.0 - ki);
            maps.push_back(ScalarMap::perturbed(sign * ki, i % 2 == 0 ? Perturbation::sine(eps) : Perturbation::rational(eps)));
        }
        const SymbolSequence sigma = SymbolSequence::bernoulli(0.5, static_cast<std::uint64_t>(t));
        if (!decay_bound_check(IfsDescriptor(maps), sigma, n(rng), x(rng)).holds) ++violations;
    }
    return {violations == 0, "10000 samples, " + std::to_string(violations) + " violations"};
}

Outcome koenigs() {
    const std::vector<ScalarMap> catalog{
        ScalarMap::rational_bump(0.5, 0.1),      ScalarMap::rational_bump(0.3, 0.2),
        ScalarMap::rational_bump(0.7, 0.2),      ScalarMap::rational_bump(-0.5, 0.1),
        ScalarMap::perturbed(0.5, Perturbation::sine(0.2)),
        ScalarMap::perturbed(0.3, Perturbation::sine(0.1)),
        ScalarMap::perturbed(-0.4, Perturbation::rational(0.3)),
        ScalarMap::perturbed(0.6, Perturbation::rational(-0.2)),
        ScalarMap::perturbed(0.2, Perturbation::sine(0.5)),
        ScalarMap::perturbed(-0.6, Perturbation::sine(0.1)),
    };
    double worst = 0.0;
    bool shape_ok = true;
    for (const auto& f : catalog) {
        const Homeomorphism1D h = koenigs_conjugacy(f);
        worst = std::max(worst, koenigs_residual(f, h, 0.5, 2048).sup);
        if (h(0.0) != 0.0) shape_ok = false;
        double prev = -std::numeric_limits<double>::infinity();
        for (double x : Interval::symmetric(0.5).grid(2048)) {
            const double v = h(x);
            if (!(v > prev)) shape_ok = false;
            prev = v;
        }
    }
    return {shape_ok && worst <= 1e-6,
            "10 maps, max residual " + num(worst) + (shape_ok ? ", monotone, h(0)=0" : ", shape check failed")};
}

Outcome sequence_fate() {
    const IfsDescriptor f = linear_ifs({0.5, 2.0});
    const SequenceFateReport conv = classify_sequence_fate(f, SymbolSequence::sparse(2), 400, 1.0, 0.01);
    const SequenceFateReport div = classify_sequence_fate(f, SymbolSequence::sparse(1), 400, 1.0, 0.01);
    const double gc = conv.trajectory.back().orbit_g;
    const double gd = div.trajectory.back().orbit_g;
    const bool ok = conv.predicted_fate == Fate::ConvergesToZero && gc < 1e-50 && div.predicted_fate == Fate::Diverges &&
                    gd > 1e50;
    return {ok, "|G(1)| = " + num(gc) + " (" + to_string(conv.predicted_fate) + "), swapped " + num(gd) + " (" +
                    to_string(div.predicted_fate) + ")"};
}

Outcome multidim() {
    std::mt19937_64 rng(808);
    std::uniform_real_distribution<double> c(0.1, 0.9);
    std::uniform_real_distribution<double> e(1.1, 4.0);
    double worst_cw = 0.0;
    std::size_t cw_runs = 0;
    for (std::size_t m : {2u, 3u})
        for (std::size_t n : {1u, 2u, 5u, 10u})
            for (int cls = 0; cls < 4; ++cls) {
                auto family = [&] {
                    std::vector<DiagonalMap> out;
                    for (int j = 0; j < 2; ++j) {
                        std::vector<double> d(m);
                        for (auto& v : d) {
                            const double mag = cls < 2 ? c(rng) : e(rng);
                            v = cls % 2 == 0 ? mag : -mag;
                        }
                        out.emplace_back(std::move(d));
                    }
                    return out;
                };
                const auto f = family();
                const auto g = family();
                const SymbolSequence sigma = SymbolSequence::bernoulli(0.5, 17 * n + m + 100 * static_cast<std::size_t>(cls));
                const VectorHomeomorphism h = componentwise_conjugacy(f, g, sigma, n);
                const VectorConjugacyReport r = verify_vector_conjugacy(f, g, sigma, n, h, 1e-8);
                if (!r.full_grid) return {false, "componentwise check did not use the full grid"};
                worst_cw = std::max(worst_cw, r.residual_sup);
                ++cw_runs;
            }

    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> d(0.1, 0.95);
    double worst_ratio = 0.0;
    int matrices = 0;
    while (matrices < 20) {
        const int m = 2 + matrices % 3;
        Eigen::MatrixXd a(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) a(i, j) = u(rng);
        a += 1.5 * Eigen::MatrixXd::Identity(m, m);
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
        if (svd.singularValues()(0) / svd.singularValues()(m - 1) > 100.0) continue;
        std::vector<DiagonalMap> base;
        for (int j = 0; j < 3; ++j) {
            std::vector<double> diag(static_cast<std::size_t>(m));
            for (auto& v : diag) v = u(rng) < 0 ? -d(rng) : d(rng);
            base.emplace_back(std::move(diag));
        }
        const SimilarityIfs s(std::move(base), a);
        for (int t = 0; t < 50; ++t) {
            std::vector<double> x(static_cast<std::size_t>(m));
            double norm = 0.0;
            for (auto& v : x) {
                v = 10.0 * u(rng);
                norm = std::max(norm, std::abs(v));
            }
            const std::size_t n = 1 + static_cast<std::size_t>(t % 20);
            const SimilarityReport r =
                similarity_conjugacy(s, SymbolSequence::bernoulli(0.4, static_cast<std::uint64_t>(t + 50 * matrices)), n, x);
            worst_ratio = std::max(worst_ratio, r.residual / (1e-10 * (1.0 + norm)));
        }
        ++matrices;
    }
    return {worst_cw <= 1e-8 && worst_ratio <= 1.0,
            std::to_string(cw_runs) + " componentwise runs, max residual " + num(worst_cw) +
                "; 1000 similarity points, max residual/bound " + num(worst_ratio)};
}

Outcome metrics() {
    std::mt19937_64 rng(909);
    std::uniform_real_distribution<double> k(0.2, 0.8);
    std::uniform_real_distribution<double> c(0.0, 0.1);
    auto draw = [&] {
        switch (rng() % 3) {
            case 0: return ScalarMap::linear(k(rng));
            case 1: return ScalarMap::perturbed(k(rng), Perturbation::sine(c(rng)));
            default: return ScalarMap::perturbed(-k(rng), Perturbation::rational(c(rng)));
        }
    };
    bool ok = true;
    double asym = 0.0;
    for (int t = 0; t < 50; ++t) {
        const ScalarMap f = draw();
        const ScalarMap g = draw();
        const MetricReport self = map_distance(f, f, 401);
        if (self.rho0 != 0.0 || self.rho1 != 0.0) ok = false;
        const IfsDescriptor a(std::vector<ScalarMap>{f, draw()});
        const IfsDescriptor b(std::vector<ScalarMap>{g});
        if (ifs_distance(a, a, 1).value != 0.0) ok = false;
        for (int level : {0, 1}) {
            const double ab = ifs_distance(a, b, level, DistanceMode::CrossPair, 401).value;
            const double ba = ifs_distance(b, a, level, DistanceMode::CrossPair, 401).value;
            asym = std::max(asym, std::abs(ab - ba));
        }
        const MetricReport fg = map_distance(f, g, 401);
        if (fg.rho1 < fg.rho0) ok = false;
    }
    const MetricReport ref = map_distance(ScalarMap::linear(0.5), ScalarMap::linear(0.6));
    const double e0 = std::abs(ref.rho0 - 10.0 / 3.0);
    const double e1 = std::abs(ref.rho1 - (10.0 / 3.0 + 0.1));
    return {ok && asym <= 1e-12 && e0 <= 1e-9 && e1 <= 1e-9,
            "max asymmetry " + num(asym) + ", reference errors " + num(e0) + " / " + num(e1)};
}

Outcome audit() {
    const IfsSpec slope_one = ifs_from_json(read_json_file(IFSCONJ_FIXTURES "/audit_slope_one.json"), "");
    const HyperbolicityAudit flagged = hyperbolicity_audit(slope_one.ifs, slope_one.radius);
    bool flagged_ok = !flagged.satisfied;
    for (const auto& p : flagged.fixed_points)
        if (std::abs(p.point) < 1e-9 && p.verdict != Verdict::NonHyperbolic) flagged_ok = false;
    const HyperbolicityAudit half = hyperbolicity_audit(linear_ifs({0.5}));
    const bool half_ok = half.fixed_points.size() == 1 && std::abs(half.fixed_points[0].margin - 0.5) <= 1e-12;
    const ProbeReport probe = perturbation_probe(linear_ifs({0.5, 0.25}), 0.01, 50, 0);
    return {flagged_ok && half_ok && probe.pass_fraction == 1.0,
            std::string("slope-1 ") + (flagged_ok ? "flagged" : "missed") + ", {0.5x} fixed points " +
                std::to_string(half.fixed_points.size()) + ", probe pass fraction " + num(probe.pass_fraction)};
}

Outcome attractor() {
    const Json j = read_json_file(IFSCONJ_FIXTURES "/cantor.json");
    const IfsSpec spec = ifs_from_json(j, "");
    ChaosGameOptions opt;
    opt.iterations = 100000;
    opt.burn_in = j.value("burn_in", std::size_t{100});
    opt.allow_affine = true;
    opt.seed = 2024;
    const AttractorSample a = chaos_game(spec.ifs, 0.0, opt);
    const AttractorSample b = chaos_game(spec.ifs, 0.0, opt);
    std::size_t middle = 0;
    for (double x : a.points)
        if (x > 1.0 / 3.0 + 1e-9 && x < 2.0 / 3.0 - 1e-9) ++middle;
    const bool same = a.points.size() == b.points.size() &&
                      std::memcmp(a.points.data(), b.points.data(), a.points.size() * sizeof(double)) == 0;
    return {middle == 0 && same && a.size() == opt.iterations - opt.burn_in,
            std::to_string(a.size()) + " points, " + std::to_string(middle) + " in the middle third, " +
                (same ? "byte-identical rerun" : "rerun differs")};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "power-law oracle equivalence", 5, power_law_oracle},
        {2, "conjugacy functional equation", 10, functional_equation},
        {3, "weak conjugacy", 30, weak_conjugacy},
        {4, "non-conjugacy obstructions", 1, obstructions},
        {5, "decay bound", 20, decay_bound},
        {6, "Koenigs linearization", 10, koenigs},
        {7, "sequence fate", 1, sequence_fate},
        {8, "multidimensional conjugacy", 20, multidim},
        {9, "metrics", 5, metrics},
        {10, "hyperbolicity audit", 10, audit},
        {11, "attractor sanity", 5, attractor},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = seconds < c.limit_seconds;
        const bool pass = o.pass && in_time;
        if (!pass) ++failures;
        std::printf("C%-2d %s  %-30s %6.2fs (limit %gs)  %s%s\n", c.id, pass ? "PASS" : "FAIL", c.name, seconds,
                    c.limit_seconds, o.detail.c_str(), in_time ? "" : "  [over time limit]");
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
