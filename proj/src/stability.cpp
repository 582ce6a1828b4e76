#include "ifsconj/stability.hpp"

#include "ifsconj/conjugacy1d.hpp"
#include "ifsconj/errors.hpp"
#include "ifsconj/linearization.hpp"
#include "ifsconj/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace ifsconj {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

void require_monotone(const ScalarMap& f, const std::vector<double>& xs, const char* which) {
    int direction = 0;
    double prev = f(xs.front());
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const double cur = f(xs[i]);
        const int d = cur > prev ? 1 : (cur < prev ? -1 : 0);
        if (d == 0 || (direction != 0 && d != direction))
            throw InvertibilityError(std::string(which) + " map " + f.describe() +
                                     " is not strictly monotone near x = " + fmt(xs[i]));
        direction = d;
        prev = cur;
    }
}

struct PointGap {
    double forward = 0.0;
    double inverse = 0.0;
    double derivative = 0.0;
    bool excluded = false;
};

double bisect_root(const ScalarMap& f, double lo, double hi) {
    double vlo = f(lo) - lo;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        const double vmid = f(mid) - mid;
        if (vmid == 0.0) return mid;
        if ((vmid < 0.0) == (vlo < 0.0)) {
            lo = mid;
            vlo = vmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

ScalarMap jitter(const ScalarMap& f, double dk, double dc) {
    switch (f.kind()) {
        case ScalarMap::Kind::Linear: return ScalarMap::perturbed(f.slope() + dk, Perturbation::sine(dc), f.domain());
        case ScalarMap::Kind::LinearPlusLipschitz: {
            const Perturbation p = std::get<PerturbedLinearForm>(f.form()).perturbation;
            const double c = p.amplitude + dc;
            const double eps = std::max(p.declared_lipschitz, std::abs(c));
            return ScalarMap::perturbed(f.slope() + dk,
                                        p.shape == PerturbationShape::Sine ? Perturbation::sine(c, eps)
                                                                           : Perturbation::rational(c, eps),
                                        f.domain());
        }
        case ScalarMap::Kind::SmoothCatalog: {
            const auto& r = std::get<RationalBumpForm>(f.form());
            return ScalarMap::rational_bump(r.k + dk, r.c + dc, f.domain());
        }
        case ScalarMap::Kind::Affine: break;
    }
    throw UnsupportedMapError("the perturbation probe does not accept affine maps");
}

}  // namespace

MetricReport map_distance(const ScalarMap& f, const ScalarMap& g, std::size_t grid_size, double radius) {
    const Interval interval = Interval::symmetric(radius);
    const std::vector<double> xs = interval.grid(grid_size);
    require_monotone(f, xs, "first");
    require_monotone(g, xs, "second");

    std::vector<PointGap> gaps(xs.size());
    parallel_for(xs.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double x = xs[i];
            PointGap& p = gaps[i];
            p.forward = std::abs(f(x) - g(x));
            p.derivative = std::abs(f.derivative(x) - g.derivative(x));
            const auto fi = inverse_image(f, x, radius);
            const auto gi = inverse_image(g, x, radius);
            if (fi && gi)
                p.inverse = std::abs(*fi - *gi);
            else
                p.excluded = true;
        }
    });

    MetricReport report;
    report.grid_size = grid_size;
    report.working_interval = interval;
    double dmax = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = std::max(gaps[i].forward, gaps[i].inverse);
        if (r > report.rho0) {
            report.rho0 = r;
            report.argmax_rho0 = xs[i];
        }
        dmax = std::max(dmax, gaps[i].derivative);
        if (gaps[i].excluded) ++report.excluded_points;
    }
    report.rho1 = report.rho0 + dmax;
    return report;
}

std::string to_string(DistanceMode mode) { return mode == DistanceMode::CrossPair ? "cross-pair" : "matched"; }

IfsDistanceReport ifs_distance(const IfsDescriptor& f, const IfsDescriptor& g, int level, DistanceMode mode,
                               std::size_t grid_size, double radius) {
    if (level != 0 && level != 1) throw std::invalid_argument("distance level must be 0 or 1");
    IfsDistanceReport report;
    report.level = level;
    if (f == g) {
        report.identical = true;
        return report;
    }
    if (mode == DistanceMode::Matched && f.size() != g.size())
        throw ShapeError("matched distance needs the same number of maps (" + std::to_string(f.size()) + " vs " +
                         std::to_string(g.size()) + ")");

    double best = -1.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        for (std::size_t j = 0; j < g.size(); ++j) {
            if (mode == DistanceMode::Matched && i != j) continue;
            const MetricReport m = map_distance(f.maps()[i], g.maps()[j], grid_size, radius);
            report.d0 = std::max(report.d0, m.rho0);
            report.d1 = std::max(report.d1, m.rho1);
            report.excluded_points += m.excluded_points;
            const double v = level == 0 ? m.rho0 : m.rho1;
            if (v > best) {
                best = v;
                report.argmax_pair = std::make_pair(i + 1, j + 1);
            }
        }
    }
    report.value = level == 0 ? report.d0 : report.d1;
    return report;
}

std::string to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::Hyperbolic: return "hyperbolic";
        case Verdict::Borderline: return "borderline";
        case Verdict::NonHyperbolic: return "non-hyperbolic";
    }
    return "non-hyperbolic";
}

HyperbolicityAudit hyperbolicity_audit(const IfsDescriptor& ifs, double radius, double tolerance,
                                       std::size_t grid_size) {
    HyperbolicityAudit audit;
    audit.tolerance = tolerance;
    audit.grid_size = grid_size;
    audit.radius = radius;
    const std::vector<double> xs = Interval::symmetric(radius).grid(grid_size);
    constexpr double kZero = 1e-12;

    for (std::size_t m = 0; m < ifs.size(); ++m) {
        const ScalarMap& f = ifs.maps()[m];
        std::vector<double> v(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) v[i] = f(xs[i]) - xs[i];

        std::vector<double> roots;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const bool zero_here = std::abs(v[i]) <= kZero;
            if (zero_here) {
                if (i + 1 < xs.size() && std::abs(v[i + 1]) <= kZero)
                    throw ContinuumOfFixedPointsError("map " + std::to_string(m + 1) + " (" + f.describe() +
                                                      ") fixes every point near x = " + fmt(xs[i]));
                roots.push_back(xs[i]);
                continue;
            }
            if (i + 1 < xs.size() && std::abs(v[i + 1]) > kZero && (v[i] < 0.0) != (v[i + 1] < 0.0))
                roots.push_back(bisect_root(f, xs[i], xs[i + 1]));
        }

        for (double p : roots) {
            FixedPoint fp;
            fp.map_index = m + 1;
            fp.point = p;
            fp.derivative = f.derivative(p);
            fp.margin = std::abs(std::abs(fp.derivative) - 1.0);
            if (fp.margin <= tolerance)
                fp.verdict = Verdict::NonHyperbolic;
            else if (fp.margin <= audit.borderline_band)
                fp.verdict = Verdict::Borderline;
            if (fp.verdict == Verdict::NonHyperbolic) audit.satisfied = false;
            audit.fixed_points.push_back(fp);
        }
    }
    return audit;
}

ProbeReport perturbation_probe(const IfsDescriptor& f, double delta, std::size_t trials, std::uint64_t seed,
                               double radius, std::size_t grid_size) {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    const HyperbolicityAudit audit = hyperbolicity_audit(f, radius);
    if (!audit.satisfied) throw HypothesisError("the IFS has a non-hyperbolic fixed point; the probe needs hyperbolicity");
    const LinearPartResult base = linear_part(f);

    ProbeReport report;
    report.delta = delta;
    report.seed = seed;
    if (trials == 0) return report;

    const std::size_t budget = 100 * trials;
    const std::vector<double> xs = Interval::symmetric(radius).grid(grid_size);
    std::size_t passed = 0;

    for (std::size_t t = 0; t < trials; ++t) {
        std::mt19937_64 rng(mix64(seed ^ mix64(t + 1)));
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        double scale = delta;
        std::optional<IfsDescriptor> g;
        double distance = 0.0;
        while (!g) {
            if (++report.attempts > budget)
                throw GenerationError("no admissible perturbation within delta = " + fmt(delta) + " after " +
                                      std::to_string(budget) + " attempts");
            std::vector<ScalarMap> maps;
            for (const auto& m : f.maps()) maps.push_back(jitter(m, scale * unit(rng), 0.5 * scale * unit(rng)));
            IfsDescriptor candidate(std::move(maps), "perturbed");
            try {
                distance = ifs_distance(f, candidate, 1, DistanceMode::Matched, grid_size, radius).value;
            } catch (const InvertibilityError&) {
                distance = std::numeric_limits<double>::infinity();
            }
            if (distance < delta)
                g = std::move(candidate);
            else
                scale *= 0.5;
        }

        std::uniform_int_distribution<int> symbol(1, static_cast<int>(f.size()));
        const std::size_t n = 1 + static_cast<std::size_t>(rng() % 10);
        std::vector<int> word(n);
        for (int& s : word) s = symbol(rng);
        const SymbolSequence sigma = SymbolSequence::explicit_symbols(word, static_cast<int>(f.size()));

        ProbeTrial trial{.trial = t + 1, .perturbed = *g, .distance = distance, .n = n};
        trial.weak_residual = std::numeric_limits<double>::infinity();
        trial.identity_gap = std::numeric_limits<double>::infinity();
        try {
            trial.interval_ok = same_interval_test(f, *g).conjugable;
        } catch (const NonHyperbolicError&) {
            trial.interval_ok = false;
        }
        if (trial.interval_ok) {
            try {
                const LinearPartResult lg = linear_part(*g);
                const Homeomorphism1D h =
                    weak_conjugacy_linear(base.linear_part, lg.linear_part, sigma, n, 1.0,
                                          BridgeKind::LinearInterpolation, radius);
                const ConjugacyReport rep =
                    verify_weak_conjugacy(base.linear_part, lg.linear_part, sigma, n, h, grid_size, 1e-8, radius);
                trial.weak_residual = rep.residual_sup;
                double gap = 0.0;
                for (double x : xs) gap = std::max(gap, std::abs(h(x) - x));
                trial.identity_gap = gap;
                trial.pass = rep.pass;
            } catch (const Error&) {
                trial.pass = false;
            }
        }
        if (trial.pass) ++passed;
        report.trials.push_back(std::move(trial));
    }
    report.pass_fraction = static_cast<double>(passed) / static_cast<double>(trials);
    return report;
}

}  // namespace ifsconj
