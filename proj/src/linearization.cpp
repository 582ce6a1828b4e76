#include "ifsconj/linearization.hpp"

#include "ifsconj/errors.hpp"
#include "ifsconj/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ifsconj {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

struct KoenigsNode {
    double value = 0.0;
    double last_step = 0.0;
};

// lambda^-n f^n(x) for a contracting step map g with multiplier mu.
template <class Step>
KoenigsNode koenigs_limit(const Step& g, double mu, double x, std::size_t n_max) {
    if (x == 0.0) return {0.0, 0.0};
    double y = x;
    double p = 1.0;
    double s = x;
    double diff = std::numeric_limits<double>::infinity();
    for (std::size_t n = 1; n <= n_max; ++n) {
        y = g(y);
        p *= mu;
        if (!std::isfinite(y)) throw ConvergenceFailureError("orbit became non-finite from x = " + fmt(x), diff);
        const double next = y / p;
        diff = std::abs(next - s);
        s = next;
        if (diff <= 1e-14 * std::max(std::abs(s), 1e-300)) break;
        if (std::abs(p) < 1e-280 || y == 0.0) break;
    }
    return {s, diff};
}

}  // namespace

std::string to_string(LinearizationCase c) {
    switch (c) {
        case LinearizationCase::SameInterval: return "case1";
        case LinearizationCase::MixedRatio: return "case2";
        case LinearizationCase::Inapplicable: return "inapplicable";
    }
    return "inapplicable";
}

std::string to_string(Fate fate) {
    switch (fate) {
        case Fate::ConvergesToZero: return "converges";
        case Fate::Diverges: return "diverges";
        case Fate::Undetermined: return "undetermined";
    }
    return "undetermined";
}

LinearPartResult linear_part(const IfsDescriptor& ifs) {
    std::vector<ScalarMap> maps;
    std::vector<double> slopes;
    std::vector<SlopeInterval> tags;
    for (std::size_t i = 0; i < ifs.size(); ++i) {
        const ScalarMap& f = ifs.maps()[i];
        if (!f.fixes_origin())
            throw HypothesisError("map " + std::to_string(i + 1) + " does not fix 0 (f(0) = " + fmt(f(0.0)) + ")");
        const double s = f.derivative(0.0);
        const SlopeInterval tag = classify_slope_interval(s);
        if (tag == SlopeInterval::Boundary)
            throw NonHyperbolicError("map " + std::to_string(i + 1) + " has f'(0) = " + fmt(s) +
                                     ", fixed point 0 is not hyperbolic");
        slopes.push_back(s);
        tags.push_back(tag);
        maps.push_back(ScalarMap::linear(s, f.domain()));
    }

    LinearizationCase c = LinearizationCase::SameInterval;
    const bool one_tag = std::all_of(tags.begin(), tags.end(), [&](SlopeInterval t) { return t == tags.front(); });
    if (!one_tag) {
        const bool one_sign =
            std::all_of(tags.begin(), tags.end(), [&](SlopeInterval t) { return orientation(t) == orientation(tags.front()); });
        c = one_sign ? LinearizationCase::MixedRatio : LinearizationCase::Inapplicable;
    }
    return {IfsDescriptor(std::move(maps), ifs.label().empty() ? "" : ifs.label() + "'"), std::move(slopes),
            std::move(tags), c};
}

Homeomorphism1D koenigs_conjugacy(const ScalarMap& f, const KoenigsOptions& options) {
    if (!f.fixes_origin()) throw HypothesisError("map does not fix 0 (f(0) = " + fmt(f(0.0)) + ")");
    const double lambda = f.derivative(0.0);
    if (classify_slope_interval(lambda) == SlopeInterval::Boundary)
        throw NonHyperbolicError("f'(0) = " + fmt(lambda) + ", fixed point 0 is not hyperbolic");
    if (!(options.radius > 0.0) || options.nodes < 4) throw std::invalid_argument("koenigs needs radius > 0 and >= 4 nodes");

    std::vector<double> xs = Interval::symmetric(options.radius).grid(options.nodes);
    // pin h(0) = 0 exactly; an even node count leaves no node at the origin
    if (!std::binary_search(xs.begin(), xs.end(), 0.0)) xs.insert(std::upper_bound(xs.begin(), xs.end(), 0.0), 0.0);
    std::vector<KoenigsNode> nodes(xs.size());
    const bool contracting = std::abs(lambda) < 1.0;
    const double search = std::max(options.radius, 1.0);

    parallel_for(xs.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            if (contracting) {
                nodes[i] = koenigs_limit(f, lambda, xs[i], options.n_max);
            } else {
                auto back = [&](double y) {
                    const auto x = inverse_image(f, y, search);
                    if (!x) throw InvertibilityError("no preimage of " + fmt(y));
                    return *x;
                };
                nodes[i] = koenigs_limit(back, 1.0 / lambda, xs[i], options.n_max);
            }
        }
    });

    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (nodes[i].last_step > 1e-10)
            throw ConvergenceFailureError("linearization did not converge at x = " + fmt(xs[i]) + " after " +
                                              std::to_string(options.n_max) + " steps",
                                          nodes[i].last_step);
        ys[i] = nodes[i].value;
    }
    for (std::size_t i = 1; i < ys.size(); ++i)
        if (!(ys[i] > ys[i - 1]))
            throw NumericFailureError("linearization is not monotone near x = " + fmt(xs[i]) +
                                      "; the map is not a local diffeomorphism on the table");
    return Homeomorphism1D::tabulated(xs, std::move(ys));
}

KoenigsResidual koenigs_residual(const ScalarMap& f, const Homeomorphism1D& h, double radius, std::size_t grid_size) {
    const double lambda = f.derivative(0.0);
    KoenigsResidual out;
    for (double x : Interval::symmetric(radius).grid(grid_size)) {
        const double fx = f(x);
        if (!(std::abs(fx) <= radius)) continue;
        const double r = std::abs(h(fx) - lambda * h(x));
        ++out.checked;
        if (r > out.sup) {
            out.sup = r;
            out.worst_point = x;
        }
    }
    return out;
}

DecayCheck decay_bound_check(const IfsDescriptor& ifs, const SymbolSequence& sigma, std::size_t n, double x) {
    double rate = 0.0;
    int sign = 0;
    for (std::size_t i = 0; i < ifs.size(); ++i) {
        const ScalarMap& f = ifs.maps()[i];
        double eps = 0.0;
        switch (f.kind()) {
            case ScalarMap::Kind::Linear: break;
            case ScalarMap::Kind::LinearPlusLipschitz:
                eps = std::get<PerturbedLinearForm>(f.form()).perturbation.declared_lipschitz;
                break;
            default:
                throw UnsupportedMapError("map " + std::to_string(i + 1) + " (" + f.describe() +
                                          ") is not linear plus Lipschitz");
        }
        const double k = f.slope();
        const int s = k > 0.0 ? 1 : (k < 0.0 ? -1 : 0);
        if (s == 0 || (sign != 0 && s != sign))
            throw HypothesisError("slopes k_i must be nonzero and of one sign");
        sign = s;
        if (!(std::abs(k) + eps < 1.0))
            throw HypothesisError("map " + std::to_string(i + 1) + " has |k| + eps = " + fmt(std::abs(k) + eps) +
                                  " >= 1");
        rate = std::max(rate, std::abs(k) + eps);
    }
    DecayCheck out;
    out.rate = rate;
    out.orbit_value = std::abs(compose_orbit(ifs, sigma, n, x));
    out.bound = std::pow(rate, static_cast<double>(n)) * std::abs(x);
    out.holds = out.orbit_value < out.bound + 1e-12;
    return out;
}

SequenceFateReport classify_sequence_fate(const IfsDescriptor& ifs, const SymbolSequence& sigma, std::size_t n_max,
                                          double x0, double epsilon, double margin) {
    const LinearPartResult lp = linear_part(ifs);
    if (lp.hg_case != LinearizationCase::MixedRatio)
        throw WrongCaseError("sequence fate needs slopes of one sign split across |s| < 1 and |s| > 1; got " +
                             to_string(lp.hg_case));
    if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");

    SequenceFateReport out;
    out.margin = margin;
    out.epsilon = epsilon;
    for (std::size_t i = 0; i < lp.slopes.size(); ++i) {
        const double a = std::abs(lp.slopes[i]);
        const int symbol = static_cast<int>(i + 1);
        if (a < 1.0) {
            if (!(a + epsilon < 1.0))
                throw HypothesisError("contracting symbol " + std::to_string(symbol) + " has |a| + eps >= 1");
            out.contracting_symbols.push_back(symbol);
        } else {
            if (!(a - epsilon > 1.0))
                throw HypothesisError("expanding symbol " + std::to_string(symbol) + " has |a| - eps <= 1");
            out.expanding_symbols.push_back(symbol);
        }
    }

    out.trajectory.reserve(n_max);
    FateSample s;
    double xf = x0;
    double xg = x0;
    double bound = std::abs(x0);
    double log_sum = 0.0;
    for (std::size_t i = 1; i <= n_max; ++i) {
        const int lambda = sigma.at(i);
        const double a = lp.slopes.at(static_cast<std::size_t>(lambda - 1));
        if (std::abs(a) < 1.0)
            ++s.n1;
        else
            ++s.n2;
        log_sum += std::log(std::abs(a));
        xg *= a;
        if (std::isfinite(xf)) xf = ifs.map(lambda)(xf);
        if (!std::isfinite(xf)) xf = std::numeric_limits<double>::infinity();
        bound *= std::abs(a) + epsilon;
        s.n = i;
        s.ratio = s.n2 == 0 ? std::numeric_limits<double>::infinity()
                            : static_cast<double>(s.n1) / static_cast<double>(s.n2);
        s.orbit_f = std::abs(xf);
        s.orbit_g = std::abs(xg);
        s.bound = bound;
        out.trajectory.push_back(s);
    }

    if (n_max == 0) return out;
    out.lyapunov_sum = log_sum / static_cast<double>(n_max);
    if (s.n1 == 0 || s.n2 == 0)
        out.predicted_fate = Fate::Undetermined;
    else if (out.lyapunov_sum < -margin)
        out.predicted_fate = Fate::ConvergesToZero;
    else if (out.lyapunov_sum > margin)
        out.predicted_fate = Fate::Diverges;
    else
        out.predicted_fate = Fate::Undetermined;
    return out;
}

}  // namespace ifsconj
