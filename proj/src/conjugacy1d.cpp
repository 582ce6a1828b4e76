#include "ifsconj/conjugacy1d.hpp"

#include "ifsconj/errors.hpp"
#include "ifsconj/parallel.hpp"

#include <cmath>
// Boost 1.74 pchip calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ifsconj {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

}  // namespace

std::string to_string(BridgeKind kind) {
    return kind == BridgeKind::LinearInterpolation ? "linear" : "power-law";
}

Bridge::Bridge(BridgeKind kind, double k, double m, double anchor)
    : kind_(kind), k_(k), m_(m), anchor_(anchor), exponent_(std::log(m) / std::log(k)) {
    if (!(k > 0.0 && k < 1.0 && m > 0.0 && m < 1.0))
        throw std::invalid_argument("bridge slopes must lie in (0, 1)");
    if (!(anchor > 0.0) || !std::isfinite(anchor)) throw std::invalid_argument("anchor must be positive");
}

double Bridge::operator()(double x) const {
    const double lo = k_ * anchor_;
    x = std::clamp(x, lo, anchor_);
    switch (kind_) {
        case BridgeKind::LinearInterpolation: {
            if (x == anchor_) return anchor_;
            const double t = (x - lo) / (anchor_ - lo);
            return m_ * anchor_ + t * (anchor_ - m_ * anchor_);
        }
        case BridgeKind::PowerLaw: return anchor_ * std::pow(x / anchor_, exponent_);
    }
    return x;
}

std::string Orientation::to_string() const {
    if (inverse_composed && negated) return "negated+inverse-composed";
    if (inverse_composed) return "inverse-composed";
    if (negated) return "negated";
    return "direct";
}

// ---------------------------------------------------------------------------

struct Homeomorphism1D::State {
    Form form;
    // Tabulated forms only.
    std::optional<boost::math::interpolators::pchip<std::vector<double>>> spline;
};

Homeomorphism1D::Homeomorphism1D(std::shared_ptr<const State> state) : state_(std::move(state)) {}

Homeomorphism1D Homeomorphism1D::identity() { return power_law(1.0); }

Homeomorphism1D Homeomorphism1D::power_law(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("power-law exponent must be positive");
    return Homeomorphism1D(std::make_shared<const State>(State{PowerLaw{alpha}, std::nullopt}));
}

Homeomorphism1D Homeomorphism1D::composite(std::vector<Homeomorphism1D> parts) {
    if (parts.empty()) return identity();
    return Homeomorphism1D(std::make_shared<const State>(State{Composite{std::move(parts)}, std::nullopt}));
}

Homeomorphism1D Homeomorphism1D::tabulated(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() != ys.size() || xs.size() < 4)
        throw std::invalid_argument("tabulated homeomorphism needs matching node lists of size >= 4");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1]) || !(ys[i] > ys[i - 1]))
            throw std::invalid_argument("tabulated homeomorphism nodes must be strictly increasing");
    auto xs_copy = xs;
    auto ys_copy = ys;
    boost::math::interpolators::pchip<std::vector<double>> spline(std::move(xs_copy), std::move(ys_copy));
    return Homeomorphism1D(
        std::make_shared<const State>(State{Tabulated{std::move(xs), std::move(ys)}, std::move(spline)}));
}

Homeomorphism1D Homeomorphism1D::fundamental_domain(FundamentalDomain params) {
    return Homeomorphism1D(std::make_shared<const State>(State{params, std::nullopt}));
}

const Homeomorphism1D::Form& Homeomorphism1D::form() const { return state_->form; }

namespace {

std::size_t iteration_cap(double kc, double anchor, double x, double radius) {
    const double scale = std::max(radius, anchor);
    const double lx = std::log(x);
    const double spread = std::max(std::abs(std::log(scale) - lx), std::abs(lx - std::log(anchor)));
    const double steps = std::ceil(spread / std::log(1.0 / kc));
    if (!std::isfinite(steps)) return 64;
    return static_cast<std::size_t>(10.0 * steps) + 64;
}

struct Located {
    int steps;  // > 0: x > a branch, < 0: x < k a branch
    double reduced;
};

// Contracting, orientation-preserving case: 0 < kc < 1, x > 0.
Located locate(double kc, double anchor, double x, double radius) {
    const double lo = kc * anchor;
    const std::size_t cap = iteration_cap(kc, anchor, x, radius);
    if (x > anchor) {
        double y = x;
        double prev = x;
        std::size_t n = 0;
        while (y > anchor) {
            prev = y;
            y *= kc;
            if (++n > cap)
                throw NumericFailureError("fundamental-domain search exceeded " + std::to_string(cap) +
                                          " iterations at x = " + fmt(x));
        }
        assert(y >= lo && y <= anchor && prev > anchor);
        (void)prev;
        return {static_cast<int>(n), y};
    }
    if (x < lo) {
        double y = x;
        std::size_t n = 0;
        while (y < lo) {
            y /= kc;
            if (++n > cap)
                throw NumericFailureError("fundamental-domain search exceeded " + std::to_string(cap) +
                                          " iterations at x = " + fmt(x));
        }
        assert(y >= lo && y * kc < lo);
        return {-static_cast<int>(n), y};
    }
    return {0, x};
}

double contracting_conjugacy(double kc, double mc, double anchor, BridgeKind kind, double x, double radius) {
    if (x == 0.0) return 0.0;
    if (x < 0.0) return -contracting_conjugacy(kc, mc, anchor, kind, -x, radius);
    if (!std::isfinite(x)) throw NumericFailureError("cannot evaluate a conjugacy at a non-finite point");
    const Bridge bridge(kind, kc, mc, anchor);
    const Located loc = locate(kc, anchor, x, radius);
    const double base = bridge(loc.reduced);
    if (loc.steps == 0) return base;
    // h(x) = g^{-n}(bridge(f^{n} x)) above the domain, g^{n}(bridge(f^{-n} x)) below it.
    return std::pow(mc, -loc.steps) * base;
}

double evaluate_fundamental(const Homeomorphism1D::FundamentalDomain& p, double x) {
    double kc = std::abs(p.k);
    double mc = std::abs(p.m);
    if (p.orientation.inverse_composed) {
        kc = 1.0 / kc;
        mc = 1.0 / mc;
    }
    const double v = contracting_conjugacy(kc, mc, p.anchor, p.bridge, x, p.radius);
    return p.orientation.negated ? -v : v;
}

Homeomorphism1D::FundamentalDomain swapped(const Homeomorphism1D::FundamentalDomain& p) {
    auto q = p;
    std::swap(q.k, q.m);
    return q;
}

double tabulated_inverse(const Homeomorphism1D::Tabulated& t,
                         const boost::math::interpolators::pchip<std::vector<double>>& spline, double y) {
    if (y < t.ys.front() || y > t.ys.back())
        throw RangeError("value " + fmt(y) + " lies outside the tabulated image [" + fmt(t.ys.front()) + ", " +
                         fmt(t.ys.back()) + "]");
    const auto it = std::lower_bound(t.ys.begin(), t.ys.end(), y);
    const auto j = static_cast<std::size_t>(it - t.ys.begin());
    if (*it == y) return t.xs[j];
    double lo = t.xs[j - 1];
    double hi = t.xs[j];
    auto residual = [&](double x) { return spline(x) - y; };
    boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 2);
    std::uintmax_t max_iter = 200;
    const auto r = boost::math::tools::toms748_solve(residual, lo, hi, residual(lo), residual(hi), tol, max_iter);
    return 0.5 * (r.first + r.second);
}

}  // namespace

double Homeomorphism1D::operator()(double x) const {
    return std::visit(overloaded{
                          [x](const FundamentalDomain& p) { return evaluate_fundamental(p, x); },
                          [x](const PowerLaw& p) {
                              if (x == 0.0) return 0.0;
                              return std::copysign(std::pow(std::abs(x), p.alpha), x);
                          },
                          [x](const Composite& c) {
                              double v = x;
                              for (const auto& part : c.parts) v = part(v);
                              return v;
                          },
                          [this, x](const Tabulated& t) {
                              if (x < t.xs.front() || x > t.xs.back())
                                  throw RangeError("point " + fmt(x) + " lies outside the tabulated domain [" +
                                                   fmt(t.xs.front()) + ", " + fmt(t.xs.back()) + "]");
                              return (*state_->spline)(x);
                          },
                      },
                      state_->form);
}

double Homeomorphism1D::invert(double y) const {
    return std::visit(overloaded{
                          [y](const FundamentalDomain& p) {
                              if (y == 0.0) return 0.0;
                              const double edge = std::abs(evaluate_fundamental(p, p.radius));
                              if (std::abs(y) > edge * (1.0 + 1e-12))
                                  throw RangeError("value " + fmt(y) + " lies outside the image [-" + fmt(edge) +
                                                   ", " + fmt(edge) + "] of the working interval");
                              return evaluate_fundamental(swapped(p), y);
                          },
                          [y](const PowerLaw& p) {
                              if (y == 0.0) return 0.0;
                              return std::copysign(std::pow(std::abs(y), 1.0 / p.alpha), y);
                          },
                          [y](const Composite& c) {
                              double v = y;
                              for (auto it = c.parts.rbegin(); it != c.parts.rend(); ++it) v = it->invert(v);
                              return v;
                          },
                          [this, y](const Tabulated& t) { return tabulated_inverse(t, *state_->spline, y); },
                      },
                      state_->form);
}

Homeomorphism1D Homeomorphism1D::inverse() const {
    return std::visit(overloaded{
                          [](const FundamentalDomain& p) { return fundamental_domain(swapped(p)); },
                          [](const PowerLaw& p) { return power_law(1.0 / p.alpha); },
                          [](const Composite& c) {
                              std::vector<Homeomorphism1D> parts;
                              for (auto it = c.parts.rbegin(); it != c.parts.rend(); ++it)
                                  parts.push_back(it->inverse());
                              return composite(std::move(parts));
                          },
                          [](const Tabulated& t) { return tabulated(t.ys, t.xs); },
                      },
                      state_->form);
}

std::string Homeomorphism1D::describe() const {
    return std::visit(overloaded{
                          [](const FundamentalDomain& p) {
                              return "fundamental-domain(k=" + fmt(p.k) + ", m=" + fmt(p.m) + ", a=" +
                                     fmt(p.anchor) + ", bridge=" + to_string(p.bridge) +
                                     ", orientation=" + p.orientation.to_string() + ")";
                          },
                          [](const PowerLaw& p) { return "power-law(alpha=" + fmt(p.alpha) + ")"; },
                          [](const Composite& c) {
                              std::string s = "composite(";
                              for (std::size_t i = 0; i < c.parts.size(); ++i)
                                  s += (i ? ", " : "") + c.parts[i].describe();
                              return s + ")";
                          },
                          [](const Tabulated& t) {
                              return "tabulated(" + std::to_string(t.xs.size()) + " nodes on [" +
                                     fmt(t.xs.front()) + ", " + fmt(t.xs.back()) + "])";
                          },
                      },
                      state_->form);
}

// ---------------------------------------------------------------------------

Homeomorphism1D build_linear_conjugacy(double k, double m, double anchor, BridgeKind bridge, double radius) {
    if (!(anchor > 0.0) || !std::isfinite(anchor)) throw std::invalid_argument("anchor must be positive and finite");
    if (!(radius > 0.0)) throw std::invalid_argument("working radius must be positive");
    const SlopeInterval tk = classify_slope_interval(k);
    const SlopeInterval tm = classify_slope_interval(m);
    if (tk == SlopeInterval::Boundary || tm == SlopeInterval::Boundary)
        throw NonHyperbolicError("slopes k = " + fmt(k) + " and m = " + fmt(m) +
                                 " must satisfy |slope| not in {0, 1}");
    if (tk != tm)
        throw NonConjugateError("x -> " + fmt(k) + "x and x -> " + fmt(m) + "x are not conjugate (" +
                                to_string(obstruction_between(tk, tm)) + ": " + to_string(tk) + " vs " +
                                to_string(tm) + ")");
    Orientation orientation;
    orientation.inverse_composed = !is_contracting(tk);
    orientation.negated = ifsconj::orientation(tk) < 0;
    return Homeomorphism1D::fundamental_domain({k, m, anchor, bridge, orientation, radius});
}

int fundamental_domain_steps(double k, double anchor, double x, double radius) {
    if (!(k > 0.0 && k < 1.0)) throw std::invalid_argument("k must lie in (0, 1)");
    if (!(x > 0.0)) throw std::invalid_argument("x must be positive");
    return locate(k, anchor, x, radius).steps;
}

ConjugacyReport verify_conjugacy(const RealFunction& f, const RealFunction& g, const Homeomorphism1D& h,
                                 const Interval& interval, std::size_t grid_size, double tolerance) {
    if (grid_size < 2) throw std::invalid_argument("verify_conjugacy needs grid_size >= 2");
    ConjugacyReport report;
    report.grid = interval.grid(grid_size);
    report.tolerance = tolerance;
    report.h_values.assign(grid_size, std::numeric_limits<double>::quiet_NaN());
    report.residuals.assign(grid_size, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> abs_residuals(grid_size, 0.0);
    std::vector<std::string> errors(grid_size);

    parallel_for(grid_size, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double x = report.grid[i];
            try {
                const double hx = h(x);
                const double lhs = h(f(x));
                const double rhs = g(hx);
                const double diff = std::abs(lhs - rhs);
                report.h_values[i] = hx;
                if (!std::isfinite(lhs) || !std::isfinite(rhs))
                    errors[i] = "non-finite value (h(f(x)) = " + fmt(lhs) + ", g(h(x)) = " + fmt(rhs) +
                                "); the conjugacy overflows double range here";
                abs_residuals[i] = diff;
                report.residuals[i] = std::isfinite(diff) ? diff / (1.0 + std::abs(rhs))
                                                          : std::numeric_limits<double>::infinity();
            } catch (const std::exception& e) {
                report.residuals[i] = std::numeric_limits<double>::infinity();
                abs_residuals[i] = std::numeric_limits<double>::infinity();
                errors[i] = e.what();
            }
        }
    });

    std::size_t worst = 0;
    for (std::size_t i = 0; i < grid_size; ++i) {
        if (!(report.residuals[i] <= report.residuals[worst])) worst = i;
        report.abs_residual_sup = std::max(report.abs_residual_sup, abs_residuals[i]);
    }
    for (std::size_t i = 0; i < grid_size; ++i)
        if (!errors[i].empty()) {
            report.failure = "at x = " + fmt(report.grid[i]) + ": " + errors[i];
            worst = i;
            break;
        }
    report.residual_sup = report.residuals[worst];
    if (std::isnan(report.residual_sup)) report.residual_sup = std::numeric_limits<double>::infinity();
    report.worst_point = report.grid[worst];
    report.pass = !report.failure && report.residual_sup <= tolerance;
    return report;
}

ConjugacyReport verify_conjugacy(const ScalarMap& f, const ScalarMap& g, const Homeomorphism1D& h,
                                 std::size_t grid_size, double tolerance, double radius) {
    return verify_conjugacy([&f](double x) { return f(x); }, [&g](double x) { return g(x); }, h,
                            Interval::symmetric(radius), grid_size, tolerance);
}

// ---------------------------------------------------------------------------

std::string to_string(Obstruction obstruction) {
    switch (obstruction) {
        case Obstruction::None: return "none";
        case Obstruction::OrientationMismatch: return "orientation-mismatch";
        case Obstruction::AttractRepelMismatch: return "attract-repel-mismatch";
        case Obstruction::OrientationAndAttractRepel: return "orientation-and-attract-repel-mismatch";
    }
    return "unknown";
}

Obstruction obstruction_between(SlopeInterval a, SlopeInterval b) {
    const bool orient = orientation(a) != orientation(b);
    const bool attract = is_contracting(a) != is_contracting(b);
    if (orient && attract) return Obstruction::OrientationAndAttractRepel;
    if (orient) return Obstruction::OrientationMismatch;
    if (attract) return Obstruction::AttractRepelMismatch;
    return Obstruction::None;
}

std::string MapRef::to_string() const { return std::string(1, side) + "[" + std::to_string(index) + "]"; }

IntervalTest same_interval_test(const IfsDescriptor& f, const IfsDescriptor& g) {
    IntervalTest result;
    std::vector<std::pair<MapRef, SlopeInterval>> pooled;
    auto collect = [&](const IfsDescriptor& ifs, char side, std::vector<SlopeInterval>& tags) {
        for (std::size_t i = 0; i < ifs.size(); ++i) {
            const double s = derivative_at(ifs.maps()[i], 0.0);
            const SlopeInterval tag = classify_slope_interval(s);
            if (tag == SlopeInterval::Boundary)
                throw NonHyperbolicError(MapRef{side, i + 1}.to_string() + " has boundary slope " + fmt(s) +
                                         " at the origin");
            tags.push_back(tag);
            pooled.emplace_back(MapRef{side, i + 1}, tag);
        }
    };
    collect(f, 'F', result.f_tags);
    collect(g, 'G', result.g_tags);

    const auto& [ref, ref_tag] = pooled.front();
    for (const auto& [other, tag] : pooled) {
        if (tag != ref_tag) {
            result.conjugable = false;
            result.obstruction = obstruction_between(ref_tag, tag);
            result.offending_pair = std::make_pair(ref, other);
            return result;
        }
    }
    result.conjugable = true;
    return result;
}

Homeomorphism1D weak_conjugacy_linear(const IfsDescriptor& f, const IfsDescriptor& g, const SymbolSequence& sigma,
                                      std::size_t n, double anchor, BridgeKind bridge, double radius) {
    if (f.size() != g.size())
        throw ShapeError("weakly conjugate IFSs need the same alphabet (" + std::to_string(f.size()) + " vs " +
                         std::to_string(g.size()) + " maps)");
    (void)f.linear_slopes();
    (void)g.linear_slopes();
    const IntervalTest test = same_interval_test(f, g);
    if (!test.conjugable) {
        const auto& [a, b] = *test.offending_pair;
        throw NonConjugateError("slopes of " + a.to_string() + " and " + b.to_string() +
                                " lie in different intervals (" + to_string(test.obstruction) + ")");
    }
    const double k_star = effective_slope(f, sigma, n);
    const double m_star = effective_slope(g, sigma, n);
    if (classify_slope_interval(k_star) == SlopeInterval::Boundary ||
        classify_slope_interval(m_star) == SlopeInterval::Boundary)
        throw NumericFailureError("effective slope underflowed or overflowed at n = " + std::to_string(n));
    return build_linear_conjugacy(k_star, m_star, anchor, bridge, radius);
}

ConjugacyReport verify_weak_conjugacy(const IfsDescriptor& f, const IfsDescriptor& g, const SymbolSequence& sigma,
                                      std::size_t n, const Homeomorphism1D& h, std::size_t grid_size,
                                      double tolerance, double radius) {
    return verify_conjugacy([&](double x) { return compose_orbit(f, sigma, n, x); },
                            [&](double x) { return compose_orbit(g, sigma, n, x); }, h, Interval::symmetric(radius),
                            grid_size, tolerance);
}

}  // namespace ifsconj
