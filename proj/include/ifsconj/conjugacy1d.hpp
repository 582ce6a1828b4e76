#pragma once

// Conjugacies between one-dimensional linear maps x -> kx and x -> mx built
// on a fundamental domain [ka, a], and grid verification of h o f = g o h.

#include "ifsconj/core.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ifsconj {

enum class BridgeKind { LinearInterpolation, PowerLaw };

std::string to_string(BridgeKind kind);

/// Increasing homeomorphism [k a, a] -> [m a, a] fixing the top endpoint a,
/// for 0 < k, m < 1.
class Bridge {
public:
    Bridge(BridgeKind kind, double k, double m, double anchor);

    /// Inputs are clamped to [k a, a].
    double operator()(double x) const;
    /// The bridge [m a, a] -> [k a, a] that undoes this one.
    Bridge inverse() const { return Bridge(kind_, m_, k_, anchor_); }

    BridgeKind kind() const { return kind_; }
    double domain_low() const { return k_ * anchor_; }
    double image_low() const { return m_ * anchor_; }
    double anchor() const { return anchor_; }
    /// ln m / ln k; the exponent of the power-law bridge.
    double exponent() const { return exponent_; }

private:
    BridgeKind kind_;
    double k_;
    double m_;
    double anchor_;
    double exponent_;
};

/// How a fundamental-domain conjugacy is reduced to the contracting,
/// orientation-preserving construction.
struct Orientation {
    bool inverse_composed = false;  // expanding slopes: built for 1/k, 1/m
    bool negated = false;           // negative slopes: h = -h*
    std::string to_string() const;
    friend bool operator==(const Orientation&, const Orientation&) = default;
};

/// A homeomorphism of the line (or of a neighborhood of 0 for tabulated
/// forms).  Immutable, cheap to copy.
class Homeomorphism1D {
public:
    struct FundamentalDomain {
        double k;
        double m;
        double anchor;
        BridgeKind bridge;
        Orientation orientation;
        double radius;  // working radius used for the iteration cap
    };
    /// x -> sign(x) |x|^alpha
    struct PowerLaw {
        double alpha;
    };
    /// parts applied left to right: parts[0] innermost.
    struct Composite {
        std::vector<Homeomorphism1D> parts;
    };
    /// Monotone piecewise-cubic interpolant through increasing nodes.
    struct Tabulated {
        std::vector<double> xs;
        std::vector<double> ys;
    };
    using Form = std::variant<FundamentalDomain, PowerLaw, Composite, Tabulated>;

    static Homeomorphism1D identity();
    static Homeomorphism1D power_law(double alpha);
    static Homeomorphism1D composite(std::vector<Homeomorphism1D> parts);
    /// Throws std::invalid_argument unless xs and ys are strictly increasing
    /// with at least four nodes.
    static Homeomorphism1D tabulated(std::vector<double> xs, std::vector<double> ys);
    /// Unchecked construction; prefer build_linear_conjugacy.
    static Homeomorphism1D fundamental_domain(FundamentalDomain params);

    double operator()(double x) const;
    /// Structural inverse evaluation.  Throws RangeError when y lies outside
    /// the image of the working interval (or of the table).
    double invert(double y) const;
    Homeomorphism1D inverse() const;

    const Form& form() const;
    std::string describe() const;

private:
    struct State;
    explicit Homeomorphism1D(std::shared_ptr<const State> state);
    std::shared_ptr<const State> state_;
};

/// h with h(kx) = m h(x).  k and m must lie in the same open interval among
/// (0,1), (-1,0), (1,+inf), (-inf,-1); anchor a > 0.
/// Throws NonConjugateError for different intervals, NonHyperbolicError when
/// |k| or |m| is 0 or 1.
Homeomorphism1D build_linear_conjugacy(double k, double m, double anchor = 1.0,
                                       BridgeKind bridge = BridgeKind::LinearInterpolation,
                                       double radius = kDefaultRadius);

/// n_x for the contracting construction: the least n >= 1 with
/// k^n x in [k a, a] when x > a, the least n >= 1 with k^-n x in [k a, a]
/// when 0 < x < k a, and 0 inside the fundamental domain.  Negative for the
/// second branch.  Exposed for tests.
int fundamental_domain_steps(double k, double anchor, double x, double radius = kDefaultRadius);

inline double evaluate(const Homeomorphism1D& h, double x) { return h(x); }
inline double invert(const Homeomorphism1D& h, double y) { return h.invert(y); }

struct ConjugacyReport {
    std::vector<double> grid;
    std::vector<double> h_values;
    /// |h(f(x)) - g(h(x))| / (1 + |g(h(x))|) per grid point.
    std::vector<double> residuals;
    double residual_sup = 0.0;
    /// Unscaled max |h(f(x)) - g(h(x))|.
    double abs_residual_sup = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    double worst_point = 0.0;
    std::optional<std::string> failure;
};

using RealFunction = std::function<double(double)>;

/// Grid check of h o f = g o h on a uniform grid of `interval`.
/// Evaluation errors are recorded as a failed report at the offending point.
ConjugacyReport verify_conjugacy(const RealFunction& f, const RealFunction& g, const Homeomorphism1D& h,
                                 const Interval& interval, std::size_t grid_size, double tolerance);

ConjugacyReport verify_conjugacy(const ScalarMap& f, const ScalarMap& g, const Homeomorphism1D& h,
                                 std::size_t grid_size, double tolerance, double radius = kDefaultRadius);

// ---------------------------------------------------------------------------
// Interval feasibility and weak conjugacy of linear IFSs
// ---------------------------------------------------------------------------

enum class Obstruction { None, OrientationMismatch, AttractRepelMismatch, OrientationAndAttractRepel };

std::string to_string(Obstruction obstruction);

/// Obstruction class between two slopes with non-boundary tags.
Obstruction obstruction_between(SlopeInterval a, SlopeInterval b);

struct MapRef {
    char side;          // 'F' or 'G'
    std::size_t index;  // 1-based
    std::string to_string() const;
};

struct IntervalTest {
    bool conjugable = false;
    Obstruction obstruction = Obstruction::None;
    std::vector<SlopeInterval> f_tags;
    std::vector<SlopeInterval> g_tags;
    /// First pooled pair whose tags disagree.
    std::optional<std::pair<MapRef, MapRef>> offending_pair;
};

/// Pools the slopes at 0 of F and G; conjugable iff they share one interval.
/// Throws NonHyperbolicError on a boundary slope.
IntervalTest same_interval_test(const IfsDescriptor& f, const IfsDescriptor& g);

/// h_n with h_n o F_{sigma_n} = G_{sigma_n} o h_n for linear IFSs.
Homeomorphism1D weak_conjugacy_linear(const IfsDescriptor& f, const IfsDescriptor& g, const SymbolSequence& sigma,
                                      std::size_t n, double anchor = 1.0,
                                      BridgeKind bridge = BridgeKind::LinearInterpolation,
                                      double radius = kDefaultRadius);

/// verify_conjugacy with f = F_{sigma_n} and g = G_{sigma_n} evaluated by
/// orbit composition.
ConjugacyReport verify_weak_conjugacy(const IfsDescriptor& f, const IfsDescriptor& g, const SymbolSequence& sigma,
                                      std::size_t n, const Homeomorphism1D& h, std::size_t grid_size,
                                      double tolerance, double radius = kDefaultRadius);

}  // namespace ifsconj
