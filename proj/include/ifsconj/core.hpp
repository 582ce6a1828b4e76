#pragma once

// Map catalog, symbol sequences, orbit composition and slope classification
// for iterated function systems on the real line.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ifsconj {

inline constexpr double kAbsTol = 1e-9;
inline constexpr double kRelTol = 1e-9;
inline constexpr double kDefaultRadius = 10.0;

/// |a - b| <= atol + rtol * max(|a|, |b|)
bool approx_equal(double a, double b, double atol = kAbsTol, double rtol = kRelTol);

/// Closed interval [lo, hi]; infinite bounds stand for the whole line.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    static Interval whole_line() { return {}; }
    static Interval symmetric(double radius) { return {-radius, radius}; }

    bool is_whole_line() const;
    bool contains(double x) const { return x >= lo && x <= hi; }
    double width() const { return hi - lo; }
    /// n >= 2 equally spaced points, endpoints included.
    std::vector<double> grid(std::size_t n) const;

    friend bool operator==(const Interval&, const Interval&) = default;
};

// ---------------------------------------------------------------------------
// Map catalog
// ---------------------------------------------------------------------------

enum class PerturbationShape { Sine, Rational };

/// phi(x) = c sin(x)  or  phi(x) = c x / (1 + x^2).  Both vanish at 0 and
/// have true Lipschitz constant |c|.
struct Perturbation {
    PerturbationShape shape = PerturbationShape::Sine;
    double amplitude = 0.0;
    double declared_lipschitz = 0.0;

    /// Declared epsilon defaults to |c|.  Throws std::invalid_argument when
    /// |c| exceeds the declared constant.
    static Perturbation sine(double c, std::optional<double> epsilon = std::nullopt);
    static Perturbation rational(double c, std::optional<double> epsilon = std::nullopt);

    double value(double x) const;
    double derivative(double x) const;
    double true_lipschitz() const;

    friend bool operator==(const Perturbation&, const Perturbation&) = default;
};

std::string to_string(PerturbationShape shape);

struct LinearForm {
    double k;
    friend bool operator==(const LinearForm&, const LinearForm&) = default;
};
struct PerturbedLinearForm {
    double k;
    Perturbation perturbation;
    friend bool operator==(const PerturbedLinearForm&, const PerturbedLinearForm&) = default;
};
/// Smooth catalog family "rational-bump": f(x) = k x + c x^2 / (1 + x^2).
struct RationalBumpForm {
    double k;
    double c;
    friend bool operator==(const RationalBumpForm&, const RationalBumpForm&) = default;
};
/// f(x) = k x + b.  Only the attractor sampler accepts these.
struct AffineForm {
    double k;
    double b;
    friend bool operator==(const AffineForm&, const AffineForm&) = default;
};

using MapForm = std::variant<LinearForm, PerturbedLinearForm, RationalBumpForm, AffineForm>;

/// A one-dimensional map from the closed catalog, with exact derivative.
class ScalarMap {
public:
    enum class Kind { Linear, LinearPlusLipschitz, SmoothCatalog, Affine };

    static ScalarMap linear(double k, Interval domain = Interval::whole_line());
    static ScalarMap perturbed(double k, Perturbation phi, Interval domain = Interval::whole_line());
    static ScalarMap rational_bump(double k, double c, Interval domain = Interval::whole_line());
    static ScalarMap affine(double k, double b, Interval domain = Interval::whole_line());

    double operator()(double x) const;
    double derivative(double x) const;

    Kind kind() const;
    const MapForm& form() const { return form_; }
    const Interval& domain() const { return domain_; }
    /// Coefficient of the linear term.
    double slope() const;
    bool fixes_origin() const;
    /// Upper bound on the global Lipschitz constant known from the catalog.
    double lipschitz_bound() const;
    std::string describe() const;

    friend bool operator==(const ScalarMap&, const ScalarMap&) = default;

private:
    ScalarMap(MapForm form, Interval domain);

    MapForm form_;
    Interval domain_;
};

std::string to_string(ScalarMap::Kind kind);

// ---------------------------------------------------------------------------
// Symbol sequences
// ---------------------------------------------------------------------------

enum class PositionRule { PerfectSquares, PowersOfTwo };

std::string to_string(PositionRule rule);

/// Stateless uniform draw in [0, 1) derived from (seed, index).
double uniform_from(std::uint64_t seed, std::uint64_t index);
std::uint64_t mix64(std::uint64_t x);

bool is_perfect_square(std::size_t i);
bool is_power_of_two(std::size_t i);

/// An element of Lambda^N, symbols are 1-based indices into the IFS.
class SymbolSequence {
public:
    struct Explicit {
        std::vector<int> indices;
    };
    struct Periodic {
        std::vector<int> pattern;
    };
    /// Symbol 1 with probability p, otherwise symbol 2.
    struct Bernoulli {
        double p;
        std::uint64_t seed;
    };
    /// The special symbol sits at positions selected by the rule, the other
    /// symbol of {1, 2} everywhere else.
    struct SparseDensity {
        int special;
        PositionRule rule;
    };
    using Generator = std::variant<Explicit, Periodic, Bernoulli, SparseDensity>;

    static SymbolSequence explicit_symbols(std::vector<int> indices, int alphabet_size = 0);
    static SymbolSequence periodic(std::vector<int> pattern, int alphabet_size = 0);
    static SymbolSequence bernoulli(double p, std::uint64_t seed);
    static SymbolSequence sparse(int special, PositionRule rule = PositionRule::PerfectSquares);

    /// Symbol at 1-based position i.
    int at(std::size_t i) const;
    std::vector<int> prefix(std::size_t n) const;
    int alphabet_size() const { return alphabet_size_; }
    /// Finite length for explicit sequences.
    std::optional<std::size_t> length() const;
    const Generator& generator() const { return generator_; }
    std::string describe() const;

private:
    SymbolSequence(Generator generator, int alphabet_size);

    Generator generator_;
    int alphabet_size_;
};

// ---------------------------------------------------------------------------
// IFS descriptor and operations
// ---------------------------------------------------------------------------

/// The family F = {f_lambda : lambda in Lambda}, Lambda = {1, ..., N}.
class IfsDescriptor {
public:
    explicit IfsDescriptor(std::vector<ScalarMap> maps, std::string label = {});

    const ScalarMap& map(int lambda) const;
    const std::vector<ScalarMap>& maps() const { return maps_; }
    std::size_t size() const { return maps_.size(); }
    const Interval& domain() const { return maps_.front().domain(); }
    const std::string& label() const { return label_; }
    bool all_linear() const;
    std::vector<double> linear_slopes() const;

    /// Structural equality of the map lists (labels ignored).
    friend bool operator==(const IfsDescriptor& a, const IfsDescriptor& b) { return a.maps_ == b.maps_; }

private:
    std::vector<ScalarMap> maps_;
    std::string label_;
};

/// f_{lambda_n}( ... f_{lambda_1}(x) ... ), first symbol innermost.
double compose_orbit(const IfsDescriptor& ifs, const SymbolSequence& sigma, std::size_t n, double x);

/// Product k_{lambda_n} ... k_{lambda_1} for an IFS of linear maps.
double effective_slope(const IfsDescriptor& ifs, const SymbolSequence& sigma, std::size_t n);

/// Largest difference quotient over all pairs of `samples` equally spaced
/// points of the interval; a lower bound on the Lipschitz constant.
double estimate_lipschitz(const ScalarMap& f, const Interval& interval, std::size_t samples);

inline double derivative_at(const ScalarMap& f, double x) { return f.derivative(x); }

/// Solves f(x) = y for a map that is strictly monotone on the search bracket.
/// The bracket starts at [-radius, radius] and doubles up to 2^40 radius;
/// nullopt when y is never bracketed.  Full double precision.
std::optional<double> inverse_image(const ScalarMap& f, double y, double radius = kDefaultRadius);

enum class SlopeInterval { Contracting, ReversingContracting, Expanding, ReversingExpanding, Boundary };

/// (0,1), (-1,0), (1,+inf), (-inf,-1), or boundary when |s| is 0 or 1.
SlopeInterval classify_slope_interval(double s);
std::string to_string(SlopeInterval tag);
bool is_contracting(SlopeInterval tag);
/// +1 for orientation-preserving tags, -1 for reversing, 0 for boundary.
int orientation(SlopeInterval tag);

struct SymbolCounts {
    std::size_t n1 = 0;
    std::size_t n2 = 0;
};

/// n1 = #{i <= n : lambda_i in block1}, n2 = n - n1.
SymbolCounts count_symbols(const SymbolSequence& sigma, std::size_t n, std::span<const int> block1);

}  // namespace ifsconj
