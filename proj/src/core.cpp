#include "ifsconj/core.hpp"

#include "ifsconj/errors.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
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

// max |d/dx x^2/(1+x^2)| = 3 sqrt(3) / 8, attained at x = 1/sqrt(3)
constexpr double kRationalBumpSlopeMax = 0.649519052838329;

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
}

}  // namespace

bool approx_equal(double a, double b, double atol, double rtol) {
    return std::abs(a - b) <= atol + rtol * std::max(std::abs(a), std::abs(b));
}

bool Interval::is_whole_line() const { return std::isinf(lo) && std::isinf(hi); }

std::vector<double> Interval::grid(std::size_t n) const {
    if (n < 2) throw std::invalid_argument("grid needs at least two points");
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo))
        throw std::invalid_argument("grid needs a bounded, nondegenerate interval");
    std::vector<double> xs(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) xs[i] = lo + step * static_cast<double>(i);
    xs.back() = hi;
    return xs;
}

// ---------------------------------------------------------------------------

Perturbation Perturbation::sine(double c, std::optional<double> epsilon) {
    check_finite(c, "perturbation amplitude");
    const double eps = epsilon.value_or(std::abs(c));
    if (!(eps >= 0.0)) throw std::invalid_argument("declared Lipschitz constant must be >= 0");
    if (std::abs(c) > eps) throw std::invalid_argument("sine perturbation amplitude exceeds declared Lipschitz constant");
    return {PerturbationShape::Sine, c, eps};
}

Perturbation Perturbation::rational(double c, std::optional<double> epsilon) {
    check_finite(c, "perturbation amplitude");
    const double eps = epsilon.value_or(std::abs(c));
    if (!(eps >= 0.0)) throw std::invalid_argument("declared Lipschitz constant must be >= 0");
    if (std::abs(c) > eps)
        throw std::invalid_argument("rational perturbation amplitude exceeds declared Lipschitz constant");
    return {PerturbationShape::Rational, c, eps};
}

double Perturbation::value(double x) const {
    switch (shape) {
        case PerturbationShape::Sine: return amplitude * std::sin(x);
        case PerturbationShape::Rational: return amplitude * x / (1.0 + x * x);
    }
    return 0.0;
}

double Perturbation::derivative(double x) const {
    switch (shape) {
        case PerturbationShape::Sine: return amplitude * std::cos(x);
        case PerturbationShape::Rational: {
            const double d = 1.0 + x * x;
            return amplitude * (1.0 - x * x) / (d * d);
        }
    }
    return 0.0;
}

double Perturbation::true_lipschitz() const { return std::abs(amplitude); }

std::string to_string(PerturbationShape shape) {
    return shape == PerturbationShape::Sine ? "sine" : "rational";
}

// ---------------------------------------------------------------------------

ScalarMap::ScalarMap(MapForm form, Interval domain) : form_(std::move(form)), domain_(domain) {
    if (!(domain_.hi > domain_.lo)) throw std::invalid_argument("map domain must be nondegenerate");
}

ScalarMap ScalarMap::linear(double k, Interval domain) {
    check_finite(k, "slope");
    return ScalarMap(LinearForm{k}, domain);
}

ScalarMap ScalarMap::perturbed(double k, Perturbation phi, Interval domain) {
    check_finite(k, "slope");
    if (phi.value(0.0) != 0.0) throw std::invalid_argument("perturbation must vanish at 0");
    return ScalarMap(PerturbedLinearForm{k, phi}, domain);
}

ScalarMap ScalarMap::rational_bump(double k, double c, Interval domain) {
    check_finite(k, "slope");
    check_finite(c, "bump amplitude");
    return ScalarMap(RationalBumpForm{k, c}, domain);
}

ScalarMap ScalarMap::affine(double k, double b, Interval domain) {
    check_finite(k, "slope");
    check_finite(b, "offset");
    return ScalarMap(AffineForm{k, b}, domain);
}

double ScalarMap::operator()(double x) const {
    return std::visit(overloaded{
                          [x](const LinearForm& m) { return m.k * x; },
                          [x](const PerturbedLinearForm& m) { return m.k * x + m.perturbation.value(x); },
                          [x](const RationalBumpForm& m) { return m.k * x + m.c * x * x / (1.0 + x * x); },
                          [x](const AffineForm& m) { return m.k * x + m.b; },
                      },
                      form_);
}

double ScalarMap::derivative(double x) const {
    return std::visit(overloaded{
                          [](const LinearForm& m) { return m.k; },
                          [x](const PerturbedLinearForm& m) { return m.k + m.perturbation.derivative(x); },
                          [x](const RationalBumpForm& m) {
                              const double d = 1.0 + x * x;
                              return m.k + m.c * 2.0 * x / (d * d);
                          },
                          [](const AffineForm& m) { return m.k; },
                      },
                      form_);
}

ScalarMap::Kind ScalarMap::kind() const {
    switch (form_.index()) {
        case 0: return Kind::Linear;
        case 1: return Kind::LinearPlusLipschitz;
        case 2: return Kind::SmoothCatalog;
        default: return Kind::Affine;
    }
}

double ScalarMap::slope() const {
    return std::visit([](const auto& m) { return m.k; }, form_);
}

bool ScalarMap::fixes_origin() const { return std::abs((*this)(0.0)) <= 1e-12; }

double ScalarMap::lipschitz_bound() const {
    return std::visit(overloaded{
                          [](const LinearForm& m) { return std::abs(m.k); },
                          [](const PerturbedLinearForm& m) {
                              return std::abs(m.k) + m.perturbation.declared_lipschitz;
                          },
                          [](const RationalBumpForm& m) {
                              return std::abs(m.k) + std::abs(m.c) * kRationalBumpSlopeMax;
                          },
                          [](const AffineForm& m) { return std::abs(m.k); },
                      },
                      form_);
}

std::string ScalarMap::describe() const {
    return std::visit(overloaded{
                          [](const LinearForm& m) { return fmt_double(m.k) + "*x"; },
                          [](const PerturbedLinearForm& m) {
                              const auto& p = m.perturbation;
                              return fmt_double(m.k) + "*x + " + fmt_double(p.amplitude) +
                                     (p.shape == PerturbationShape::Sine ? "*sin(x)" : "*x/(1+x^2)");
                          },
                          [](const RationalBumpForm& m) {
                              return fmt_double(m.k) + "*x + " + fmt_double(m.c) + "*x^2/(1+x^2)";
                          },
                          [](const AffineForm& m) { return fmt_double(m.k) + "*x + " + fmt_double(m.b); },
                      },
                      form_);
}

std::string to_string(ScalarMap::Kind kind) {
    switch (kind) {
        case ScalarMap::Kind::Linear: return "linear";
        case ScalarMap::Kind::LinearPlusLipschitz: return "linear-lipschitz";
        case ScalarMap::Kind::SmoothCatalog: return "smooth";
        case ScalarMap::Kind::Affine: return "affine";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------

std::uint64_t mix64(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double uniform_from(std::uint64_t seed, std::uint64_t index) {
    const std::uint64_t h = mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

bool is_perfect_square(std::size_t i) {
    auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(i)));
    while (r * r > i) --r;
    while ((r + 1) * (r + 1) <= i) ++r;
    return r * r == i;
}

bool is_power_of_two(std::size_t i) { return i != 0 && (i & (i - 1)) == 0; }

std::string to_string(PositionRule rule) {
    return rule == PositionRule::PerfectSquares ? "perfect-squares" : "powers-of-two";
}

namespace {

int checked_alphabet(const std::vector<int>& symbols, int alphabet_size, const char* what) {
    if (symbols.empty()) throw std::invalid_argument(std::string(what) + " must be nonempty");
    const int max_symbol = *std::max_element(symbols.begin(), symbols.end());
    const int size = alphabet_size > 0 ? alphabet_size : max_symbol;
    for (int s : symbols)
        if (s < 1 || s > size)
            throw std::invalid_argument(std::string(what) + " contains symbol " + std::to_string(s) +
                                        " outside 1.." + std::to_string(size));
    return size;
}

}  // namespace

SymbolSequence::SymbolSequence(Generator generator, int alphabet_size)
    : generator_(std::move(generator)), alphabet_size_(alphabet_size) {}

SymbolSequence SymbolSequence::explicit_symbols(std::vector<int> indices, int alphabet_size) {
    const int size = checked_alphabet(indices, alphabet_size, "explicit sequence");
    return SymbolSequence(Explicit{std::move(indices)}, size);
}

SymbolSequence SymbolSequence::periodic(std::vector<int> pattern, int alphabet_size) {
    const int size = checked_alphabet(pattern, alphabet_size, "periodic pattern");
    return SymbolSequence(Periodic{std::move(pattern)}, size);
}

SymbolSequence SymbolSequence::bernoulli(double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("Bernoulli probability must lie in [0, 1]");
    return SymbolSequence(Bernoulli{p, seed}, 2);
}

SymbolSequence SymbolSequence::sparse(int special, PositionRule rule) {
    if (special != 1 && special != 2) throw std::invalid_argument("sparse special symbol must be 1 or 2");
    return SymbolSequence(SparseDensity{special, rule}, 2);
}

int SymbolSequence::at(std::size_t i) const {
    if (i == 0) throw std::invalid_argument("sequence positions are 1-based");
    return std::visit(overloaded{
                          [i](const Explicit& g) {
                              if (i > g.indices.size())
                                  throw std::out_of_range("explicit sequence has only " +
                                                          std::to_string(g.indices.size()) + " symbols");
                              return g.indices[i - 1];
                          },
                          [i](const Periodic& g) { return g.pattern[(i - 1) % g.pattern.size()]; },
                          [i](const Bernoulli& g) { return uniform_from(g.seed, i) < g.p ? 1 : 2; },
                          [i](const SparseDensity& g) {
                              const bool hit = g.rule == PositionRule::PerfectSquares ? is_perfect_square(i)
                                                                                      : is_power_of_two(i);
                              return hit ? g.special : 3 - g.special;
                          },
                      },
                      generator_);
}

std::vector<int> SymbolSequence::prefix(std::size_t n) const {
    std::vector<int> out;
    out.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) out.push_back(at(i));
    return out;
}

std::optional<std::size_t> SymbolSequence::length() const {
    if (const auto* e = std::get_if<Explicit>(&generator_)) return e->indices.size();
    return std::nullopt;
}

std::string SymbolSequence::describe() const {
    auto join = [](const std::vector<int>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
        return s;
    };
    return std::visit(overloaded{
                          [&](const Explicit& g) { return "explicit(" + join(g.indices) + ")"; },
                          [&](const Periodic& g) { return "periodic(" + join(g.pattern) + ")"; },
                          [](const Bernoulli& g) {
                              return "bernoulli(p=" + fmt_double(g.p) + ", seed=" + std::to_string(g.seed) + ")";
                          },
                          [](const SparseDensity& g) {
                              return "sparse(special=" + std::to_string(g.special) + ", " + to_string(g.rule) + ")";
                          },
                      },
                      generator_);
}

// ---------------------------------------------------------------------------

IfsDescriptor::IfsDescriptor(std::vector<ScalarMap> maps, std::string label)
    : maps_(std::move(maps)), label_(std::move(label)) {
    if (maps_.empty()) throw std::invalid_argument("an IFS needs at least one map");
    for (const auto& m : maps_)
        if (!(m.domain() == maps_.front().domain()))
            throw std::invalid_argument("all maps of an IFS must share one domain");
}

const ScalarMap& IfsDescriptor::map(int lambda) const {
    if (lambda < 1 || static_cast<std::size_t>(lambda) > maps_.size())
        throw std::out_of_range("symbol " + std::to_string(lambda) + " outside the IFS alphabet 1.." +
                                std::to_string(maps_.size()));
    return maps_[static_cast<std::size_t>(lambda - 1)];
}

bool IfsDescriptor::all_linear() const {
    return std::all_of(maps_.begin(), maps_.end(), [](const ScalarMap& m) { return m.kind() == ScalarMap::Kind::Linear; });
}

std::vector<double> IfsDescriptor::linear_slopes() const {
    std::vector<double> out;
    out.reserve(maps_.size());
    for (const auto& m : maps_) {
        if (m.kind() != ScalarMap::Kind::Linear)
            throw UnsupportedMapError("expected a linear map, found " + to_string(m.kind()) + ": " + m.describe());
        out.push_back(m.slope());
    }
    return out;
}

double compose_orbit(const IfsDescriptor& ifs, const SymbolSequence& sigma, std::size_t n, double x) {
    if (n == 0) throw std::invalid_argument("orbit length n must be >= 1");
    const Interval& dom = ifs.domain();
    if (!std::isfinite(x) || !dom.contains(x)) throw DomainEscapeError(0, x);
    for (std::size_t i = 1; i <= n; ++i) {
        x = ifs.map(sigma.at(i))(x);
        if (!std::isfinite(x) || !dom.contains(x)) throw DomainEscapeError(i, x);
    }
    return x;
}

double effective_slope(const IfsDescriptor& ifs, const SymbolSequence& sigma, std::size_t n) {
    if (n == 0) throw std::invalid_argument("orbit length n must be >= 1");
    const auto slopes = ifs.linear_slopes();
    double product = 1.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const int lambda = sigma.at(i);
        if (lambda < 1 || static_cast<std::size_t>(lambda) > slopes.size())
            throw std::out_of_range("symbol outside the IFS alphabet");
        product *= slopes[static_cast<std::size_t>(lambda - 1)];
    }
    return product;
}

double estimate_lipschitz(const ScalarMap& f, const Interval& interval, std::size_t samples) {
    if (samples < 2) throw std::invalid_argument("estimate_lipschitz needs at least two samples");
    const auto xs = interval.grid(samples);
    std::vector<double> ys(xs.size());
    std::transform(xs.begin(), xs.end(), ys.begin(), [&f](double x) { return f(x); });
    double best = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = i + 1; j < xs.size(); ++j)
            best = std::max(best, std::abs(ys[j] - ys[i]) / (xs[j] - xs[i]));
    return best;
}

std::optional<double> inverse_image(const ScalarMap& f, double y, double radius) {
    if (!std::isfinite(y)) return std::nullopt;
    double lo = -radius;
    double hi = radius;
    for (int doubling = 0; doubling <= 40; ++doubling, lo *= 2.0, hi *= 2.0) {
        const double flo = f(lo) - y;
        const double fhi = f(hi) - y;
        if (flo == 0.0) return lo;
        if (fhi == 0.0) return hi;
        if ((flo < 0.0) == (fhi < 0.0)) continue;
        auto residual = [&](double x) { return f(x) - y; };
        boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 1);
        std::uintmax_t max_iter = 300;
        const auto r = boost::math::tools::toms748_solve(residual, lo, hi, flo, fhi, tol, max_iter);
        return 0.5 * (r.first + r.second);
    }
    return std::nullopt;
}

SlopeInterval classify_slope_interval(double s) {
    if (!std::isfinite(s)) throw std::invalid_argument("slope must be finite");
    const double a = std::abs(s);
    if (a == 0.0 || a == 1.0) return SlopeInterval::Boundary;
    if (s > 0.0) return a < 1.0 ? SlopeInterval::Contracting : SlopeInterval::Expanding;
    return a < 1.0 ? SlopeInterval::ReversingContracting : SlopeInterval::ReversingExpanding;
}

std::string to_string(SlopeInterval tag) {
    switch (tag) {
        case SlopeInterval::Contracting: return "(0,1)";
        case SlopeInterval::ReversingContracting: return "(-1,0)";
        case SlopeInterval::Expanding: return "(1,+inf)";
        case SlopeInterval::ReversingExpanding: return "(-inf,-1)";
        case SlopeInterval::Boundary: return "boundary";
    }
    return "unknown";
}

bool is_contracting(SlopeInterval tag) {
    return tag == SlopeInterval::Contracting || tag == SlopeInterval::ReversingContracting;
}

int orientation(SlopeInterval tag) {
    switch (tag) {
        case SlopeInterval::Contracting:
        case SlopeInterval::Expanding: return 1;
        case SlopeInterval::ReversingContracting:
        case SlopeInterval::ReversingExpanding: return -1;
        case SlopeInterval::Boundary: return 0;
    }
    return 0;
}

SymbolCounts count_symbols(const SymbolSequence& sigma, std::size_t n, std::span<const int> block1) {
    if (n == 0) throw std::invalid_argument("count_symbols needs n >= 1");
    SymbolCounts counts;
    for (std::size_t i = 1; i <= n; ++i) {
        const int s = sigma.at(i);
        if (std::find(block1.begin(), block1.end(), s) != block1.end()) ++counts.n1;
    }
    counts.n2 = n - counts.n1;
    return counts;
}

}  // namespace ifsconj
