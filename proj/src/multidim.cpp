#include "ifsconj/multidim.hpp"

#include "ifsconj/errors.hpp"
#include "ifsconj/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ifsconj {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

void check_dimension(std::size_t expected, std::size_t got, const char* what) {
    if (expected != got)
        throw ShapeError(std::string(what) + " has dimension " + std::to_string(got) + ", expected " +
                         std::to_string(expected));
}

constexpr std::size_t kMaxGridDimension = 3;
constexpr std::size_t kMaxDimension = 8;
constexpr std::size_t kRandomPoints = 10000;

}  // namespace

DiagonalMap::DiagonalMap(std::vector<double> d) : diag(std::move(d)) {
    if (diag.empty()) throw std::invalid_argument("diagonal map needs at least one entry");
    for (double v : diag)
        if (!std::isfinite(v)) throw std::invalid_argument("diagonal entries must be finite");
}

Vector DiagonalMap::operator()(std::span<const double> x) const {
    check_dimension(dimension(), x.size(), "point");
    Vector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = diag[i] * x[i];
    return y;
}

std::size_t common_dimension(const std::vector<DiagonalMap>& maps) {
    if (maps.empty()) throw ShapeError("empty family of diagonal maps");
    const std::size_t m = maps.front().dimension();
    for (const auto& d : maps) check_dimension(m, d.dimension(), "diagonal map");
    return m;
}

Vector diag_compose(const std::vector<DiagonalMap>& maps, const SymbolSequence& sigma, std::size_t n,
                    std::span<const double> x) {
    const std::size_t m = common_dimension(maps);
    check_dimension(m, x.size(), "point");
    Vector y(x.begin(), x.end());
    for (std::size_t step = 1; step <= n; ++step) {
        const int lambda = sigma.at(step);
        if (lambda < 1 || static_cast<std::size_t>(lambda) > maps.size())
            throw std::out_of_range("symbol " + std::to_string(lambda) + " has no map");
        const auto& d = maps[static_cast<std::size_t>(lambda - 1)].diag;
        for (std::size_t i = 0; i < m; ++i) y[i] *= d[i];
    }
    return y;
}

IfsDescriptor coordinate_ifs(const std::vector<DiagonalMap>& maps, std::size_t i) {
    std::vector<ScalarMap> scalar;
    for (const auto& d : maps) scalar.push_back(ScalarMap::linear(d.diag.at(i)));
    return IfsDescriptor(std::move(scalar), "coordinate " + std::to_string(i + 1));
}

std::size_t VectorHomeomorphism::dimension() const {
    if (const auto* c = std::get_if<Componentwise>(&form_)) return c->parts.size();
    return static_cast<std::size_t>(std::get<LinearChangeOfBasis>(form_).A.rows());
}

Vector VectorHomeomorphism::operator()(std::span<const double> x) const {
    check_dimension(dimension(), x.size(), "point");
    if (const auto* c = std::get_if<Componentwise>(&form_)) {
        Vector y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = c->parts[i](x[i]);
        return y;
    }
    const auto& a = std::get<LinearChangeOfBasis>(form_).A;
    const Eigen::VectorXd v = a * Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    return Vector(v.data(), v.data() + v.size());
}

std::string VectorHomeomorphism::describe() const {
    if (const auto* c = std::get_if<Componentwise>(&form_)) {
        std::string out = "componentwise(";
        for (std::size_t i = 0; i < c->parts.size(); ++i) out += (i ? "; " : "") + c->parts[i].describe();
        return out + ")";
    }
    return "linear change of basis (" + std::to_string(dimension()) + "x" + std::to_string(dimension()) + ")";
}

std::string to_string(HypothesisReading reading) {
    return reading == HypothesisReading::Global ? "global" : "per-coordinate";
}

VectorHomeomorphism componentwise_conjugacy(const std::vector<DiagonalMap>& f, const std::vector<DiagonalMap>& g,
                                            const SymbolSequence& sigma, std::size_t n, BridgeKind bridge,
                                            HypothesisReading reading, double anchor, double radius) {
    const std::size_t m = common_dimension(f);
    check_dimension(m, common_dimension(g), "target family");
    if (f.size() != g.size())
        throw ShapeError("families have " + std::to_string(f.size()) + " and " + std::to_string(g.size()) + " maps");

    std::optional<SlopeInterval> global_tag;
    for (std::size_t i = 0; i < m; ++i) {
        const IntervalTest test = same_interval_test(coordinate_ifs(f, i), coordinate_ifs(g, i));
        if (!test.conjugable) {
            const auto& [a, b] = *test.offending_pair;
            throw NonConjugateError("coordinate " + std::to_string(i + 1) + ": " + a.to_string() + " and " +
                                    b.to_string() + " lie in different slope intervals (" +
                                    to_string(test.obstruction) + ")");
        }
        if (reading == HypothesisReading::Global) {
            const SlopeInterval tag = test.f_tags.front();
            if (!global_tag) global_tag = tag;
            if (tag != *global_tag)
                throw NonConjugateError("coordinate " + std::to_string(i + 1) + " has entries in " + to_string(tag) +
                                        " but coordinate 1 has entries in " + to_string(*global_tag) +
                                        "; the global hypothesis needs one interval for all entries");
        }
    }

    std::vector<Homeomorphism1D> parts;
    parts.reserve(m);
    for (std::size_t i = 0; i < m; ++i)
        parts.push_back(weak_conjugacy_linear(coordinate_ifs(f, i), coordinate_ifs(g, i), sigma, n, anchor, bridge,
                                              radius));
    return VectorHomeomorphism(VectorHomeomorphism::Componentwise{std::move(parts)});
}

VectorConjugacyReport verify_vector_conjugacy(const std::vector<DiagonalMap>& f, const std::vector<DiagonalMap>& g,
                                              const SymbolSequence& sigma, std::size_t n,
                                              const VectorHomeomorphism& h, double tolerance,
                                              std::size_t grid_per_axis, double radius, std::uint64_t seed) {
    const std::size_t m = common_dimension(f);
    check_dimension(m, common_dimension(g), "target family");
    check_dimension(m, h.dimension(), "homeomorphism");
    if (m > kMaxDimension)
        throw ShapeError("verification supports dimension <= " + std::to_string(kMaxDimension));
    if (grid_per_axis < 2) throw std::invalid_argument("grid needs at least two points per axis");

    VectorConjugacyReport report;
    report.tolerance = tolerance;
    report.full_grid = m <= kMaxGridDimension;
    const std::vector<double> axis = Interval::symmetric(radius).grid(grid_per_axis);
    std::size_t total = 1;
    if (report.full_grid)
        for (std::size_t i = 0; i < m; ++i) total *= grid_per_axis;
    else
        total = kRandomPoints;
    report.points = total;

    auto point = [&](std::size_t idx) {
        Vector x(m);
        if (report.full_grid) {
            for (std::size_t i = 0; i < m; ++i) {
                x[i] = axis[idx % grid_per_axis];
                idx /= grid_per_axis;
            }
        } else {
            for (std::size_t i = 0; i < m; ++i)
                x[i] = radius * (2.0 * uniform_from(seed, idx * m + i) - 1.0);
        }
        return x;
    };

    std::vector<double> scaled(total, 0.0);
    std::vector<double> absolute(total, 0.0);
    parallel_for(total, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            const Vector x = point(p);
            const Vector lhs = h(diag_compose(f, sigma, n, x));
            const Vector rhs = diag_compose(g, sigma, n, h(x));
            for (std::size_t i = 0; i < m; ++i) {
                const double d = std::abs(lhs[i] - rhs[i]);
                const double s = std::isfinite(d) ? d / (1.0 + std::abs(rhs[i])) : std::numeric_limits<double>::infinity();
                scaled[p] = std::max(scaled[p], s);
                absolute[p] = std::max(absolute[p], std::isfinite(d) ? d : std::numeric_limits<double>::infinity());
            }
        }
    });
    std::size_t worst = 0;
    for (std::size_t p = 0; p < total; ++p) {
        if (scaled[p] > scaled[worst]) worst = p;
        report.abs_residual_sup = std::max(report.abs_residual_sup, absolute[p]);
    }
    report.residual_sup = scaled[worst];
    report.worst_point = point(worst);
    report.pass = report.residual_sup <= tolerance;
    return report;
}

SimilarityIfs::SimilarityIfs(std::vector<DiagonalMap> base, Eigen::MatrixXd a, std::optional<Eigen::MatrixXd> a_inverse)
    : base_(std::move(base)), a_(std::move(a)) {
    const std::size_t m = common_dimension(base_);
    if (a_.rows() != a_.cols() || static_cast<std::size_t>(a_.rows()) != m)
        throw ShapeError("A must be " + std::to_string(m) + "x" + std::to_string(m) + ", got " +
                         std::to_string(a_.rows()) + "x" + std::to_string(a_.cols()));
    if (!a_.allFinite()) throw std::invalid_argument("A must have finite entries");
    if (a_inverse) {
        if (a_inverse->rows() != a_.rows() || a_inverse->cols() != a_.cols())
            throw ShapeError("A^-1 must have the shape of A");
        a_inv_ = std::move(*a_inverse);
    } else {
        a_inv_ = a_.partialPivLu().inverse();
    }
    const double defect = (a_ * a_inv_ - Eigen::MatrixXd::Identity(a_.rows(), a_.cols())).cwiseAbs().maxCoeff();
    if (!(defect <= 1e-10))
        throw InvertibilityError("max|A A^-1 - I| = " + fmt(defect) + " exceeds 1e-10; A is singular or A^-1 is wrong");
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a_);
    const auto& sv = svd.singularValues();
    condition_ = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    for (const auto& d : base_) {
        const Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(d.diag.data(), static_cast<Eigen::Index>(m));
        targets_.push_back(a_ * diag.asDiagonal() * a_inv_);
    }
}

const Eigen::MatrixXd& SimilarityIfs::target_map(int j) const {
    if (j < 1 || static_cast<std::size_t>(j) > targets_.size())
        throw std::out_of_range("symbol " + std::to_string(j) + " has no map");
    return targets_[static_cast<std::size_t>(j - 1)];
}

SimilarityReport similarity_conjugacy(const SimilarityIfs& s, const SymbolSequence& sigma, std::size_t n,
                                      std::span<const double> x) {
    const std::size_t m = s.dimension();
    check_dimension(m, x.size(), "point");
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(m));

    const Vector fx = diag_compose(s.base(), sigma, n, x);
    const Eigen::VectorXd lhs = s.A() * Eigen::Map<const Eigen::VectorXd>(fx.data(), static_cast<Eigen::Index>(m));
    Eigen::VectorXd rhs = s.A() * xv;
    for (std::size_t step = 1; step <= n; ++step) rhs = s.target_map(sigma.at(step)) * rhs;

    SimilarityReport report;
    report.lhs.assign(lhs.data(), lhs.data() + lhs.size());
    report.rhs.assign(rhs.data(), rhs.data() + rhs.size());
    report.residual = (lhs - rhs).cwiseAbs().maxCoeff();
    report.bound = 1e-10 * (1.0 + xv.cwiseAbs().maxCoeff());
    report.pass = report.residual <= report.bound;
    report.condition = s.condition_estimate();
    if (report.condition > 1e8)
        report.warning = "A is ill-conditioned (condition estimate " + fmt(report.condition) + " > 1e8)";
    return report;
}

}  // namespace ifsconj
