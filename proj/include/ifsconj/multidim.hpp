#pragma once

// IFSs of diagonal matrices on R^m: componentwise weak conjugacy and
// conjugacy of similarity-transformed families by h(X) = A X.

#include "ifsconj/conjugacy1d.hpp"
#include "ifsconj/core.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ifsconj {

using Vector = std::vector<double>;

/// X -> (d_11 x_1, ..., d_mm x_m).
struct DiagonalMap {
    std::vector<double> diag;

    /// Throws std::invalid_argument on empty or non-finite entries.
    explicit DiagonalMap(std::vector<double> d);
    std::size_t dimension() const { return diag.size(); }
    Vector operator()(std::span<const double> x) const;

    friend bool operator==(const DiagonalMap&, const DiagonalMap&) = default;
};

/// Common dimension of a nonempty family; ShapeError on mismatch.
std::size_t common_dimension(const std::vector<DiagonalMap>& maps);

/// D_{lambda_n} ... D_{lambda_1} X.  ShapeError on dimension mismatch.
Vector diag_compose(const std::vector<DiagonalMap>& maps, const SymbolSequence& sigma, std::size_t n,
                    std::span<const double> x);

/// Scalar IFS formed by coordinate i (0-based) of every map.
IfsDescriptor coordinate_ifs(const std::vector<DiagonalMap>& maps, std::size_t i);

class VectorHomeomorphism {
public:
    struct Componentwise {
        std::vector<Homeomorphism1D> parts;
    };
    struct LinearChangeOfBasis {
        Eigen::MatrixXd A;
    };
    using Form = std::variant<Componentwise, LinearChangeOfBasis>;

    explicit VectorHomeomorphism(Form form) : form_(std::move(form)) {}

    std::size_t dimension() const;
    Vector operator()(std::span<const double> x) const;
    const Form& form() const { return form_; }
    std::string describe() const;

private:
    Form form_;
};

/// Which entries must share one slope interval.
enum class HypothesisReading {
    Global,         // every diagonal entry of every map of F and G
    PerCoordinate,  // entries of coordinate i pooled across F and G, for each i
};

std::string to_string(HypothesisReading reading);

/// h = (h_1, ..., h_m) with h_i the scalar weak conjugacy of coordinate i.
/// Throws NonConjugateError naming the first offending coordinate (1-based)
/// and ShapeError on dimension or family-size mismatch.
VectorHomeomorphism componentwise_conjugacy(const std::vector<DiagonalMap>& f, const std::vector<DiagonalMap>& g,
                                            const SymbolSequence& sigma, std::size_t n,
                                            BridgeKind bridge = BridgeKind::LinearInterpolation,
                                            HypothesisReading reading = HypothesisReading::Global,
                                            double anchor = 1.0, double radius = kDefaultRadius);

struct VectorConjugacyReport {
    std::size_t points = 0;
    bool full_grid = false;  // false when random points were used
    /// max over points and coordinates of |lhs - rhs| / (1 + |rhs|)
    double residual_sup = 0.0;
    double abs_residual_sup = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    Vector worst_point;
};

/// Checks h(F_{sigma_n}(X)) = G_{sigma_n}(h(X)) on a grid_per_axis^m grid of
/// [-radius, radius]^m for m <= 3, otherwise on 10^4 random points drawn
/// from `seed`.  ShapeError for m > 8.
VectorConjugacyReport verify_vector_conjugacy(const std::vector<DiagonalMap>& f, const std::vector<DiagonalMap>& g,
                                              const SymbolSequence& sigma, std::size_t n,
                                              const VectorHomeomorphism& h, double tolerance,
                                              std::size_t grid_per_axis = 33, double radius = kDefaultRadius,
                                              std::uint64_t seed = 0);

/// G = {A D_j A^{-1}} built from diagonal D_j.
class SimilarityIfs {
public:
    /// A^{-1} is computed by LU with partial pivoting unless supplied.
    /// Throws ShapeError on size mismatch and InvertibilityError when
    /// max|A A^{-1} - I| > 1e-10.
    SimilarityIfs(std::vector<DiagonalMap> base, Eigen::MatrixXd a,
                  std::optional<Eigen::MatrixXd> a_inverse = std::nullopt);

    const std::vector<DiagonalMap>& base() const { return base_; }
    const Eigen::MatrixXd& A() const { return a_; }
    const Eigen::MatrixXd& A_inverse() const { return a_inv_; }
    std::size_t dimension() const { return static_cast<std::size_t>(a_.rows()); }
    /// sigma_max / sigma_min of A.
    double condition_estimate() const { return condition_; }
    /// A D_j A^{-1}, 1-based.
    const Eigen::MatrixXd& target_map(int j) const;

private:
    std::vector<DiagonalMap> base_;
    Eigen::MatrixXd a_;
    Eigen::MatrixXd a_inv_;
    std::vector<Eigen::MatrixXd> targets_;
    double condition_ = 1.0;
};

struct SimilarityReport {
    Vector lhs;  // A F_{sigma_n}(X)
    Vector rhs;  // G_{sigma_n}(A X), applied map by map
    double residual = 0.0;  // max norm of lhs - rhs
    double bound = 0.0;     // 1e-10 (1 + |X|_max)
    bool pass = false;
    double condition = 1.0;
    std::optional<std::string> warning;
};

SimilarityReport similarity_conjugacy(const SimilarityIfs& s, const SymbolSequence& sigma, std::size_t n,
                                      std::span<const double> x);

}  // namespace ifsconj
