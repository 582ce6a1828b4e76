#pragma once

// Linear part of an IFS fixing the origin, numeric linearization of a single
// map near a hyperbolic fixed point, and the orbit bounds used to compare an
// IFS with its linear part along a symbol sequence.

#include "ifsconj/conjugacy1d.hpp"
#include "ifsconj/core.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace ifsconj {

enum class LinearizationCase {
    SameInterval,  // every f'(0) in one interval
    MixedRatio,    // one sign, split between |s| < 1 and |s| > 1
    Inapplicable,  // signs differ
};

std::string to_string(LinearizationCase c);

struct LinearPartResult {
    IfsDescriptor linear_part;  // maps x -> f_lambda'(0) x
    std::vector<double> slopes;
    std::vector<SlopeInterval> interval_tags;
    LinearizationCase hg_case;
};

/// Throws HypothesisError when some f_lambda(0) != 0 and NonHyperbolicError
/// when some |f_lambda'(0)| is 0 or 1.
LinearPartResult linear_part(const IfsDescriptor& ifs);

struct KoenigsOptions {
    double radius = 0.5;
    std::size_t n_max = 10000;
    std::size_t nodes = 2048;
};

/// h = lim f'(0)^{-n} f^n, tabulated on [-radius, radius] and interpolated by
/// a monotone cubic.  Satisfies h(f(x)) ~ f'(0) h(x).  For |f'(0)| > 1 the
/// limit is taken along the inverse map.  Throws ConvergenceFailureError when
/// successive iterates still differ by more than 1e-10 after n_max steps.
Homeomorphism1D koenigs_conjugacy(const ScalarMap& f, const KoenigsOptions& options = {});

struct KoenigsResidual {
    double sup = 0.0;      // max |h(f(x)) - f'(0) h(x)|
    double worst_point = 0.0;
    std::size_t checked = 0;  // grid points with f(x) inside the table
};

/// Evaluates the linearization residual on `grid_size` points of
/// [-radius, radius], skipping points whose image leaves the table.
KoenigsResidual koenigs_residual(const ScalarMap& f, const Homeomorphism1D& h, double radius, std::size_t grid_size);

struct DecayCheck {
    double orbit_value = 0.0;  // |F_{sigma_n}(x)|
    double bound = 0.0;        // k^n |x|
    double rate = 0.0;         // k = max_i (|k_i| + eps_i)
    bool holds = false;
};

/// For maps k_i x + phi_i(x) with Lipschitz(phi_i) <= eps_i, |k_i| + eps_i < 1
/// and all k_i of one sign: checks |F_{sigma_n}(x)| < k^n |x| + 1e-12.
/// Throws HypothesisError when the hypotheses fail.
DecayCheck decay_bound_check(const IfsDescriptor& ifs, const SymbolSequence& sigma, std::size_t n, double x);

enum class Fate { ConvergesToZero, Diverges, Undetermined };

std::string to_string(Fate fate);

struct FateSample {
    std::size_t n = 0;
    std::size_t n1 = 0;  // contracting symbols so far
    std::size_t n2 = 0;  // expanding symbols so far
    double ratio = 0.0;  // n1 / n2, +inf while n2 = 0
    double orbit_f = 0.0;  // |F_{sigma_n}(x0)|
    double orbit_g = 0.0;  // |G_{sigma_n}(x0)| for the linear part G
    double bound = 0.0;    // prod (|a_{lambda_i}| + eps) |x0|
};

struct SequenceFateReport {
    std::vector<FateSample> trajectory;
    double lyapunov_sum = 0.0;  // (1/n) sum ln|a_{lambda_i}| at n = n_max
    Fate predicted_fate = Fate::Undetermined;
    double margin = 0.01;
    double epsilon = 0.0;
    std::vector<int> contracting_symbols;
    std::vector<int> expanding_symbols;
};

/// Mixed-case analysis: ratio trajectory, orbit samples of F and its linear
/// part, and a margin-based verdict from the Lyapunov sum at n_max.  Reports
/// `Undetermined` when one of the two blocks never occurs.
/// Throws WrongCaseError unless the linear part is in the mixed case.
SequenceFateReport classify_sequence_fate(const IfsDescriptor& ifs, const SymbolSequence& sigma, std::size_t n_max,
                                          double x0, double epsilon, double margin = 0.01);

}  // namespace ifsconj
