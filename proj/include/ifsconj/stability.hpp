#pragma once

// C^0 / C^1 distances between maps and between IFSs, the hyperbolicity audit
// of fixed points, and a randomized perturbation probe.

#include "ifsconj/core.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ifsconj {

inline constexpr std::size_t kDefaultMetricGrid = 2001;

struct MetricReport {
    double rho0 = 0.0;
    double rho1 = 0.0;
    std::size_t grid_size = 0;
    Interval working_interval;
    /// Grid points where an inverse could not be bracketed; left out of the max.
    std::size_t excluded_points = 0;
    double argmax_rho0 = 0.0;
};

/// rho0 = max over the grid of max(|f - g|, |f^-1 - g^-1|), rho1 adds
/// max |f' - g'|.  Inverses are solved with a bracket that may grow beyond
/// [-radius, radius].  Throws InvertibilityError when a map is not strictly
/// monotone on the grid.
MetricReport map_distance(const ScalarMap& f, const ScalarMap& g, std::size_t grid_size = kDefaultMetricGrid,
                          double radius = kDefaultRadius);

inline double rho0(const ScalarMap& f, const ScalarMap& g, std::size_t grid_size = kDefaultMetricGrid,
                   double radius = kDefaultRadius) {
    return map_distance(f, g, grid_size, radius).rho0;
}
inline double rho1(const ScalarMap& f, const ScalarMap& g, std::size_t grid_size = kDefaultMetricGrid,
                   double radius = kDefaultRadius) {
    return map_distance(f, g, grid_size, radius).rho1;
}

enum class DistanceMode {
    CrossPair,  // max over all pairs (f_i, g_j)
    Matched,    // max over pairs (f_i, g_i); same alphabet required
};

std::string to_string(DistanceMode mode);

struct IfsDistanceReport {
    double d0 = 0.0;
    double d1 = 0.0;
    int level = 1;
    double value = 0.0;  // d0 or d1 per level
    /// 1-based (i in F, j in G); empty for identical descriptors.
    std::optional<std::pair<std::size_t, std::size_t>> argmax_pair;
    bool identical = false;
    std::size_t excluded_points = 0;
};

/// Identical descriptors are at distance 0.  Otherwise the maximum of
/// rho_level over the pairs selected by `mode`.
IfsDistanceReport ifs_distance(const IfsDescriptor& f, const IfsDescriptor& g, int level,
                               DistanceMode mode = DistanceMode::CrossPair,
                               std::size_t grid_size = kDefaultMetricGrid, double radius = kDefaultRadius);

enum class Verdict { Hyperbolic, Borderline, NonHyperbolic };

std::string to_string(Verdict verdict);

struct FixedPoint {
    std::size_t map_index = 0;  // 1-based
    double point = 0.0;
    double derivative = 0.0;
    double margin = 0.0;  // ||f'(p)| - 1|
    Verdict verdict = Verdict::Hyperbolic;
};

struct HyperbolicityAudit {
    std::vector<FixedPoint> fixed_points;
    /// Every fixed point found is hyperbolic (borderline counts as hyperbolic).
    bool satisfied = true;
    double tolerance = 1e-6;
    double borderline_band = 1e-3;
    std::size_t grid_size = 4096;
    double radius = kDefaultRadius;
};

/// Fixed points from sign changes of f(x) - x on a grid of [-radius, radius],
/// refined by bisection to 1e-12.  Throws ContinuumOfFixedPointsError when
/// f(x) - x vanishes on consecutive grid points.
HyperbolicityAudit hyperbolicity_audit(const IfsDescriptor& ifs, double radius = kDefaultRadius,
                                       double tolerance = 1e-6, std::size_t grid_size = 4096);

struct ProbeTrial {
    std::size_t trial = 0;
    IfsDescriptor perturbed;
    double distance = 0.0;  // matched d1 to the original
    bool interval_ok = false;
    double weak_residual = 0.0;
    double identity_gap = 0.0;  // max |h(x) - x| on the grid
    std::size_t n = 0;
    bool pass = false;
};

struct ProbeReport {
    std::vector<ProbeTrial> trials;
    double pass_fraction = 1.0;
    std::size_t attempts = 0;
    double delta = 0.0;
    std::uint64_t seed = 0;
};

/// Draws `trials` perturbations G of F with matched d1(F, G) < delta and
/// checks interval agreement and the weak conjugacy of the linear parts for a
/// random sequence and n <= 10.  F must pass the audit and fix the origin.
/// Throws GenerationError after 100 * trials attempts.
ProbeReport perturbation_probe(const IfsDescriptor& f, double delta, std::size_t trials, std::uint64_t seed,
                               double radius = kDefaultRadius, std::size_t grid_size = 401);

}  // namespace ifsconj
