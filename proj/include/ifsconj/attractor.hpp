#pragma once

// Chaos-game sampling of attractors of contractive IFSs.

#include "ifsconj/core.hpp"
#include "ifsconj/multidim.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ifsconj {

struct AttractorSample {
    std::size_t dimension = 1;
    /// Row-major, `dimension` values per point.
    std::vector<double> points;
    std::size_t burn_in = 0;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;

    std::size_t size() const { return dimension == 0 ? 0 : points.size() / dimension; }
    std::span<const double> point(std::size_t i) const { return {points.data() + i * dimension, dimension}; }
};

struct ChaosGameOptions {
    std::size_t iterations = 10000;
    std::size_t burn_in = 100;
    std::uint64_t seed = 0;
    bool allow_affine = false;
    double radius = kDefaultRadius;  // interval for the contraction check
};

/// x_t = f_{lambda_t}(x_{t-1}), lambda_t uniform from (seed, t); keeps x_t
/// for burn_in < t <= iterations.  Throws HypothesisError unless every map is
/// contractive, UnsupportedMapError for affine maps without allow_affine.
AttractorSample chaos_game(const IfsDescriptor& ifs, double x0, const ChaosGameOptions& options);

/// Diagonal-map version; contraction means max |d_ii| < 1.
AttractorSample chaos_game(const std::vector<DiagonalMap>& maps, std::span<const double> x0,
                           const ChaosGameOptions& options);

/// Symbol drawn at step t (1-based) for an alphabet of `size` maps.
int chaos_symbol(std::uint64_t seed, std::size_t t, std::size_t size);

}  // namespace ifsconj
