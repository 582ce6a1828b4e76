#include "ifsconj/attractor.hpp"

#include "ifsconj/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ifsconj {

namespace {

void check_options(const ChaosGameOptions& o) {
    if (o.burn_in > o.iterations) throw std::invalid_argument("burn_in exceeds iterations");
}

}  // namespace

int chaos_symbol(std::uint64_t seed, std::size_t t, std::size_t size) {
    const auto k = static_cast<std::size_t>(uniform_from(seed, t) * static_cast<double>(size));
    return static_cast<int>(std::min(k, size - 1)) + 1;
}

AttractorSample chaos_game(const IfsDescriptor& ifs, double x0, const ChaosGameOptions& options) {
    check_options(options);
    const Interval interval = Interval::symmetric(options.radius);
    for (std::size_t i = 0; i < ifs.size(); ++i) {
        const ScalarMap& f = ifs.maps()[i];
        if (f.kind() == ScalarMap::Kind::Affine && !options.allow_affine)
            throw UnsupportedMapError("map " + std::to_string(i + 1) +
                                      " is affine; enable affine maps for attractor sampling");
        const double lip = estimate_lipschitz(f, interval, 257);
        if (!(lip < 1.0)) {
            std::ostringstream os;
            os << "map " << i + 1 << " (" << f.describe() << ") is not contractive: Lipschitz estimate " << lip;
            throw HypothesisError(os.str());
        }
    }

    AttractorSample sample;
    sample.burn_in = options.burn_in;
    sample.iterations = options.iterations;
    sample.seed = options.seed;
    sample.points.reserve(options.iterations - options.burn_in);
    double x = x0;
    for (std::size_t t = 1; t <= options.iterations; ++t) {
        x = ifs.map(chaos_symbol(options.seed, t, ifs.size()))(x);
        if (t > options.burn_in) sample.points.push_back(x);
    }
    return sample;
}

AttractorSample chaos_game(const std::vector<DiagonalMap>& maps, std::span<const double> x0,
                           const ChaosGameOptions& options) {
    check_options(options);
    const std::size_t m = common_dimension(maps);
    if (x0.size() != m) throw ShapeError("start point has dimension " + std::to_string(x0.size()) + ", expected " +
                                         std::to_string(m));
    for (std::size_t i = 0; i < maps.size(); ++i)
        for (double d : maps[i].diag)
            if (!(std::abs(d) < 1.0))
                throw HypothesisError("diagonal map " + std::to_string(i + 1) + " is not contractive");

    AttractorSample sample;
    sample.dimension = m;
    sample.burn_in = options.burn_in;
    sample.iterations = options.iterations;
    sample.seed = options.seed;
    sample.points.reserve((options.iterations - options.burn_in) * m);
    std::vector<double> x(x0.begin(), x0.end());
    for (std::size_t t = 1; t <= options.iterations; ++t) {
        const auto& d = maps[static_cast<std::size_t>(chaos_symbol(options.seed, t, maps.size()) - 1)].diag;
        for (std::size_t i = 0; i < m; ++i) x[i] *= d[i];
        if (t > options.burn_in) sample.points.insert(sample.points.end(), x.begin(), x.end());
    }
    return sample;
}

}  // namespace ifsconj
