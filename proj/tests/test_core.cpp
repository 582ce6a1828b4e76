#include "ifsconj/core.hpp"
#include "ifsconj/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace ifsconj;

namespace {

// Central difference, independent of the closed-form derivatives.
double numeric_derivative(const ScalarMap& f, double x) {
    const double h = 1e-6;
    return (f(x + h) - f(x - h)) / (2 * h);
}

IfsDescriptor linear_ifs(std::vector<double> slopes) {
    std::vector<ScalarMap> maps;
    for (double k : slopes) maps.push_back(ScalarMap::linear(k));
    return IfsDescriptor(std::move(maps));
}

}  // namespace

TEST_SUITE("core") {
    TEST_CASE("compose_orbit applies the first symbol innermost") {
        const IfsDescriptor f = linear_ifs({0.5, 0.25});
        // 0.25 * 0.5 * 4 = 0.5
        CHECK(compose_orbit(f, SymbolSequence::explicit_symbols({1, 2}), 2, 4.0) == doctest::Approx(0.5));

        std::vector<ScalarMap> affine{ScalarMap::affine(2.0, 1.0), ScalarMap::affine(3.0, 0.0)};
        const IfsDescriptor g(affine);
        // f1 then f2: 3 * (2 * 5 + 1) = 33, the other order gives 2 * 15 + 1 = 31
        CHECK(compose_orbit(g, SymbolSequence::explicit_symbols({1, 2}), 2, 5.0) == 33.0);
        CHECK(compose_orbit(g, SymbolSequence::explicit_symbols({2, 1}), 2, 5.0) == 31.0);
    }

    TEST_CASE("compose_orbit reference values") {
        // hand products: 0.5 * 0.25 * 0.5 * 8 and 2 * 3 * 2 * 3
        CHECK(compose_orbit(linear_ifs({0.5, 0.25}), SymbolSequence::explicit_symbols({1, 2, 1}), 3, 8.0) ==
              doctest::Approx(0.5));
        CHECK(compose_orbit(linear_ifs({2.0, 3.0}), SymbolSequence::periodic({1, 2}), 4, 1.0) == 36.0);
        CHECK(compose_orbit(linear_ifs({0.7, 0.2}), SymbolSequence::periodic({2}), 1, 0.0) == 0.0);
        CHECK_THROWS(compose_orbit(linear_ifs({0.5}), SymbolSequence::periodic({1}), 0, 36.0));
    }

    TEST_CASE("orbits leaving a bounded domain report the step") {
        std::vector<ScalarMap> maps{ScalarMap::linear(2.0, Interval{-10.0, 10.0})};
        const IfsDescriptor f(maps);
        try {
            compose_orbit(f, SymbolSequence::periodic({1}), 10, 1.0);
            FAIL("expected a domain escape");
        } catch (const DomainEscapeError& e) {
            CHECK(e.step() == 4);  // 16 > 10 after the fourth map
        }
    }

    TEST_CASE("effective_slope multiplies slopes along the sequence") {
        const IfsDescriptor f = linear_ifs({0.5, 0.25});
        CHECK(effective_slope(f, SymbolSequence::explicit_symbols({1, 2, 1}), 3) == doctest::Approx(0.0625));
        CHECK(effective_slope(linear_ifs({0.9}), SymbolSequence::periodic({1}), 1) == 0.9);
        CHECK(effective_slope(linear_ifs({-0.5, -0.5}), SymbolSequence::explicit_symbols({1, 2}), 2) ==
              doctest::Approx(0.25));
        std::vector<ScalarMap> nonlinear{ScalarMap::rational_bump(0.5, 0.1)};
        CHECK_THROWS_AS(effective_slope(IfsDescriptor(nonlinear), SymbolSequence::periodic({1}), 1),
                        UnsupportedMapError);
    }

    TEST_CASE("effective_slope equals the orbit ratio for linear IFSs") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> slope(0.1, 0.9);
        for (int trial = 0; trial < 200; ++trial) {
            const IfsDescriptor f = linear_ifs({slope(rng), -slope(rng), 1.0 / slope(rng)});
            const SymbolSequence s = SymbolSequence::bernoulli(0.5, static_cast<std::uint64_t>(trial));
            const std::size_t n = 1 + static_cast<std::size_t>(trial % 15);
            CHECK(compose_orbit(f, s, n, 3.0) == doctest::Approx(3.0 * effective_slope(f, s, n)).epsilon(1e-12));
        }
    }

    TEST_CASE("symbol counts") {
        const std::vector<int> block1{1};
        const auto p = count_symbols(SymbolSequence::periodic({1, 2}), 10, block1);
        CHECK(p.n1 == 5);
        CHECK(p.n2 == 5);
        const auto sq = count_symbols(SymbolSequence::sparse(2), 100, block1);
        CHECK(sq.n1 == 90);
        CHECK(sq.n2 == 10);
        const auto e = count_symbols(SymbolSequence::explicit_symbols({1, 2, 1}), 3, block1);
        CHECK(e.n1 == 2);
        CHECK(e.n2 == 1);
    }

    TEST_CASE("sparse density places the special symbol on the rule") {
        const SymbolSequence sq = SymbolSequence::sparse(2);
        const SymbolSequence p2 = SymbolSequence::sparse(1, PositionRule::PowersOfTwo);
        for (std::size_t i = 1; i <= 300; ++i) {
            const auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(i))));
            CHECK(sq.at(i) == (r * r == i ? 2 : 1));
            CHECK(p2.at(i) == ((i & (i - 1)) == 0 ? 1 : 2));
        }
    }

    TEST_CASE("bernoulli sequences are deterministic and roughly calibrated") {
        const SymbolSequence a = SymbolSequence::bernoulli(0.3, 42);
        const SymbolSequence b = SymbolSequence::bernoulli(0.3, 42);
        const SymbolSequence c = SymbolSequence::bernoulli(0.3, 43);
        CHECK(a.prefix(500) == b.prefix(500));
        CHECK(a.prefix(500) != c.prefix(500));
        const std::vector<int> block1{1};
        const auto counts = count_symbols(a, 100000, block1);
        // 3 standard errors of a binomial proportion at n = 1e5
        CHECK(std::abs(static_cast<double>(counts.n1) / 1e5 - 0.3) < 3 * std::sqrt(0.3 * 0.7 / 1e5));
    }

    TEST_CASE("explicit sequences end") {
        const SymbolSequence s = SymbolSequence::explicit_symbols({1, 2});
        CHECK(s.length() == 2);
        CHECK_THROWS_AS(s.at(3), std::out_of_range);
        CHECK_THROWS(s.at(0));
        CHECK_THROWS(SymbolSequence::explicit_symbols({0}));
    }

    TEST_CASE("derivatives agree with central differences") {
        const std::vector<ScalarMap> catalog{
            ScalarMap::linear(0.3),
            ScalarMap::perturbed(0.5, Perturbation::sine(0.2)),
            ScalarMap::perturbed(-0.4, Perturbation::rational(0.3)),
            ScalarMap::rational_bump(0.7, 0.2),
            ScalarMap::affine(0.5, 2.0),
        };
        CHECK(derivative_at(catalog[0], 0.0) == 0.3);
        CHECK(derivative_at(catalog[1], 0.0) == doctest::Approx(0.7));
        CHECK(derivative_at(catalog[3], 0.0) == 0.7);
        for (const auto& f : catalog)
            for (double x = -5.0; x <= 5.0; x += 0.37)
                CHECK(f.derivative(x) == doctest::Approx(numeric_derivative(f, x)).epsilon(1e-7));
    }

    TEST_CASE("perturbation amplitude may not exceed the declared constant") {
        CHECK_THROWS_AS(Perturbation::sine(0.2, 0.1), std::invalid_argument);
        CHECK(Perturbation::sine(0.1, 0.2).declared_lipschitz == 0.2);
        CHECK(Perturbation::rational(-0.3).declared_lipschitz == 0.3);
    }

    TEST_CASE("lipschitz estimates stay below the catalog bound") {
        const std::vector<ScalarMap> catalog{
            ScalarMap::perturbed(0.5, Perturbation::sine(0.2)),
            ScalarMap::perturbed(0.3, Perturbation::rational(0.1)),
            ScalarMap::rational_bump(0.5, 0.9),
        };
        for (const auto& f : catalog) {
            const double est = estimate_lipschitz(f, Interval::symmetric(10.0), 801);
            CHECK(est <= f.lipschitz_bound() + 1e-12);
            CHECK(est > 0.0);
        }
        CHECK(estimate_lipschitz(ScalarMap::linear(-0.4), Interval::symmetric(10.0), 64) ==
              doctest::Approx(0.4));
    }

    TEST_CASE("slope interval classification") {
        CHECK(classify_slope_interval(0.5) == SlopeInterval::Contracting);
        CHECK(classify_slope_interval(-0.5) == SlopeInterval::ReversingContracting);
        CHECK(classify_slope_interval(3.0) == SlopeInterval::Expanding);
        CHECK(classify_slope_interval(-3.0) == SlopeInterval::ReversingExpanding);
        for (double s : {0.0, 1.0, -1.0}) CHECK(classify_slope_interval(s) == SlopeInterval::Boundary);
        CHECK(to_string(SlopeInterval::Expanding) == "(1,+inf)");
        CHECK(orientation(SlopeInterval::ReversingExpanding) == -1);
        CHECK(is_contracting(SlopeInterval::ReversingContracting));
    }

    TEST_CASE("inverse_image solves monotone maps beyond the start bracket") {
        const ScalarMap f = ScalarMap::linear(0.5);
        CHECK(*inverse_image(f, 10.0, 10.0) == doctest::Approx(20.0));
        const ScalarMap g = ScalarMap::perturbed(2.0, Perturbation::sine(0.5));
        for (double y = -30.0; y <= 30.0; y += 1.7) {
            const auto x = inverse_image(g, y, 10.0);
            REQUIRE(x);
            CHECK(g(*x) == doctest::Approx(y).epsilon(1e-14));
        }
    }

    TEST_CASE("descriptor equality is structural") {
        CHECK(linear_ifs({0.5, 0.6}) == linear_ifs({0.5, 0.6}));
        CHECK_FALSE(linear_ifs({0.5, 0.6}) == linear_ifs({0.6, 0.5}));
        CHECK(linear_ifs({0.5, 0.6}).linear_slopes() == std::vector<double>{0.5, 0.6});
        CHECK_THROWS(linear_ifs({0.5}).map(2));
    }
}
