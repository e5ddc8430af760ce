#include "ifs_transit/hutch.hpp"
#include "ifs_transit/jsr.hpp"
#include "ifs_transit/scenario.hpp"
#include "oracles/oracle_values.hpp"
#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

using namespace ifs_transit;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const ParamFamily& family_of(const std::string& name) { return *builtin_scenario(name).family; }

Matrix planar_rotation(double a) { return Matrix{{std::cos(a), -std::sin(a)}, {std::sin(a), std::cos(a)}}; }

} // namespace

TEST_CASE("single matrices give their spectral radius") {
    const std::vector<Matrix> half{0.5 * Matrix::identity(2)};
    CHECK(jsr_lower(half, 1).value == 0.5);
    CHECK(jsr_upper(half, 1) == 0.5);

    const std::vector<Matrix> l2{family_of("linear2d")[1].linear()};
    CHECK_THAT(jsr_lower(l2, 1).value, WithinRel(oracle::linear2d_l2_spectral_radius, 1e-9));
    CHECK(jsr_upper(l2, 12) >= oracle::linear2d_l2_spectral_radius - 1e-9);
    CHECK(jsr_upper(l2, 1) == Catch::Approx(oracle::linear2d_l2_spectral_norm).epsilon(1e-10));
}

TEST_CASE("orthogonal sets have radius one") {
    const std::vector<Matrix> rots{planar_rotation(0.3), planar_rotation(1.0), Matrix{{1, 0}, {0, -1}}};
    CHECK_THAT(jsr_lower(rots, 1).value, WithinAbs(1.0, 1e-12));
    CHECK_THAT(jsr_upper(rots, 1), WithinAbs(1.0, 1e-12));

    const auto intro = jsr_bounds(family_of("intro3d").linear_parts(), 1);
    CHECK_THAT(intro.lower, WithinAbs(1.0, 1e-12));
    CHECK_THAT(intro.upper, WithinAbs(1.0, 1e-12));

    const auto dream = jsr_bounds(family_of("dream3d").linear_parts(), 1);
    CHECK_THAT(dream.lower, WithinAbs(1.0, 1e-12));
    CHECK_THAT(dream.upper, WithinAbs(1.0, 1e-12));
}

TEST_CASE("threshold examples") {
    const ParamFamily half(2, {ParamAffineMap(0.5 * Matrix::identity(2), Vector(2), Vector(2))});
    const auto th = threshold(half);
    CHECK(th.t_lo == 2.0);
    CHECK(th.t_hi == 2.0);

    for (const char* name : {"intro3d", "dream3d"}) {
        const auto t = threshold(family_of(name), 4);
        CHECK_THAT(t.t_lo, WithinAbs(1.0, 1e-9));
        CHECK_THAT(t.t_hi, WithinAbs(1.0, 1e-9));
    }

    const ParamFamily nil(2, {ParamAffineMap(Matrix{{0, 1}, {0, 0}}, Vector(2), Vector(2))});
    CHECK(threshold(nil, 4).t_hi == std::numeric_limits<double>::infinity());

    CHECK_THROWS_AS(threshold(family_of("evcontr")), Error);
    CHECK_THROWS_AS(jsr_lower({}, 3), Error);
    CHECK_THROWS_AS(jsr_upper({}, 3), Error);
}

TEST_CASE("lower witness word attains the bound") {
    const auto& mats = family_of("linear2d").linear_parts();
    const auto low = jsr_lower(mats, 8);
    REQUIRE_FALSE(low.word.empty());
    Matrix prod = Matrix::identity(2);
    for (std::size_t i : low.word) prod = prod * mats[i];
    CHECK_THAT(std::pow(spectral_radius(prod), 1.0 / double(low.word.size())), WithinRel(low.value, 1e-9));
}

TEST_CASE("bounds bracket, refine monotonically and scale") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t d = 2 + trial % 2;
        std::vector<Matrix> mats;
        for (int i = 0; i < 2 + trial % 2; ++i) mats.push_back(test_support::random_matrix(rng, d));
        double prev_lo = 0.0, prev_hi = std::numeric_limits<double>::infinity();
        for (std::size_t depth = 1; depth <= 6; ++depth) {
            const double lo = jsr_lower(mats, depth).value;
            const double hi = jsr_upper(mats, depth, 0.0);
            CHECK(lo <= hi + 1e-9);
            CHECK(lo >= prev_lo - 1e-12);
            CHECK(hi <= prev_hi + 1e-12);
            prev_lo = lo;
            prev_hi = hi;
        }
        const double c = 0.37;
        std::vector<Matrix> scaled;
        for (const auto& m : mats) scaled.push_back(c * m);
        CHECK_THAT(jsr_lower(scaled, 5).value, WithinAbs(c * jsr_lower(mats, 5).value, 1e-9));
        CHECK_THAT(jsr_upper(scaled, 5, 0.0), WithinAbs(c * jsr_upper(mats, 5, 0.0), 1e-9));
    }
}

TEST_CASE("catalog dynamics agree with the threshold") {
    for (const char* name : {"intro3d", "halfline", "linear2d"}) {
        DYNAMIC_SECTION(name) {
            const ParamFamily& fam = family_of(name);
            const auto th = threshold(fam);
            const double eps = 0.05;
            const auto below = attractor_deterministic(instantiate(fam, 0.95 * th.t_lo), eps, eps, 100000, 1e6);
            CHECK(below.trace.converged);
            const IfsSystem above = instantiate(fam, 1.1 * th.t_hi);
            // The origin is invariant for linear families, so seed off it too.
            std::vector<Vector> seed;
            for (const auto& f : above.maps()) seed.push_back(fixed_point(f));
            seed.push_back(Vector(fam.dim(), 1.0));
            const auto up = attractor_deterministic(above, quantize(seed, eps), eps, 100000, 10.0);
            CHECK(up.trace.diverged);
        }
    }
}
