#include "ifs_transit/metric.hpp"
#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace ifs_transit;
using Catch::Matchers::WithinAbs;

namespace {

// Pairwise excess over centers, written independently of the library's loops.
double pairwise_excess(const PointCloud& a, const PointCloud& b) {
    double worst = 0.0;
    for (const auto& p : a.points()) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : b.points()) best = std::min(best, distance(p, q));
        worst = std::max(worst, best);
    }
    return worst;
}

PointCloud random_cloud(std::mt19937_64& rng, std::size_t d, std::size_t n, double spread, double eps, Vector shift) {
    std::vector<Vector> pts;
    for (std::size_t i = 0; i < n; ++i) {
        Vector p = test_support::random_vector(rng, d, spread);
        p += shift;
        pts.push_back(p);
    }
    return quantize(pts, eps);
}

PointCloud translated(const PointCloud& c, const Vector& v) {
    std::vector<Vector> pts = c.points();
    for (auto& p : pts) p += v;
    return quantize(pts, c.resolution());
}

} // namespace

TEST_CASE("excess examples") {
    const double eps = 1e-3;
    const PointCloud a = quantize({Vector{0.0}}, eps);
    const PointCloud b = quantize({Vector{3.0}}, eps);
    CHECK(excess(a, a) == 0.0);
    CHECK_THAT(excess(a, b), WithinAbs(3.0, 1e-12));

    const PointCloud c = quantize({Vector{0.0}, Vector{1.0}}, eps);
    const PointCloud e = quantize({Vector{0.0}, Vector{4.0}}, eps);
    CHECK(excess(c, e) == pairwise_excess(c, e));
    CHECK(excess(e, c) == pairwise_excess(e, c));
}

TEST_CASE("hausdorff examples and witnesses") {
    const double eps = 1e-3;
    const PointCloud a = quantize({Vector{0.0}}, eps);
    const PointCloud b = quantize({Vector{3.0}}, eps);
    const auto h = hausdorff(a, b);
    CHECK_THAT(h.distance, WithinAbs(3.0, 1e-12));
    CHECK(h.witness_a == a.center(0));
    CHECK(h.witness_b == b.center(0));

    // Samplings of [0, 1] and [0, 2].
    const double step = 0.01;
    std::vector<Vector> s1, s2;
    for (int i = 0; i <= 100; ++i) s1.push_back(Vector{i * step});
    for (int i = 0; i <= 200; ++i) s2.push_back(Vector{i * step});
    const auto hi = hausdorff(quantize(s1, step), quantize(s2, step));
    CHECK(std::abs(hi.distance - 1.0) <= 2 * step);
    CHECK(hi.excess_ab < step);
}

TEST_CASE("empty and mismatched clouds are rejected") {
    const PointCloud a = quantize({Vector{0.0}}, 0.1);
    const PointCloud b = quantize({Vector{0.0, 0.0}}, 0.1);
    CHECK_THROWS_AS(hausdorff(a, b), Error);
    CHECK_THROWS_AS(excess(PointCloud{}, a), Error);
}

TEST_CASE("grid search matches brute force bit for bit") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> count(1, 2000);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t d = 1 + trial % 3;
        const double eps = trial % 2 ? 0.01 : 0.05;
        // Mix overlapping, nested and far-apart pairs.
        Vector shift(d);
        if (trial % 5 == 0) shift[0] = 3.0;
        const PointCloud a = random_cloud(rng, d, count(rng), 1.0, eps, Vector(d));
        const PointCloud b = random_cloud(rng, d, count(rng), trial % 7 == 0 ? 0.2 : 1.0, eps, shift);
        const auto fast = hausdorff(a, b);
        const auto slow = hausdorff_brute_force(a, b);
        CHECK(fast.distance == slow.distance);
        CHECK(fast.excess_ab == slow.excess_ab);
        CHECK(fast.excess_ba == slow.excess_ba);
        CHECK(fast.witness_a == slow.witness_a);
        CHECK(fast.witness_b == slow.witness_b);
    }
}

TEST_CASE("brute force agrees with an independent pairwise loop") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const PointCloud a = random_cloud(rng, 2, 300, 1.0, 0.02, Vector(2));
        const PointCloud b = random_cloud(rng, 2, 200, 0.5, 0.02, Vector{0.3, 0.0});
        CHECK_THAT(excess_brute_force(a, b), WithinAbs(pairwise_excess(a, b), 1e-12));
    }
}

TEST_CASE("hausdorff is symmetric and satisfies the triangle inequality") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = 1 + trial % 3;
        const PointCloud a = random_cloud(rng, d, 400, 1.0, 0.02, Vector(d));
        const PointCloud b = random_cloud(rng, d, 300, 0.7, 0.02, test_support::random_vector(rng, d, 0.5));
        const PointCloud c = random_cloud(rng, d, 200, 1.3, 0.02, test_support::random_vector(rng, d, 0.5));
        const double ab = hausdorff(a, b).distance, bc = hausdorff(b, c).distance, ac = hausdorff(a, c).distance;
        CHECK(ab == hausdorff(b, a).distance);
        CHECK(ac <= ab + bc + 1e-9);
    }
}

TEST_CASE("hausdorff is translation invariant") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        const double eps = 0.02;
        const PointCloud a = random_cloud(rng, 2, 300, 1.0, eps, Vector(2));
        const PointCloud b = random_cloud(rng, 2, 300, 1.0, eps, Vector{0.5, 0.0});
        // Whole-cell shifts keep the quantization exact.
        const Vector v{7 * eps, -3 * eps};
        CHECK_THAT(hausdorff(translated(a, v), translated(b, v)).distance, WithinAbs(hausdorff(a, b).distance, 1e-9));
    }
}

TEST_CASE("results do not depend on the thread count") {
    std::mt19937_64 rng(5);
    const PointCloud a = random_cloud(rng, 3, 20000, 1.0, 0.01, Vector(3));
    const PointCloud b = random_cloud(rng, 3, 15000, 1.0, 0.01, Vector{0.2, 0.0, 0.0});
    const auto one = hausdorff(a, b, 1);
    for (unsigned threads : {2u, 3u, 8u}) {
        const auto many = hausdorff(a, b, threads);
        CHECK(many.distance == one.distance);
        CHECK(many.witness_a == one.witness_a);
        CHECK(many.witness_b == one.witness_b);
    }
}

TEST_CASE("far-away query points fall back without enumerating huge shells") {
    const PointCloud a = quantize({Vector{0.0, 0.0, 0.0}}, 0.02);
    const PointCloud b = quantize({Vector{1e6, 2e5, -3e5}, Vector{0.01, 0.0, 0.0}}, 0.02);
    CHECK(excess(b, a) == excess_brute_force(b, a));
    CHECK(excess(a, b) == excess_brute_force(a, b));
}
