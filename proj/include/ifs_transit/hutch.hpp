#pragma once

// Hutchinson operator on grid clouds, attractor solvers, and the accumulated
// orbit construction used for lower transition sets.

#include "ifs_transit/metric.hpp"
#include "ifs_transit/parallel.hpp"
#include "ifs_transit/point_cloud.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace ifs_transit {

struct IterationTrace {
    std::vector<double> residuals; ///< h(K_{n+1}, K_n) per step
    std::vector<double> radii;     ///< bounding radius of K_{n+1} per step
    bool converged = false;
    bool diverged = false;
    std::size_t iterations = 0;
};

struct AttractorResult {
    PointCloud cloud;
    IterationTrace trace;
};

namespace detail {

inline double rep_radius(const PointCloud& k) {
    const auto& r = k.representatives();
    const std::size_t d = k.dim();
    double best = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += r[i * d + j] * r[i * d + j];
        best = std::max(best, s);
    }
    return std::sqrt(best);
}

// Images of `count` points at `src` under every map, map-major.
inline std::vector<double> apply_all(const IfsSystem& ifs, const double* src, std::size_t count, unsigned threads) {
    const std::size_t d = ifs.dim();
    const std::size_t n_maps = ifs.size();
    std::vector<double> out(n_maps * count * d);
    parallel_chunks(count, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t m = 0; m < n_maps; ++m) {
            const AffineMap& f = ifs[m];
            double* dst = out.data() + m * count * d;
            for (std::size_t i = begin; i < end; ++i) f.apply(src + i * d, dst + i * d);
        }
    });
    return out;
}

} // namespace detail

/// quantize of the union of all map images of k, at k's resolution.
inline PointCloud hutchinson_step(const IfsSystem& ifs, const PointCloud& k, unsigned threads = 1) {
    if (k.empty()) fail(ErrorKind::empty_cloud, "hutchinson_step on an empty cloud");
    require_same_dim(ifs.dim(), k.dim(), "hutchinson_step");
    const auto images = detail::apply_all(ifs, k.representatives().data(), k.size(), threads);
    return quantize_flat(k.dim(), images, k.resolution());
}

/// h(F(a), a).
inline double invariance_residual(const IfsSystem& ifs, const PointCloud& a, unsigned threads = 1) {
    return hausdorff(hutchinson_step(ifs, a, threads), a, threads).distance;
}

/// Fixed points of the invertible maps; the origin if none has one.
inline PointCloud default_seed(const IfsSystem& ifs, double eps) {
    std::vector<Vector> pts;
    for (const auto& f : ifs.maps()) {
        try {
            pts.push_back(fixed_point(f));
        } catch (const Error&) {
        }
    }
    if (pts.empty()) pts.emplace_back(ifs.dim());
    return quantize(pts, eps);
}

/// Clouds larger than this are re-quantized at twice the cell size, so that
/// runaway (expanding) iterations reach the divergence radius in bounded memory.
inline constexpr std::size_t default_cell_budget = std::size_t{1} << 21;

namespace detail {

inline PointCloud coarsen(const PointCloud& k) {
    return quantize_flat(k.dim(), k.representatives(), 2.0 * k.resolution());
}

// Shells searched around a new cell when measuring its distance to the
// accumulated set; farther distances are recorded as the window's lower bound.
inline constexpr CellCoord residual_window = 6;

struct Accumulation {
    PointCloud cloud;
    IterationTrace trace;
};

// U_{n+1} = U_n u F(U_n) starting from `start`. Only cells added in the
// previous round are mapped again, since the images of older cells are already
// present. Stops when a round adds no cell, when the largest distance from a
// new cell to U_n is at most `stop_residual`, or when the radius passes r_max.
inline Accumulation accumulate(const IfsSystem& ifs, const PointCloud& start, std::size_t max_iter, double r_max,
                               double stop_residual, unsigned threads,
                               std::size_t cell_budget = default_cell_budget) {
    const std::size_t d = ifs.dim();
    double eps = start.resolution();
    Accumulation res;
    CellHash cells(d, 1024);
    std::vector<double> reps;
    std::vector<double> frontier;
    double radius2 = 0.0;
    auto admit = [&](const double* p, const CellCoord* key) {
        if (cells.insert(key).second) {
            reps.insert(reps.end(), p, p + d);
            frontier.insert(frontier.end(), p, p + d);
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += p[j] * p[j];
            radius2 = std::max(radius2, s);
        }
    };
    for (std::size_t i = 0; i < start.size(); ++i) admit(start.representative(i).data(), start.cell(i).data());

    while (true) {
        if (std::sqrt(radius2) > r_max || !std::isfinite(radius2)) {
            res.trace.diverged = true;
            break;
        }
        if (res.trace.iterations >= max_iter) break;
        const std::vector<double> current = std::move(frontier);
        frontier.clear();
        // Quantizing the batch gives each new cell a representative that does
        // not depend on the order of the images.
        const auto images = apply_all(ifs, current.data(), current.size() / d, threads);
        const PointCloud batch = quantize_flat(d, images, eps);
        std::vector<std::size_t> fresh;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            if (cells.find(batch.cell(i).data()) < 0) fresh.push_back(i);
        }
        double residual = 0.0;
        {
            const GridSearch search(cells, eps);
            for (std::size_t i : fresh) {
                const Vector c = batch.center(i);
                residual = std::max(residual, std::sqrt(search.nearest_within(c.data(), residual_window).sq));
            }
        }
        for (std::size_t i : fresh) admit(batch.representative(i).data(), batch.cell(i).data());
        while (cells.size() > cell_budget) {
            eps *= 2.0;
            const PointCloud all = quantize_flat(d, reps, eps);
            const PointCloud front = quantize_flat(d, frontier, eps);
            cells = CellHash(d, all.size());
            for (std::size_t i = 0; i < all.size(); ++i) cells.insert(all.cell(i).data());
            reps = all.representatives();
            frontier.clear();
            for (std::size_t i = 0; i < front.size(); ++i) {
                // Keep frontier points that still represent their coarse cell.
                const auto key = front.cell(i);
                const auto idx = all.find(key);
                if (idx) {
                    const auto r = all.representative(*idx);
                    frontier.insert(frontier.end(), r.begin(), r.end());
                }
            }
        }
        ++res.trace.iterations;
        res.trace.residuals.push_back(residual);
        res.trace.radii.push_back(std::sqrt(radius2));
        if (fresh.empty() || residual <= stop_residual) {
            if (!(std::sqrt(radius2) > r_max)) res.trace.converged = true;
            else res.trace.diverged = true;
            break;
        }
    }
    res.cloud = quantize_flat(d, reps, eps);
    return res;
}

// Whether every seed point has a map image in its own cell or a neighbouring
// one, i.e. seed is contained in F(seed) up to one cell. The Hutchinson
// iterates of such a seed are nested.
inline bool nearly_subinvariant(const IfsSystem& ifs, const PointCloud& seed) {
    const PointCloud image = hutchinson_step(ifs, seed);
    const double slack = std::sqrt(static_cast<double>(seed.dim())) * seed.resolution() * (1.0 + 1e-9);
    return excess(seed, image) <= slack;
}

inline double rounding_slack(double tol) { return tol * (1.0 + 1e-9); }

// F together with f^2, f^4, ... for every map f with Lip(f) >= 1/2: for
// contractions up to the first power with Lip <= 1/4, for expansions up to the
// first power with Lip >= 2^16. The orbit of a seed under the enlarged system
// is the orbit under the same monoid, so the accumulated set is unchanged; the
// powers let slow maps cross cells that their single steps never leave, and
// let expanding maps reach the divergence radius in few rounds.
inline IfsSystem with_power_shortcuts(const IfsSystem& ifs) {
    std::vector<AffineMap> maps = ifs.maps();
    for (const auto& f : ifs.maps()) {
        double lip = lipschitz(f);
        if (!(lip >= 0.5) || std::abs(lip - 1.0) <= 1e-12) continue;
        AffineMap power = f;
        // A map may expand while its square contracts, so the rule is
        // re-evaluated at every power.
        for (int j = 0; j < 60 && std::abs(lip - 1.0) > 1e-12 && (lip > 1.0 ? lip < 65536.0 : lip > 0.25); ++j) {
            power = compose(power, power);
            if (!power.linear().all_finite() || !power.offset().all_finite()) break;
            lip = lipschitz(power);
            maps.push_back(power);
        }
    }
    return {ifs.dim(), std::move(maps)};
}

} // namespace detail

/// Attractor by Hutchinson iteration from `seed`.
///
/// When the seed lies in its own image (as the fixed points of the maps do),
/// the iterates are nested and are built by accumulating new cells only; the
/// solve stops when a step adds nothing or the step residual is at most
/// tol * (1 - L) for a Euclidean contraction factor L < 1, which bounds the
/// distance to the attractor by tol. Otherwise whole clouds are iterated until
/// h(K_{n+1}, K_n) <= tol.
inline AttractorResult attractor_deterministic(const IfsSystem& ifs, const PointCloud& seed, double tol,
                                               std::size_t max_iter, double r_max, unsigned threads = 1) {
    if (!(tol > 0.0)) fail(ErrorKind::invalid_argument, "tol must be positive");
    if (!(r_max > 0.0)) fail(ErrorKind::invalid_argument, "r_max must be positive");
    if (seed.empty()) fail(ErrorKind::empty_cloud, "seed cloud is empty");
    require_same_dim(ifs.dim(), seed.dim(), "attractor_deterministic");

    AttractorResult res{seed, {}};
    if (detail::rep_radius(seed) > r_max) {
        res.trace.diverged = true;
        return res;
    }
    if (detail::nearly_subinvariant(ifs, seed)) {
        const double lip = ifs.max_lipschitz();
        const double stop = lip < 1.0 ? tol * (1.0 - lip) : tol;
        auto acc = detail::accumulate(detail::with_power_shortcuts(ifs), seed, max_iter, r_max, detail::rounding_slack(stop), threads);
        return {std::move(acc.cloud), std::move(acc.trace)};
    }
    for (std::size_t n = 0; n < max_iter; ++n) {
        PointCloud next = hutchinson_step(ifs, res.cloud, threads);
        while (next.size() > default_cell_budget) {
            next = detail::coarsen(next);
            res.cloud = detail::coarsen(res.cloud);
        }
        const double radius = detail::rep_radius(next);
        ++res.trace.iterations;
        res.trace.radii.push_back(radius);
        if (radius > r_max || !std::isfinite(radius)) {
            res.trace.residuals.push_back(std::numeric_limits<double>::infinity());
            res.trace.diverged = true;
            res.cloud = std::move(next);
            return res;
        }
        const double r = next == res.cloud ? 0.0 : hausdorff(next, res.cloud, threads).distance;
        res.trace.residuals.push_back(r);
        res.cloud = std::move(next);
        if (r <= detail::rounding_slack(tol)) {
            res.trace.converged = true;
            return res;
        }
    }
    return res;
}

/// Attractor from the default seed (the fixed points of the maps).
inline AttractorResult attractor_deterministic(const IfsSystem& ifs, double eps, double tol, std::size_t max_iter,
                                               double r_max, unsigned threads = 1) {
    return attractor_deterministic(ifs, default_seed(ifs, eps), tol, max_iter, r_max, threads);
}

/// Number of independent random-iteration chains. Fixed so that the output does
/// not depend on how many threads run them.
inline constexpr std::size_t chaos_chains = 16;

inline PointCloud attractor_chaos(const IfsSystem& ifs, std::size_t n_points, std::size_t burn_in,
                                  std::uint64_t rng_seed, double eps, unsigned threads = 1) {
    if (n_points == 0) fail(ErrorKind::invalid_argument, "n_points must be positive");
    if (!(eps > 0.0)) fail(ErrorKind::invalid_argument, "resolution must be positive");
    for (std::size_t i = 0; i < ifs.size(); ++i) {
        const double lip = lipschitz(ifs[i]);
        if (!(lip < 1.0)) {
            fail(ErrorKind::non_contractive,
                 "chaos game needs contractions; map " + std::to_string(i) + " has Lipschitz constant " + std::to_string(lip));
        }
    }
    const std::size_t d = ifs.dim();
    const std::size_t chains = std::min(chaos_chains, n_points);
    std::vector<PointCloud> parts(chains);
    parallel_chunks(chains, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<double> x(d), y(d);
        for (std::size_t c = begin; c < end; ++c) {
            std::seed_seq seq{static_cast<std::uint32_t>(rng_seed), static_cast<std::uint32_t>(rng_seed >> 32),
                              static_cast<std::uint32_t>(c)};
            std::mt19937_64 rng(seq);
            const std::size_t count = n_points / chains + (c < n_points % chains ? 1 : 0);
            std::vector<double> pts;
            pts.reserve(count * d);
            std::fill(x.begin(), x.end(), 0.0);
            for (std::size_t s = 0; s < burn_in + count; ++s) {
                ifs[rng() % ifs.size()].apply(x.data(), y.data());
                x.swap(y);
                if (s >= burn_in) pts.insert(pts.end(), x.begin(), x.end());
            }
            parts[c] = quantize_flat(d, pts, eps);
        }
    });
    return merge(parts);
}

/// The limit maps together with constant maps at the chosen anchors.
struct AugmentedIfs {
    IfsSystem base;
    std::vector<Vector> anchors;
};

struct LowerResult {
    std::optional<PointCloud> cloud; ///< empty when the accumulation was unbounded or inconclusive
    PointCloud accumulated;          ///< the last U_n reached, whatever the outcome
    bool unbounded = false;
    IterationTrace trace;
};

/// Accumulates U_{n+1} = U_n u F(U_n) from the anchors until no new cell
/// appears; unbounded once the radius passes r_max.
inline LowerResult lower_transition(const AugmentedIfs& aug, double eps, std::size_t max_iter, double r_max,
                                    unsigned threads = 1) {
    if (!(eps > 0.0)) fail(ErrorKind::invalid_argument, "resolution must be positive");
    if (!(r_max > 0.0)) fail(ErrorKind::invalid_argument, "r_max must be positive");
    if (aug.anchors.empty()) fail(ErrorKind::invalid_argument, "anchor set is empty");
    for (const auto& q : aug.anchors) require_same_dim(aug.base.dim(), q.dim(), "anchor");

    // The constant maps only ever contribute the anchors, which are the start set.
    auto acc = detail::accumulate(aug.base, quantize(aug.anchors, eps), max_iter, r_max, -1.0, threads);
    LowerResult res;
    res.trace = std::move(acc.trace);
    res.unbounded = res.trace.diverged;
    res.accumulated = std::move(acc.cloud);
    if (res.trace.converged) res.cloud = res.accumulated;
    return res;
}

} // namespace ifs_transit
