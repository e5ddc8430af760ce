#pragma once

// Hausdorff distance and one-sided excess between point clouds.
//
// The accelerated path hashes the cells of the target cloud and searches
// Chebyshev shells of cells around each query, stopping once the next shell
// cannot contain anything closer. Distances are computed from cell centers by
// the same expression as the brute-force path, so both return bitwise-equal
// values.

#include "ifs_transit/parallel.hpp"
#include "ifs_transit/point_cloud.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace ifs_transit {

struct HausdorffResult {
    double distance = 0.0;
    double excess_ab = 0.0; ///< sup over a of dist(a, B)
    double excess_ba = 0.0; ///< sup over b of dist(b, A)
    Vector witness_a;       ///< point of a attaining excess_ab
    Vector witness_b;       ///< point of b attaining excess_ba
};

/// Open-addressing hash from cell keys to insertion indices.
class CellHash {
public:
    explicit CellHash(std::size_t dim, std::size_t expected = 16) : dim_(dim) {
        std::size_t cap = 16;
        while (cap < expected * 2) cap <<= 1;
        slots_.assign(cap, -1);
        lo_.assign(dim, std::numeric_limits<CellCoord>::max());
        hi_.assign(dim, std::numeric_limits<CellCoord>::min());
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return dim_ == 0 ? 0 : keys_.size() / dim_; }
    const CellCoord* key(std::size_t i) const { return keys_.data() + i * dim_; }
    std::span<const CellCoord> lo() const { return lo_; }
    std::span<const CellCoord> hi() const { return hi_; }

    std::int64_t find(const CellCoord* k) const {
        const std::size_t mask = slots_.size() - 1;
        for (std::size_t s = hash(k) & mask;; s = (s + 1) & mask) {
            const std::int64_t idx = slots_[s];
            if (idx < 0) return -1;
            if (std::equal(k, k + dim_, key(static_cast<std::size_t>(idx)))) return idx;
        }
    }

    /// Returns (index, inserted).
    std::pair<std::size_t, bool> insert(const CellCoord* k) {
        if ((size() + 1) * 2 > slots_.size()) grow();
        const std::size_t mask = slots_.size() - 1;
        for (std::size_t s = hash(k) & mask;; s = (s + 1) & mask) {
            const std::int64_t idx = slots_[s];
            if (idx < 0) {
                const std::size_t n = size();
                keys_.insert(keys_.end(), k, k + dim_);
                slots_[s] = static_cast<std::int64_t>(n);
                for (std::size_t j = 0; j < dim_; ++j) {
                    lo_[j] = std::min(lo_[j], k[j]);
                    hi_[j] = std::max(hi_[j], k[j]);
                }
                return {n, true};
            }
            if (std::equal(k, k + dim_, key(static_cast<std::size_t>(idx)))) {
                return {static_cast<std::size_t>(idx), false};
            }
        }
    }

private:
    std::size_t hash(const CellCoord* k) const noexcept {
        std::uint64_t h = 0x9E3779B97F4A7C15ull;
        for (std::size_t j = 0; j < dim_; ++j) {
            h ^= static_cast<std::uint64_t>(k[j]) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
            h *= 0xBF58476D1CE4E5B9ull;
            h ^= h >> 31;
        }
        return static_cast<std::size_t>(h);
    }

    void grow() {
        std::vector<std::int64_t> old(slots_.size() * 2, -1);
        slots_.swap(old);
        const std::size_t mask = slots_.size() - 1;
        for (std::size_t i = 0; i < size(); ++i) {
            std::size_t s = hash(key(i)) & mask;
            while (slots_[s] >= 0) s = (s + 1) & mask;
            slots_[s] = static_cast<std::int64_t>(i);
        }
    }

    std::size_t dim_;
    std::vector<CellCoord> keys_;
    std::vector<std::int64_t> slots_;
    std::vector<CellCoord> lo_, hi_;
};

namespace detail {

inline double center_of(CellCoord k, double eps) { return (static_cast<double>(k) + 0.5) * eps; }

inline double sq_dist_to_cell(const double* p, const CellCoord* k, std::size_t d, double eps) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double diff = p[j] - center_of(k[j], eps);
        s += diff * diff;
    }
    return s;
}

struct Nearest {
    double sq = std::numeric_limits<double>::infinity();
    std::size_t index = 0;
    bool below_cutoff = false; ///< search abandoned after finding something below the cutoff
};

inline void consider(Nearest& best, double sq, std::size_t idx) {
    if (sq < best.sq || (sq == best.sq && idx < best.index)) {
        best.sq = sq;
        best.index = idx;
    }
}

} // namespace detail

/// Nearest-cell queries against a CellHash whose cells have side `eps`.
class GridSearch {
public:
    GridSearch(const CellHash& cells, double eps) : cells_(cells), eps_(eps) {}

    /// Exact nearest center (ties to the lowest index) unless a center closer
    /// than sqrt(cutoff_sq) exists, in which case the search may stop early and
    /// report below_cutoff.
    detail::Nearest nearest(const double* p, double cutoff_sq = -1.0) const {
        const std::size_t d = cells_.dim();
        detail::Nearest best;
        if (cells_.size() == 0) return best;

        std::vector<CellCoord> c(d);
        CellCoord r_start = 0, r_end = 0;
        for (std::size_t j = 0; j < d; ++j) {
            c[j] = detail::cell_of(p[j], eps_);
            const CellCoord lo = cells_.lo()[j], hi = cells_.hi()[j];
            r_start = std::max(r_start, std::max(lo - c[j], c[j] - hi));
            r_end = std::max(r_end, std::max(c[j] - lo, hi - c[j]));
        }

        const std::size_t budget = 4 * cells_.size() + 64;
        std::size_t probes = 0;
        std::vector<CellCoord> k(d), from(d), to(d);
        for (CellCoord r = r_start; r <= r_end; ++r) {
            if (static_cast<long double>(probes) + shell_size(c, r) > static_cast<long double>(budget)) {
                probes = budget + 1;
                break;
            }
            for_each_shell_cell(c, r, k, from, to, [&](const CellCoord* key) {
                ++probes;
                const std::int64_t idx = cells_.find(key);
                if (idx >= 0) detail::consider(best, detail::sq_dist_to_cell(p, key, d, eps_), static_cast<std::size_t>(idx));
            });
            if (best.sq < cutoff_sq) {
                best.below_cutoff = true;
                return best;
            }
            // Cells in shell r+1 lie at least (r + 1/2) eps away along one axis.
            const double bound = (static_cast<double>(r) + 0.5) * eps_;
            if (best.sq < bound * bound * (1.0 - 1e-12)) return best;
            if (probes > budget) break;
        }
        if (probes > budget) {
            best = {};
            for (std::size_t i = 0; i < cells_.size(); ++i) {
                detail::consider(best, detail::sq_dist_to_cell(p, cells_.key(i), d, eps_), i);
            }
        }
        return best;
    }

    /// Exact nearest center when one is found within `max_shell` shells of the
    /// first occupied-box shell (and each shell is small); otherwise a lower
    /// bound on the distance.
    detail::Nearest nearest_within(const double* p, CellCoord max_shell) const {
        const std::size_t d = cells_.dim();
        detail::Nearest best;
        if (cells_.size() == 0) return best;
        std::vector<CellCoord> c(d), k(d), from(d), to(d);
        CellCoord r_start = 0;
        for (std::size_t j = 0; j < d; ++j) {
            c[j] = detail::cell_of(p[j], eps_);
            r_start = std::max(r_start, std::max(cells_.lo()[j] - c[j], c[j] - cells_.hi()[j]));
        }
        constexpr long double shell_cap = 65536.0L;
        CellCoord r = r_start;
        for (; r <= r_start + max_shell && shell_size(c, r) <= shell_cap; ++r) {
            for_each_shell_cell(c, r, k, from, to, [&](const CellCoord* key) {
                const std::int64_t idx = cells_.find(key);
                if (idx >= 0) detail::consider(best, detail::sq_dist_to_cell(p, key, d, eps_), static_cast<std::size_t>(idx));
            });
            const double bound = (static_cast<double>(r) + 0.5) * eps_;
            if (best.sq < bound * bound * (1.0 - 1e-12)) return best;
        }
        // Unvisited shells start at index r, at least (r - 1/2) eps away.
        const double bound = std::max(0.0, static_cast<double>(r) - 0.5) * eps_;
        if (!(best.sq < bound * bound)) best.sq = bound * bound;
        return best;
    }

private:
    // Number of cells for_each_shell_cell visits for (c, r).
    long double shell_size(const std::vector<CellCoord>& c, CellCoord r) const {
        const std::size_t d = c.size();
        const auto lo = cells_.lo();
        const auto hi = cells_.hi();
        if (r == 0) return 1.0L;
        long double total = 0.0L;
        for (std::size_t a = 0; a < d; ++a) {
            for (int side = -1; side <= 1; side += 2) {
                const CellCoord ka = c[a] + side * r;
                if (ka < lo[a] || ka > hi[a]) continue;
                long double face = 1.0L;
                for (std::size_t j = 0; j < d && face > 0.0L; ++j) {
                    if (j == a) continue;
                    const CellCoord inner = j < a ? r - 1 : r;
                    const CellCoord from = std::max(lo[j], c[j] - inner);
                    const CellCoord to = std::min(hi[j], c[j] + inner);
                    face *= from > to ? 0.0L : static_cast<long double>(to - from) + 1.0L;
                }
                total += face;
            }
        }
        return total;
    }

    // Enumerates cells at Chebyshev distance exactly r from c, clipped to the
    // occupied bounding box. Axis `a` is the first axis at distance r, which
    // partitions the shell.
    template <class Fn>
    void for_each_shell_cell(const std::vector<CellCoord>& c, CellCoord r, std::vector<CellCoord>& k,
                             std::vector<CellCoord>& from, std::vector<CellCoord>& to, Fn&& fn) const {
        const std::size_t d = c.size();
        const auto lo = cells_.lo();
        const auto hi = cells_.hi();
        if (r == 0) {
            for (std::size_t j = 0; j < d; ++j) {
                if (c[j] < lo[j] || c[j] > hi[j]) return;
            }
            fn(c.data());
            return;
        }
        for (std::size_t a = 0; a < d; ++a) {
            for (int side = -1; side <= 1; side += 2) {
                const CellCoord ka = c[a] + side * r;
                if (ka < lo[a] || ka > hi[a]) continue;
                bool empty = false;
                for (std::size_t j = 0; j < d; ++j) {
                    if (j == a) {
                        from[j] = to[j] = ka;
                    } else {
                        const CellCoord inner = j < a ? r - 1 : r;
                        from[j] = std::max(lo[j], c[j] - inner);
                        to[j] = std::min(hi[j], c[j] + inner);
                    }
                    if (from[j] > to[j]) empty = true;
                }
                if (empty) continue;
                k = from;
                while (true) {
                    fn(k.data());
                    std::size_t j = d;
                    while (j > 0) {
                        --j;
                        if (k[j] < to[j]) {
                            ++k[j];
                            break;
                        }
                        k[j] = from[j];
                        if (j == 0) {
                            j = d + 1;
                            break;
                        }
                    }
                    if (j == d + 1 || d == 0) break;
                }
            }
        }
    }

    const CellHash& cells_;
    double eps_;
};

inline CellHash hash_cells(const PointCloud& cloud) {
    CellHash h(cloud.dim(), cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) h.insert(cloud.cell(i).data());
    return h;
}

namespace detail {

struct ExcessResult {
    double value = 0.0;
    std::size_t from_index = 0; ///< point of a attaining the excess
    std::size_t to_index = 0;   ///< its nearest point in b
};

inline void check_pair(const PointCloud& a, const PointCloud& b) {
    if (a.empty() || b.empty()) fail(ErrorKind::empty_cloud, "Hausdorff distance needs nonempty clouds");
    require_same_dim(a.dim(), b.dim(), "excess");
}

inline ExcessResult excess_brute_force(const PointCloud& a, const PointCloud& b) {
    check_pair(a, b);
    const std::size_t d = a.dim();
    std::vector<double> p(d);
    double best_sq = -1.0;
    ExcessResult res;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) p[j] = a.center_coord(i, j);
        Nearest n;
        for (std::size_t k = 0; k < b.size(); ++k) {
            consider(n, sq_dist_to_cell(p.data(), b.cell(k).data(), d, b.resolution()), k);
        }
        if (n.sq > best_sq) {
            best_sq = n.sq;
            res.from_index = i;
            res.to_index = n.index;
        }
    }
    res.value = std::sqrt(best_sq);
    return res;
}

inline ExcessResult excess_grid(const PointCloud& a, const PointCloud& b, unsigned threads) {
    check_pair(a, b);
    const std::size_t d = a.dim();
    const CellHash index = hash_cells(b);
    const GridSearch search(index, b.resolution());

    struct Partial {
        double sq = -1.0;
        std::size_t from = 0, to = 0;
    };
    std::vector<Partial> partial(chunk_count(a.size(), threads));
    parallel_chunks(a.size(), threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        Partial best;
        std::vector<double> p(d);
        auto visit = [&](std::size_t i) {
            for (std::size_t j = 0; j < d; ++j) p[j] = a.center_coord(i, j);
            // Anything strictly below the running max cannot change the result.
            const Nearest n = search.nearest(p.data(), best.sq);
            if (n.below_cutoff) return;
            if (n.sq > best.sq || (n.sq == best.sq && i < best.from)) best = {n.sq, i, n.index};
        };
        // A coarse pass first raises the cutoff so most later queries stop early.
        const std::size_t stride = std::max<std::size_t>(1, (end - begin) / 64);
        for (std::size_t i = begin; i < end; i += stride) visit(i);
        for (std::size_t i = begin; i < end; ++i) visit(i);
        partial[chunk] = best;
    });

    Partial best;
    for (const auto& p : partial) {
        if (p.sq > best.sq || (p.sq == best.sq && p.from < best.from)) best = p;
    }
    return {std::sqrt(best.sq), best.from, best.to};
}

} // namespace detail

/// sup over a of dist(a, B), grid accelerated.
inline double excess(const PointCloud& a, const PointCloud& b, unsigned threads = 1) {
    return detail::excess_grid(a, b, threads).value;
}

/// O(nm) reference for excess().
inline double excess_brute_force(const PointCloud& a, const PointCloud& b) {
    return detail::excess_brute_force(a, b).value;
}

inline HausdorffResult hausdorff(const PointCloud& a, const PointCloud& b, unsigned threads = 1) {
    const auto ab = detail::excess_grid(a, b, threads);
    const auto ba = detail::excess_grid(b, a, threads);
    return {std::max(ab.value, ba.value), ab.value, ba.value, a.center(ab.from_index), b.center(ba.from_index)};
}

inline HausdorffResult hausdorff_brute_force(const PointCloud& a, const PointCloud& b) {
    const auto ab = detail::excess_brute_force(a, b);
    const auto ba = detail::excess_brute_force(b, a);
    return {std::max(ab.value, ba.value), ab.value, ba.value, a.center(ab.from_index), b.center(ba.from_index)};
}

} // namespace ifs_transit
