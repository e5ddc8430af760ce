#pragma once

// Bounds on the joint spectral radius of a finite matrix set, and the
// existence threshold of an affine family derived from them.

#include "ifs_transit/core.hpp"
#include "ifs_transit/param.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace ifs_transit {

struct JsrBounds {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t depth = 0;           ///< longest product length explored
    std::vector<std::size_t> word;   ///< product attaining `lower`, left to right
};

struct ThresholdEstimate {
    double t_lo = 0.0; ///< 1 / upper
    double t_hi = 0.0; ///< 1 / lower, +inf when lower = 0
};

struct LowerBound {
    double value = 0.0;
    std::vector<std::size_t> word;
};

namespace detail {

inline void require_matrices(const std::vector<Matrix>& mats) {
    if (mats.empty()) fail(ErrorKind::invalid_argument, "matrix set is empty");
    for (const auto& m : mats) require_same_dim(mats.front().dim(), m.dim(), "matrix set");
}

inline double root(double value, std::size_t k) {
    return k == 1 ? value : std::pow(value, 1.0 / static_cast<double>(k));
}

// True when no proper rotation of `word` is lexicographically smaller or
// equal, i.e. `word` is a Lyndon word. Rotations share a spectral radius and a
// periodic word has the same normalized radius as its primitive root, so these
// are the only words worth evaluating.
inline bool is_lyndon(const std::vector<std::size_t>& word) {
    const std::size_t n = word.size();
    for (std::size_t r = 1; r < n; ++r) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t a = word[i], b = word[(i + r) % n];
            if (b < a) return false;
            if (a < b) break;
            if (i + 1 == n) return false; // periodic
        }
    }
    return true;
}

} // namespace detail

/// max over words w with |w| <= depth of rho(A_w)^(1/|w|). Words are
/// enumerated depth-first with shared prefix products. Throws state_overflow
/// when more than `max_words` products would be formed. Stops early once
/// the bound reaches `stop_at`.
inline LowerBound jsr_lower(const std::vector<Matrix>& mats, std::size_t depth, std::uint64_t max_words = 50'000'000,
                            double stop_at = std::numeric_limits<double>::infinity()) {
    detail::require_matrices(mats);
    if (depth == 0) fail(ErrorKind::invalid_argument, "depth must be >= 1");
    const std::size_t n = mats.size();
    {
        long double total = 0.0L, layer = 1.0L;
        for (std::size_t k = 1; k <= depth; ++k) {
            layer *= static_cast<long double>(n);
            total += layer;
        }
        if (total > static_cast<long double>(max_words)) {
            fail(ErrorKind::state_overflow, "jsr_lower: " + std::to_string(n) + " matrices at depth " +
                                                std::to_string(depth) + " exceed the product budget; lower the depth");
        }
    }

    LowerBound best;
    best.value = -1.0;
    std::vector<std::size_t> word;
    std::vector<Matrix> prefix; // prefix[k] = A_{w_0} ... A_{w_k}
    bool done = false;
    auto visit = [&](auto&& self) -> void {
        if (done) return;
        const std::size_t k = word.size();
        if (detail::is_lyndon(word)) {
            const double v = detail::root(spectral_radius(prefix.back()), k);
            if (v > best.value) {
                best.value = v;
                best.word = word;
                if (v >= stop_at) done = true;
            }
        }
        if (k == depth) return;
        for (std::size_t i = 0; i < n && !done; ++i) {
            // Lyndon words start with their smallest letter.
            if (i < word.front()) continue;
            word.push_back(i);
            prefix.push_back(prefix.back() * mats[i]);
            self(self);
            prefix.pop_back();
            word.pop_back();
        }
    };
    for (std::size_t i = 0; i < n && !done; ++i) {
        word = {i};
        prefix = {mats[i]};
        visit(visit);
    }
    best.value = std::max(best.value, 0.0);
    return best;
}

/// Breadth-first branch and bound on product norms. A node for the product
/// P = A_{w_1} ... A_{w_k} carries b(P) = min over prefixes of |prefix|^(1/len),
/// and any infinite product splits greedily into such prefixes, so the largest
/// b over the leaves of an explored tree bounds the joint spectral radius. A
/// node is closed once b(P) <= lower + target_gap, where `lower` is the best
/// normalized spectral radius seen so far.
inline JsrBounds jsr_bounds_branch(const std::vector<Matrix>& mats, std::size_t depth, double target_gap,
                                   std::size_t max_frontier = 1'000'000) {
    detail::require_matrices(mats);
    if (depth == 0) fail(ErrorKind::invalid_argument, "depth must be >= 1");
    if (!(target_gap >= 0.0)) fail(ErrorKind::invalid_argument, "target_gap must be >= 0");

    struct Node {
        Matrix product;
        double bound;
        std::vector<std::size_t> word;
    };

    JsrBounds out;
    out.upper = std::numeric_limits<double>::infinity();
    out.lower = -1.0;
    double closed_max = 0.0;

    std::vector<Node> level;
    for (std::size_t i = 0; i < mats.size(); ++i) level.push_back({mats[i], spectral_norm(mats[i]), {i}});

    for (std::size_t k = 1; k <= depth && !level.empty(); ++k) {
        out.depth = k;
        // Raise the lower estimate over the whole level before pruning, so the
        // outcome does not depend on visiting order within a level.
        for (const auto& node : level) {
            const double v = detail::root(spectral_radius(node.product), k);
            if (v > out.lower) {
                out.lower = v;
                out.word = node.word;
            }
        }
        std::vector<Node> open;
        double open_max = 0.0;
        for (auto& node : level) {
            if (node.bound <= out.lower + target_gap) {
                closed_max = std::max(closed_max, node.bound);
            } else {
                open_max = std::max(open_max, node.bound);
                open.push_back(std::move(node));
            }
        }
        out.upper = std::min(out.upper, std::max(closed_max, open_max));
        if (open.empty() || out.upper - out.lower <= target_gap) break;
        if (k == depth || open.size() * mats.size() > max_frontier) break;

        std::vector<Node> next;
        next.reserve(open.size() * mats.size());
        for (const auto& node : open) {
            for (std::size_t i = 0; i < mats.size(); ++i) {
                Matrix p = node.product * mats[i];
                const double b = std::min(node.bound, detail::root(spectral_norm(p), k + 1));
                auto w = node.word;
                w.push_back(i);
                next.push_back({std::move(p), b, std::move(w)});
            }
        }
        level = std::move(next);
    }
    out.lower = std::max(out.lower, 0.0);
    out.upper = std::max(out.upper, out.lower);
    return out;
}

inline double jsr_upper(const std::vector<Matrix>& mats, std::size_t depth, double target_gap = 1e-3) {
    return jsr_bounds_branch(mats, depth, target_gap).upper;
}

/// Branch and bound, then exhaustive search for a better lower bound when the
/// bracket is still wider than `target_gap` and the word count is affordable.
inline JsrBounds jsr_bounds(const std::vector<Matrix>& mats, std::size_t depth = 12, double target_gap = 1e-3,
                            std::uint64_t max_words = 2'000'000) {
    JsrBounds b = jsr_bounds_branch(mats, depth, target_gap);
    if (b.upper - b.lower > target_gap) {
        std::size_t d = depth;
        long double total = 0.0L, layer = 1.0L;
        for (std::size_t k = 1; k <= depth; ++k) {
            layer *= static_cast<long double>(mats.size());
            total += layer;
            if (total > static_cast<long double>(max_words)) {
                d = k - 1;
                break;
            }
        }
        if (d >= 1) {
            const auto low = jsr_lower(mats, d, max_words, b.upper - target_gap);
            if (low.value > b.lower) {
                b.lower = low.value;
                b.word = low.word;
            }
            b.depth = std::max(b.depth, d);
        }
    }
    return b;
}

inline ThresholdEstimate threshold_from(const JsrBounds& b) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {b.upper > 0.0 ? 1.0 / b.upper : inf, b.lower > 0.0 ? 1.0 / b.lower : inf};
}

/// Bracket on the parameter where the family stops having an attractor.
inline ThresholdEstimate threshold(const ParamFamily& fam, std::size_t depth = 12, double target_gap = 1e-3,
                                   JsrBounds* bounds_out = nullptr) {
    require_affine_in_t(fam, "threshold");
    const JsrBounds b = jsr_bounds(fam.linear_parts(), depth, target_gap);
    if (bounds_out != nullptr) *bounds_out = b;
    return threshold_from(b);
}

} // namespace ifs_transit
