#pragma once

// Finite epsilon-grid approximations of compact sets.
//
// A cloud is a sorted set of occupied grid cells k (integer vectors); its
// points are the cell centers (k + 1/2) * eps. Each cell also remembers one
// exact representative: the lexicographically smallest input point that fell
// into it. Solvers map representatives rather than centers so that snapping
// errors do not compound across iterations; equality and all metric
// computations use cells/centers only.

#include "ifs_transit/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

namespace ifs_transit {

using CellCoord = std::int64_t;

class PointCloud {
public:
    PointCloud() = default;

    std::size_t dim() const noexcept { return dim_; }
    double resolution() const noexcept { return eps_; }
    std::size_t size() const noexcept { return dim_ == 0 ? 0 : cells_.size() / dim_; }
    bool empty() const noexcept { return size() == 0; }

    std::span<const CellCoord> cell(std::size_t i) const { return {cells_.data() + i * dim_, dim_}; }
    std::span<const double> representative(std::size_t i) const { return {reps_.data() + i * dim_, dim_}; }
    const std::vector<CellCoord>& cells() const noexcept { return cells_; }
    const std::vector<double>& representatives() const noexcept { return reps_; }

    double center_coord(std::size_t i, std::size_t j) const {
        return (static_cast<double>(cells_[i * dim_ + j]) + 0.5) * eps_;
    }
    Vector center(std::size_t i) const {
        Vector v(dim_);
        for (std::size_t j = 0; j < dim_; ++j) v[j] = center_coord(i, j);
        return v;
    }
    std::vector<Vector> points() const {
        std::vector<Vector> out;
        out.reserve(size());
        for (std::size_t i = 0; i < size(); ++i) out.push_back(center(i));
        return out;
    }

    /// Index of the cell with the given key, if occupied.
    std::optional<std::size_t> find(std::span<const CellCoord> key) const {
        std::size_t lo = 0, hi = size();
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            const auto c = cell(mid);
            if (std::lexicographical_compare(c.begin(), c.end(), key.begin(), key.end())) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if (lo < size() && std::equal(key.begin(), key.end(), cell(lo).begin())) return lo;
        return std::nullopt;
    }

    /// Largest Euclidean norm of a center.
    double bounding_radius() const {
        double r2 = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < dim_; ++j) {
                const double c = center_coord(i, j);
                s += c * c;
            }
            r2 = std::max(r2, s);
        }
        return std::sqrt(r2);
    }

    /// Componentwise extent of the centers.
    std::pair<Vector, Vector> bounding_box() const {
        Vector lo(dim_, std::numeric_limits<double>::infinity());
        Vector hi(dim_, -std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t j = 0; j < dim_; ++j) {
                const double c = center_coord(i, j);
                lo[j] = std::min(lo[j], c);
                hi[j] = std::max(hi[j], c);
            }
        return {lo, hi};
    }

    /// Diagonal length of the bounding box of the centers.
    double box_diameter() const {
        if (empty()) return 0.0;
        auto [lo, hi] = bounding_box();
        return distance(lo, hi);
    }

    friend bool operator==(const PointCloud& a, const PointCloud& b) {
        return a.dim_ == b.dim_ && a.eps_ == b.eps_ && a.cells_ == b.cells_;
    }

private:
    friend PointCloud quantize_flat(std::size_t, std::span<const double>, double);

    std::size_t dim_ = 0;
    double eps_ = 0.0;
    std::vector<CellCoord> cells_;
    std::vector<double> reps_;
};

namespace detail {

inline CellCoord cell_of(double x, double eps) {
    const double k = std::floor(x / eps);
    constexpr double limit = 4.0e18;
    if (!(k > -limit && k < limit)) {
        fail(ErrorKind::invalid_argument, "coordinate out of grid range");
    }
    return static_cast<CellCoord>(k);
}

inline bool lex_less(const double* a, const double* b, std::size_t d) {
    for (std::size_t j = 0; j < d; ++j) {
        if (a[j] < b[j]) return true;
        if (b[j] < a[j]) return false;
    }
    return false;
}

} // namespace detail

/// Quantizes `coords` (n points stored contiguously, `dim` values each).
inline PointCloud quantize_flat(std::size_t dim, std::span<const double> coords, double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) fail(ErrorKind::invalid_argument, "resolution must be positive");
    if (dim == 0) fail(ErrorKind::invalid_argument, "dimension must be positive");
    if (coords.size() % dim != 0) fail(ErrorKind::dimension_mismatch, "coordinate count not a multiple of dim");
    const std::size_t n = coords.size() / dim;
    if (n == 0) fail(ErrorKind::empty_cloud, "cannot quantize an empty point set");

    std::vector<CellCoord> keys(n * dim);
    for (std::size_t i = 0; i < n * dim; ++i) {
        if (!std::isfinite(coords[i])) fail(ErrorKind::invalid_argument, "non-finite coordinate");
        keys[i] = detail::cell_of(coords[i], eps);
    }

    // Mixed-radix packing into one integer keeps lexicographic order and makes
    // the sort cheap; fall back to row comparison when the box is too large.
    std::vector<CellCoord> lo(dim, std::numeric_limits<CellCoord>::max());
    std::vector<CellCoord> hi(dim, std::numeric_limits<CellCoord>::min());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dim; ++j) {
            lo[j] = std::min(lo[j], keys[i * dim + j]);
            hi[j] = std::max(hi[j], keys[i * dim + j]);
        }
    bool packable = true;
    std::vector<std::uint64_t> radix(dim);
    {
        long double total = 1.0L;
        for (std::size_t j = 0; j < dim; ++j) {
            const long double range = static_cast<long double>(hi[j]) - static_cast<long double>(lo[j]) + 1.0L;
            total *= range;
            radix[j] = static_cast<std::uint64_t>(std::min(range, 1.0e19L));
        }
        packable = total < 9.0e18L;
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const double* pts = coords.data();
    if (packable) {
        std::vector<std::pair<std::uint64_t, std::size_t>> packed(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t p = 0;
            for (std::size_t j = 0; j < dim; ++j) {
                p = p * radix[j] + static_cast<std::uint64_t>(keys[i * dim + j] - lo[j]);
            }
            packed[i] = {p, i};
        }
        std::sort(packed.begin(), packed.end(), [&](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first < b.first;
            return detail::lex_less(pts + a.second * dim, pts + b.second * dim, dim);
        });
        for (std::size_t i = 0; i < n; ++i) order[i] = packed[i].second;
    } else {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const CellCoord* ka = keys.data() + a * dim;
            const CellCoord* kb = keys.data() + b * dim;
            for (std::size_t j = 0; j < dim; ++j) {
                if (ka[j] != kb[j]) return ka[j] < kb[j];
            }
            return detail::lex_less(pts + a * dim, pts + b * dim, dim);
        });
    }

    PointCloud cloud;
    cloud.dim_ = dim;
    cloud.eps_ = eps;
    cloud.cells_.reserve(n * dim);
    cloud.reps_.reserve(n * dim);
    const CellCoord* prev = nullptr;
    for (std::size_t idx : order) {
        const CellCoord* k = keys.data() + idx * dim;
        if (prev != nullptr && std::equal(k, k + dim, prev)) continue;
        cloud.cells_.insert(cloud.cells_.end(), k, k + dim);
        cloud.reps_.insert(cloud.reps_.end(), pts + idx * dim, pts + (idx + 1) * dim);
        prev = k;
    }
    cloud.cells_.shrink_to_fit();
    cloud.reps_.shrink_to_fit();
    return cloud;
}

/// One representative per occupied cell; the result does not depend on input order.
inline PointCloud quantize(std::span<const Vector> points, double eps) {
    if (points.empty()) fail(ErrorKind::empty_cloud, "cannot quantize an empty point set");
    const std::size_t dim = points.front().dim();
    std::vector<double> flat;
    flat.reserve(points.size() * dim);
    for (const auto& p : points) {
        require_same_dim(dim, p.dim(), "quantize");
        flat.insert(flat.end(), p.coords().begin(), p.coords().end());
    }
    return quantize_flat(dim, flat, eps);
}

inline PointCloud quantize(std::initializer_list<Vector> points, double eps) {
    return quantize(std::span<const Vector>(points.begin(), points.size()), eps);
}

/// Union of clouds sharing a resolution.
inline PointCloud merge(std::span<const PointCloud> clouds) {
    std::vector<double> flat;
    std::size_t dim = 0;
    double eps = 0.0;
    for (const auto& c : clouds) {
        if (c.empty()) continue;
        if (dim == 0) {
            dim = c.dim();
            eps = c.resolution();
        }
        require_same_dim(dim, c.dim(), "merge");
        if (c.resolution() != eps) fail(ErrorKind::invalid_argument, "merge: resolutions differ");
        flat.insert(flat.end(), c.representatives().begin(), c.representatives().end());
    }
    if (flat.empty()) fail(ErrorKind::empty_cloud, "merge of empty clouds");
    return quantize_flat(dim, flat, eps);
}

/// Cells of `a` that are not cells of `b`, as a cloud (possibly empty).
inline std::vector<std::size_t> cells_not_in(const PointCloud& a, const PointCloud& b) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!b.find(a.cell(i))) out.push_back(i);
    }
    return out;
}

/// True when every cell of `a` is occupied in `b`.
inline bool is_cell_subset(const PointCloud& a, const PointCloud& b) {
    return a.dim() == b.dim() && a.resolution() == b.resolution() && cells_not_in(a, b).empty();
}

} // namespace ifs_transit
