#pragma once

// Orthographic rasterization of point clouds and binary PPM output.

#include "ifs_transit/core.hpp"
#include "ifs_transit/point_cloud.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

namespace ifs_transit {

using Rgb = std::array<std::uint8_t, 3>;

struct Viewport {
    Vector bbox_min;
    Vector bbox_max;
    std::size_t axis_x = 0;
    std::size_t axis_y = 1;
    std::size_t width = 256;
    std::size_t height = 256;

    /// Box around the cloud's centers, padded by `margin` of its extent.
    static Viewport fit(const PointCloud& cloud, std::size_t axis_x, std::size_t axis_y, std::size_t width,
                        std::size_t height, double margin = 0.05) {
        auto [lo, hi] = cloud.bounding_box();
        for (std::size_t j = 0; j < cloud.dim(); ++j) {
            const double pad = std::max((hi[j] - lo[j]) * margin, cloud.resolution());
            lo[j] -= pad;
            hi[j] += pad;
        }
        return {lo, hi, axis_x, axis_y, width, height};
    }
};

struct Raster {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels; // row-major RGB, row 0 at the top

    Raster() = default;
    Raster(std::size_t w, std::size_t h, Rgb fill = {255, 255, 255}) : width(w), height(h), pixels(w * h * 3) {
        for (std::size_t i = 0; i < w * h; ++i) set(i % w, i / w, fill);
    }

    Rgb at(std::size_t col, std::size_t row) const {
        const std::size_t o = (row * width + col) * 3;
        return {pixels[o], pixels[o + 1], pixels[o + 2]};
    }
    void set(std::size_t col, std::size_t row, Rgb c) {
        const std::size_t o = (row * width + col) * 3;
        pixels[o] = c[0];
        pixels[o + 1] = c[1];
        pixels[o + 2] = c[2];
    }

    friend bool operator==(const Raster&, const Raster&) = default;
};

/// Color for label i; unlabeled clouds draw in black.
inline Rgb label_color(std::size_t label) {
    static constexpr std::array<Rgb, 6> palette{{
        {0, 140, 60}, {30, 70, 220}, {210, 40, 40}, {230, 140, 0}, {120, 40, 170}, {0, 150, 160},
    }};
    return palette[label % palette.size()];
}

namespace detail {

inline void check_viewport(const Viewport& vp, std::size_t dim) {
    if (vp.width == 0 || vp.height == 0) fail(ErrorKind::invalid_argument, "raster size must be at least 1x1");
    if (vp.axis_x >= dim || vp.axis_y >= dim || vp.axis_x == vp.axis_y) {
        fail(ErrorKind::invalid_argument, "viewport axes (" + std::to_string(vp.axis_x) + ", " +
                                              std::to_string(vp.axis_y) + ") invalid for dimension " +
                                              std::to_string(dim));
    }
    require_same_dim(dim, vp.bbox_min.dim(), "viewport bbox_min");
    require_same_dim(dim, vp.bbox_max.dim(), "viewport bbox_max");
    for (std::size_t a : {vp.axis_x, vp.axis_y}) {
        if (!(vp.bbox_min[a] < vp.bbox_max[a]) || !std::isfinite(vp.bbox_max[a] - vp.bbox_min[a])) {
            fail(ErrorKind::invalid_argument, "viewport box is degenerate on axis " + std::to_string(a));
        }
    }
}

// Pixel index along one axis of the closed box [lo, hi], or -1 if outside.
inline long long pixel_index(double x, double lo, double hi, std::size_t n) {
    if (!(x >= lo && x <= hi)) return -1;
    const double f = std::floor((x - lo) / (hi - lo) * static_cast<double>(n));
    if (f >= static_cast<double>(n)) return static_cast<long long>(n) - 1;
    return f < 0.0 ? 0 : static_cast<long long>(f);
}

} // namespace detail

/// Draws cell centers. With labels, points go down in label order and then by
/// cloud index, so overlaps resolve the same way every time.
inline Raster project(const PointCloud& cloud, const Viewport& vp, const std::vector<std::size_t>* labels = nullptr) {
    if (cloud.empty()) fail(ErrorKind::invalid_argument, "cannot render an empty cloud");
    detail::check_viewport(vp, cloud.dim());
    if (labels != nullptr && labels->size() != cloud.size()) {
        fail(ErrorKind::dimension_mismatch, "label count does not match cloud size");
    }
    std::vector<std::size_t> order(cloud.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (labels != nullptr) {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return (*labels)[a] < (*labels)[b]; });
    }
    Raster out(vp.width, vp.height);
    for (std::size_t i : order) {
        const long long col =
            detail::pixel_index(cloud.center_coord(i, vp.axis_x), vp.bbox_min[vp.axis_x], vp.bbox_max[vp.axis_x], vp.width);
        const long long up = detail::pixel_index(cloud.center_coord(i, vp.axis_y), vp.bbox_min[vp.axis_y],
                                                 vp.bbox_max[vp.axis_y], vp.height);
        if (col < 0 || up < 0) continue;
        const std::size_t row = vp.height - 1 - static_cast<std::size_t>(up);
        out.set(static_cast<std::size_t>(col), row, labels ? label_color((*labels)[i]) : Rgb{0, 0, 0});
    }
    return out;
}

struct LabeledCloud {
    PointCloud cloud;
    std::vector<std::size_t> labels;
};

/// The images f_i(cloud), each labeled with its map index i. A cell hit by
/// several maps keeps the largest index, which is what label-order drawing
/// would leave on top anyway.
inline LabeledCloud label_by_map(const IfsSystem& ifs, const PointCloud& cloud) {
    require_same_dim(ifs.dim(), cloud.dim(), "label_by_map");
    const std::size_t d = cloud.dim();
    const double eps = cloud.resolution();
    std::vector<double> coords;
    std::vector<std::size_t> source;
    coords.reserve(ifs.size() * cloud.representatives().size());
    std::vector<double> out(d);
    for (std::size_t m = 0; m < ifs.size(); ++m) {
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            ifs[m].apply(cloud.representative(i).data(), out.data());
            coords.insert(coords.end(), out.begin(), out.end());
            source.push_back(m);
        }
    }
    LabeledCloud res;
    res.cloud = quantize_flat(d, coords, eps);
    res.labels.assign(res.cloud.size(), 0);
    std::vector<CellCoord> key(d);
    for (std::size_t i = 0; i < source.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) key[j] = detail::cell_of(coords[i * d + j], eps);
        if (const auto idx = res.cloud.find(key)) res.labels[*idx] = std::max(res.labels[*idx], source[i]);
    }
    return res;
}

/// Binary PPM: "P6 W H 255\n" followed by the raw pixels.
inline std::string write_ppm(const Raster& r) {
    std::string out = "P6 " + std::to_string(r.width) + " " + std::to_string(r.height) + " 255\n";
    out.append(reinterpret_cast<const char*>(r.pixels.data()), r.pixels.size());
    return out;
}

inline void write_ppm_file(const Raster& r, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorKind::io_error, "cannot open " + path + " for writing");
    const std::string bytes = write_ppm(r);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) fail(ErrorKind::io_error, "failed writing " + path);
}

} // namespace ifs_transit
