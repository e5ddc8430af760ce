#pragma once

// Angle dynamics on the unit circle: doubling, rotation and their
// compositions, acting on finite sets of angles.

#include "ifs_transit/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace ifs_transit {

inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double angle_tolerance = 1e-12;
inline constexpr std::size_t max_angle_set = std::size_t{1} << 20;

/// 2 pi times the golden ratio conjugate.
inline const double golden_angle = two_pi * (std::sqrt(5.0) - 1.0) / 2.0;

inline double wrap_angle(double theta) {
    double r = std::fmod(theta, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi - angle_tolerance) r = 0.0;
    return r;
}

/// Sorted angles in [0, 2 pi), no two within angle_tolerance (circularly).
class AngleSet {
public:
    AngleSet() = default;
    explicit AngleSet(std::vector<double> angles) : angles_(std::move(angles)) { canonicalize(); }

    std::size_t size() const noexcept { return angles_.size(); }
    bool empty() const noexcept { return angles_.empty(); }
    const std::vector<double>& angles() const noexcept { return angles_; }
    double operator[](std::size_t i) const { return angles_[i]; }

    friend bool operator==(const AngleSet&, const AngleSet&) = default;

private:
    void canonicalize() {
        for (double& a : angles_) {
            if (!std::isfinite(a)) fail(ErrorKind::invalid_argument, "angle is not finite");
            a = wrap_angle(a);
        }
        std::sort(angles_.begin(), angles_.end());
        std::vector<double> out;
        out.reserve(angles_.size());
        for (double a : angles_) {
            if (out.empty() || a - out.back() > angle_tolerance) out.push_back(a);
        }
        while (out.size() > 1 && out.front() + two_pi - out.back() <= angle_tolerance) out.pop_back();
        angles_ = std::move(out);
    }

    std::vector<double> angles_;
};

/// theta -> multiplier * theta + shift (mod 2 pi), multiplier 1 or 2.
struct CircleMap {
    int multiplier = 1;
    double shift = 0.0;

    static CircleMap doubling() { return {2, 0.0}; }
    static CircleMap rotation(double alpha) { return {1, alpha}; }
    static CircleMap identity() { return {1, 0.0}; }
    /// Doubling followed by rotation.
    static CircleMap doubling_then_rotation(double alpha) { return {2, alpha}; }

    double operator()(double theta) const { return wrap_angle(multiplier * theta + shift); }

    friend bool operator==(const CircleMap&, const CircleMap&) = default;
};

struct CircleIfs {
    std::vector<CircleMap> maps;
};

inline AngleSet circle_step(const CircleIfs& sys, const AngleSet& s) {
    std::vector<double> out;
    out.reserve(s.size() * sys.maps.size());
    for (const auto& m : sys.maps)
        for (double a : s.angles()) out.push_back(m(a));
    return AngleSet(std::move(out));
}

/// Largest circular gap between consecutive angles.
inline double max_arc_gap(const AngleSet& s) {
    if (s.empty()) fail(ErrorKind::invalid_argument, "max_arc_gap of an empty angle set");
    const auto& a = s.angles();
    double gap = a.front() + two_pi - a.back();
    for (std::size_t i = 1; i < a.size(); ++i) gap = std::max(gap, a[i] - a[i - 1]);
    return gap;
}

/// gap[n-1] = max_arc_gap of the n-step image of {theta0}, n = 1..n_max.
inline std::vector<double> density_profile(const CircleIfs& sys, double theta0, std::size_t n_max) {
    if (n_max == 0) fail(ErrorKind::invalid_argument, "n_max must be >= 1");
    if (sys.maps.empty()) fail(ErrorKind::invalid_argument, "circle system has no maps");
    std::vector<double> gaps;
    AngleSet s({theta0});
    for (std::size_t n = 1; n <= n_max; ++n) {
        if (s.size() * sys.maps.size() > 4 * max_angle_set) {
            fail(ErrorKind::state_overflow, "angle set would exceed 2^20 entries at step " + std::to_string(n) +
                                                "; use n_max <= " + std::to_string(n - 1));
        }
        s = circle_step(sys, s);
        if (s.size() > max_angle_set) {
            fail(ErrorKind::state_overflow, "angle set has " + std::to_string(s.size()) + " entries at step " +
                                                std::to_string(n) + "; use n_max <= " + std::to_string(n - 1));
        }
        gaps.push_back(max_arc_gap(s));
    }
    return gaps;
}

} // namespace ifs_transit
