#pragma once

// Operations on one-parameter families: fixed-point tracking, hypothesis
// checks, parameter sweeps, upper transition sets, isometry-augmented systems
// and the attractor perturbation bound.

#include "ifs_transit/hutch.hpp"
#include "ifs_transit/jsr.hpp"
#include "ifs_transit/metric.hpp"
#include "ifs_transit/param.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace ifs_transit {

/// q_{i,t}, the fixed point of each map at parameter t.
inline std::vector<Vector> fixed_points(const ParamFamily& fam, double t) {
    const IfsSystem sys = instantiate(fam, t);
    std::vector<Vector> out;
    for (std::size_t i = 0; i < sys.size(); ++i) {
        out.push_back(solve_linear(Matrix::identity(fam.dim()) - sys[i].linear(), sys[i].offset(),
                                   "fixed point of map " + std::to_string(i) + " at t = " + std::to_string(t)));
    }
    return out;
}

struct LimitPoint {
    std::optional<Vector> point;
    std::string failure; ///< set when the limit could not be established
};

/// Limit of q_{i,t} as t -> 1 from below, per map.
inline std::vector<LimitPoint> limit_fixed_points(const ParamFamily& fam, double tol = 1e-9, std::size_t steps = 48) {
    std::vector<LimitPoint> out;
    const Matrix eye = Matrix::identity(fam.dim());
    for (std::size_t i = 0; i < fam.size(); ++i) {
        const auto& m = fam[i];
        LimitPoint lp;
        if (!m.has_pole()) {
            try {
                const AffineMap at1 = m.at(1.0);
                lp.point = solve_linear(eye - at1.linear(), at1.offset());
                out.push_back(std::move(lp));
                continue;
            } catch (const Error&) {
            }
        }
        std::optional<Vector> prev;
        std::size_t calm = 0;
        double last_step = std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k <= steps; ++k) {
            const double t = 1.0 - std::ldexp(1.0, -static_cast<int>(k));
            const AffineMap f = m.at(t);
            std::optional<Vector> q;
            try {
                q = solve_linear(eye - f.linear(), f.offset());
            } catch (const Error&) {
                prev.reset();
                calm = 0;
                continue;
            }
            if (prev) {
                last_step = distance(*q, *prev);
                calm = last_step <= tol * std::max(1.0, q->norm()) ? calm + 1 : 0;
                if (calm >= 2) {
                    lp.point = q;
                    break;
                }
            }
            prev = q;
        }
        if (!lp.point) {
            lp.failure = "fixed points of map " + std::to_string(i) + " do not settle as t -> 1 (last step " +
                         std::to_string(last_step) + ")";
        }
        out.push_back(std::move(lp));
    }
    return out;
}

/// Largest Lipschitz constant over the maps at t.
inline double family_lipschitz(const ParamFamily& fam, double t) { return instantiate(fam, t).max_lipschitz(); }

/// Least p <= p_max with L^p = I (entrywise within 1e-9), for orthogonal L.
inline std::optional<std::size_t> isometry_period(const Matrix& linear, std::size_t p_max) {
    if (!is_orthogonal(linear)) fail(ErrorKind::not_orthogonal, "isometry_period needs an orthogonal matrix");
    if (p_max == 0) fail(ErrorKind::invalid_argument, "p_max must be >= 1");
    const Matrix eye = Matrix::identity(linear.dim());
    Matrix power = linear;
    for (std::size_t p = 1; p <= p_max; ++p) {
        if ((power - eye).max_abs() <= 1e-9) return p;
        power = power * linear;
    }
    return std::nullopt;
}

enum class TransitionStatus { converged, no_convergence, diverged };

inline const char* to_string(TransitionStatus s) {
    switch (s) {
    case TransitionStatus::converged: return "converged";
    case TransitionStatus::no_convergence: return "no_convergence";
    case TransitionStatus::diverged: return "diverged";
    }
    return "unknown";
}

struct SweepEntry {
    double t = 0.0;
    std::optional<PointCloud> cloud; ///< missing when the solve diverged
    bool diverged = false;
    bool converged = false;
    double residual = std::numeric_limits<double>::quiet_NaN(); ///< last h(K_{n+1}, K_n)
    double diameter = std::numeric_limits<double>::quiet_NaN();
    std::size_t iterations = 0;
};

struct TransitionReport {
    std::vector<double> schedule;
    std::vector<SweepEntry> entries;
    std::vector<double> cauchy_gaps; ///< h(A_{t_n}, A_{t_{n+1}}); NaN where either side is missing
    std::optional<PointCloud> upper;
    std::optional<PointCloud> lower;
    bool lower_unbounded = false;
    std::optional<ThresholdEstimate> threshold;
    TransitionStatus status = TransitionStatus::no_convergence;
};

struct SolveOptions {
    double eps = 0.02;
    double tol = 0.02;
    double r_max = 1e6;
    std::size_t max_iter = 10000;
    unsigned threads = 1;
    /// Seed each sweep solve with the previous attractor (plus the current
    /// fixed points) instead of the fixed points alone.
    bool warm_start = false;
};

namespace detail {

inline PointCloud warm_seed(const IfsSystem& sys, const std::optional<PointCloud>& previous, double eps) {
    PointCloud fresh = default_seed(sys, eps);
    if (!previous || previous->resolution() != eps) return fresh;
    const PointCloud parts[] = {*previous, fresh};
    return merge(parts);
}

inline void push_entry(TransitionReport& rep, SweepEntry entry) {
    if (!rep.entries.empty()) {
        const auto& prev = rep.entries.back();
        rep.cauchy_gaps.push_back(prev.cloud && entry.cloud ? hausdorff(*prev.cloud, *entry.cloud).distance
                                                            : std::numeric_limits<double>::quiet_NaN());
    }
    rep.schedule.push_back(entry.t);
    rep.entries.push_back(std::move(entry));
}

inline SweepEntry solve_at(const ParamFamily& fam, double t, const std::optional<PointCloud>& warm,
                           const SolveOptions& opt) {
    const IfsSystem sys = instantiate(fam, t);
    const PointCloud seed = opt.warm_start ? warm_seed(sys, warm, opt.eps) : default_seed(sys, opt.eps);
    auto res = attractor_deterministic(sys, seed, opt.tol, opt.max_iter, opt.r_max,
                                       opt.threads);
    SweepEntry e;
    e.t = t;
    e.diverged = res.trace.diverged;
    e.converged = res.trace.converged;
    e.iterations = res.trace.iterations;
    if (!res.trace.residuals.empty()) e.residual = res.trace.residuals.back();
    if (!e.diverged) {
        e.diameter = res.cloud.box_diameter();
        e.cloud = std::move(res.cloud);
    }
    return e;
}

} // namespace detail

/// Attractors along a strictly increasing schedule. Each solve starts from the
/// fixed points at t, or with `warm_start` from the previous attractor too.
inline TransitionReport sweep(const ParamFamily& fam, const std::vector<double>& schedule, const SolveOptions& opt) {
    if (schedule.empty()) fail(ErrorKind::invalid_argument, "schedule is empty");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (!(schedule[i] >= 0.0) || !std::isfinite(schedule[i])) {
            fail(ErrorKind::invalid_argument, "schedule values must be finite and >= 0");
        }
        if (i > 0 && !(schedule[i] > schedule[i - 1])) {
            fail(ErrorKind::invalid_argument, "schedule must be strictly increasing");
        }
    }
    TransitionReport rep;
    std::optional<PointCloud> warm;
    bool any_diverged = false, all_converged = true;
    for (double t : schedule) {
        SweepEntry e = detail::solve_at(fam, t, warm, opt);
        any_diverged = any_diverged || e.diverged;
        all_converged = all_converged && e.converged;
        if (e.cloud) warm = e.cloud;
        detail::push_entry(rep, std::move(e));
    }
    rep.status = any_diverged ? TransitionStatus::diverged
                              : (all_converged ? TransitionStatus::converged : TransitionStatus::no_convergence);
    return rep;
}

/// Follows A_t along t_n = 1 - r^n and accepts the last attractor once two
/// consecutive Cauchy gaps fall below tol.
inline TransitionReport upper_transition(const ParamFamily& fam, double r, std::size_t n_max, const SolveOptions& opt) {
    if (!(r > 0.0 && r < 1.0)) fail(ErrorKind::invalid_argument, "schedule ratio r must lie in (0, 1)");
    if (n_max == 0) fail(ErrorKind::invalid_argument, "n_max must be >= 1");
    TransitionReport rep;
    std::optional<PointCloud> warm;
    double rn = 1.0;
    for (std::size_t n = 1; n <= n_max; ++n) {
        rn *= r;
        const double t = 1.0 - rn;
        if (!(t > (rep.schedule.empty() ? 0.0 : rep.schedule.back()))) break; // t no longer representable below 1
        SweepEntry e = detail::solve_at(fam, t, warm, opt);
        const bool failed = e.diverged || !e.cloud || (e.diameter > opt.r_max);
        if (e.cloud) warm = e.cloud;
        detail::push_entry(rep, std::move(e));
        if (failed) {
            rep.status = TransitionStatus::no_convergence;
            return rep;
        }
        const auto& gaps = rep.cauchy_gaps;
        if (gaps.size() >= 2 && gaps[gaps.size() - 1] < opt.tol && gaps[gaps.size() - 2] < opt.tol) {
            rep.upper = rep.entries.back().cloud;
            rep.status = TransitionStatus::converged;
            return rep;
        }
    }
    rep.status = TransitionStatus::no_convergence;
    return rep;
}

/// Rescales t so that f~_t = f_{t * t0}.
inline ParamFamily renormalize(const ParamFamily& fam, double t0) {
    if (!(t0 > 0.0) || !std::isfinite(t0)) fail(ErrorKind::invalid_argument, "renormalize needs t0 > 0");
    std::vector<ParamAffineMap> maps;
    for (const auto& m : fam.maps()) {
        std::vector<ParamTerm> terms;
        for (const auto& term : m.terms()) {
            if (term.basis == Basis::pole) {
                fail(ErrorKind::not_affine_in_t, "renormalize cannot rescale a 1/(1-t) term");
            }
            terms.push_back({term.basis, (1.0 / t0) * term.linear, (1.0 / t0) * term.offset});
        }
        maps.emplace_back(t0 * m.linear(), t0 * m.u(), m.w(), std::move(terms));
    }
    return {fam.dim(), std::move(maps)};
}

/// g_t^m for g_t(x) = t G (x - c) + c: the map t^m G^m (x - c) + c.
inline AffineMap isometry_power(const Matrix& g_linear, const Vector& centre, double t, std::size_t m) {
    const Matrix lin = std::pow(t, static_cast<double>(m)) * matrix_power(g_linear, static_cast<unsigned>(m));
    return {lin, centre - lin * centre};
}

/// The truncated system {g_t^m o f_(i,t) : 0 <= m <= m_cut, i != g_index},
/// ordered by m, then i.
inline IfsSystem m_system(const ParamFamily& fam, std::size_t g_index, double t, std::size_t m_cut) {
    if (g_index >= fam.size()) fail(ErrorKind::invalid_argument, "g_index out of range");
    if (!(t < 1.0)) fail(ErrorKind::invalid_argument, "m_system needs t < 1");
    if (fam.size() < 2) fail(ErrorKind::invalid_argument, "m_system needs at least one map besides g");
    const auto& g = fam[g_index];
    if (!g.affine_in_t()) fail(ErrorKind::not_affine_in_t, "the isometry map must be affine in t");
    if (!is_orthogonal(g.linear())) fail(ErrorKind::not_orthogonal, "the map at g_index is not an isometry");
    if (!g.is_anchored_isometry()) {
        fail(ErrorKind::invalid_argument, "the map at g_index must have the form t G (x - c) + c");
    }
    const IfsSystem sys = instantiate(fam, t);
    std::vector<AffineMap> maps;
    for (std::size_t m = 0; m <= m_cut; ++m) {
        const AffineMap gm = isometry_power(g.linear(), g.w(), t, m);
        for (std::size_t i = 0; i < fam.size(); ++i) {
            if (i != g_index) maps.push_back(compose(gm, sys[i]));
        }
    }
    return {fam.dim(), std::move(maps)};
}

struct PerturbationCheck {
    double delta = 0.0;
    double bound = 0.0;
    double measured = 0.0;
    bool holds = false;
    bool subinvariant = false; ///< G(b) u H(b) within 2 eps of b
    double lip_g = 0.0;
    double lip_h = 0.0;
};

namespace detail {

// Two-sided matching distance between the image sets at x.
inline double matching_gap(const IfsSystem& g, const IfsSystem& h, const double* x, std::vector<double>& gx,
                           std::vector<double>& hx) {
    const std::size_t d = g.dim();
    for (std::size_t i = 0; i < g.size(); ++i) g[i].apply(x, gx.data() + i * d);
    for (std::size_t j = 0; j < h.size(); ++j) h[j].apply(x, hx.data() + j * d);
    auto one_side = [d](const std::vector<double>& from, std::size_t nf, const std::vector<double>& to, std::size_t nt) {
        double worst = 0.0;
        for (std::size_t a = 0; a < nf; ++a) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t b = 0; b < nt; ++b) {
                double s = 0.0;
                for (std::size_t k = 0; k < d; ++k) {
                    const double diff = from[a * d + k] - to[b * d + k];
                    s += diff * diff;
                }
                best = std::min(best, s);
            }
            worst = std::max(worst, best);
        }
        return std::sqrt(worst);
    };
    return std::max(one_side(gx, g.size(), hx, h.size()), one_side(hx, h.size(), gx, g.size()));
}

// A grid over a ball that every map of both systems sends into itself:
// |f(x) - c| <= Lip f * R + |f(c) - c| <= R once R >= |f(c) - c| / (1 - Lip f).
inline PointCloud default_test_set(const IfsSystem& g, const IfsSystem& h, const PointCloud& ag,
                                   const PointCloud& ah, double eps) {
    const std::size_t d = g.dim();
    auto [lo_g, hi_g] = ag.bounding_box();
    auto [lo_h, hi_h] = ah.bounding_box();
    Vector center(d);
    double half_diag2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double lo = std::min(lo_g[j], lo_h[j]);
        const double hi = std::max(hi_g[j], hi_h[j]);
        center[j] = 0.5 * (lo + hi);
        half_diag2 += 0.25 * (hi - lo) * (hi - lo);
    }
    double radius = std::sqrt(half_diag2);
    for (const IfsSystem* sys : {&g, &h}) {
        for (const auto& f : sys->maps()) {
            radius = std::max(radius, distance(apply_affine(f, center), center) / (1.0 - lipschitz(f)));
        }
    }
    radius = std::max(radius, eps);
    const double step = std::max(eps, 2.0 * radius / (d >= 3 ? 150.0 : 200.0));
    const std::size_t per_axis = static_cast<std::size_t>(std::ceil(2.0 * radius / step)) + 1;
    double total = 1.0;
    for (std::size_t j = 0; j < d; ++j) total *= static_cast<double>(per_axis);
    if (total > 4e6) fail(ErrorKind::state_overflow, "default test set is too large; pass one explicitly");
    std::vector<double> flat;
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> x(d);
    for (std::size_t n = 0; n < static_cast<std::size_t>(total); ++n) {
        double r2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            x[j] = center[j] - radius + static_cast<double>(idx[j]) * step;
            r2 += (x[j] - center[j]) * (x[j] - center[j]);
        }
        if (r2 <= radius * radius) flat.insert(flat.end(), x.begin(), x.end());
        for (std::size_t j = 0; j < d; ++j) {
            if (++idx[j] < per_axis) break;
            idx[j] = 0;
        }
    }
    // The attractor points themselves, so the gap is measured where the bound is used.
    flat.insert(flat.end(), ag.representatives().begin(), ag.representatives().end());
    flat.insert(flat.end(), ah.representatives().begin(), ah.representatives().end());
    return quantize_flat(d, flat, step);
}

} // namespace detail

/// Compares h(A_G, A_H) with delta / (1 - min Lip) where delta is the matching
/// gap over the test set b. Without b, a grid over a ball mapped into itself
/// by every map of both systems is used, plus the attractor points.
inline PerturbationCheck perturbation_check(const IfsSystem& g, const IfsSystem& h, const std::optional<PointCloud>& b,
                                            double eps, unsigned threads = 1) {
    require_same_dim(g.dim(), h.dim(), "perturbation_check");
    PerturbationCheck out;
    out.lip_g = g.max_lipschitz();
    out.lip_h = h.max_lipschitz();
    if (!(out.lip_g < 1.0) || !(out.lip_h < 1.0)) {
        fail(ErrorKind::non_contractive, "perturbation_check needs contractive systems");
    }
    const double tol = eps * 1e-3;
    const auto ag = attractor_deterministic(g, eps, tol, 100000, 1e12, threads);
    const auto ah = attractor_deterministic(h, eps, tol, 100000, 1e12, threads);
    out.measured = hausdorff(ag.cloud, ah.cloud, threads).distance;

    const PointCloud test = b ? *b : detail::default_test_set(g, h, ag.cloud, ah.cloud, eps);
    require_same_dim(g.dim(), test.dim(), "perturbation_check test set");
    const std::size_t d = g.dim();
    std::vector<double> gx(g.size() * d), hx(h.size() * d);
    const auto& reps = test.representatives();
    for (std::size_t i = 0; i < test.size(); ++i) {
        out.delta = std::max(out.delta, detail::matching_gap(g, h, reps.data() + i * d, gx, hx));
    }
    out.bound = out.delta / (1.0 - std::min(out.lip_g, out.lip_h));
    out.holds = out.measured <= out.bound + 4.0 * std::sqrt(static_cast<double>(d)) * eps;

    const PointCloud images[] = {hutchinson_step(g, test, threads), hutchinson_step(h, test, threads)};
    const PointCloud pushed = merge(images);
    // Compare at the coarser resolution when the test set is coarser than eps.
    out.subinvariant = excess(pushed, test, threads) <= 2.0 * std::max(eps, test.resolution()) * std::sqrt(double(d));
    return out;
}

struct HConditions {
    bool h1 = true;               ///< continuity in t: holds for every representable family
    bool h2 = false;              ///< Lip(F_t) < 1 for each t in [0, 1)
    bool h2_uniform = false;      ///< sup over [0, 1) of Lip(F_t) < 1
    double h2_sup = 0.0;          ///< that supremum: max over maps of the largest singular value of L
    bool h3 = false;              ///< every fixed point has a limit as t -> 1
    std::vector<LimitPoint> limits;
};

inline HConditions check_h_conditions(const ParamFamily& fam) {
    require_affine_in_t(fam, "check_h_conditions");
    HConditions out;
    // t sigma(L) increases linearly in t, so the supremum is the value at t = 1.
    for (const auto& m : fam.maps()) out.h2_sup = std::max(out.h2_sup, spectral_norm(m.linear()));
    out.h2 = out.h2_sup <= 1.0 + 1e-12;
    out.h2_uniform = out.h2_sup < 1.0 - 1e-12;
    out.limits = limit_fixed_points(fam);
    out.h3 = true;
    for (const auto& lp : out.limits) out.h3 = out.h3 && lp.point.has_value();
    return out;
}

} // namespace ifs_transit
