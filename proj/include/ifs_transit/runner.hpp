#pragma once

// Executes a RunConfig: dispatch, key/value report, CSV diagnostics, images.

#include "ifs_transit/circle.hpp"
#include "ifs_transit/family.hpp"
#include "ifs_transit/render.hpp"
#include "ifs_transit/scenario.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace ifs_transit {

inline constexpr int exit_ok = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_negative = 2; ///< divergence, unboundedness, no convergence

/// Requested thread count, else IFS_TRANSIT_THREADS, else 1.
inline unsigned threads_from_env(unsigned requested) {
    if (requested != 0) return requested;
    if (const char* env = std::getenv("IFS_TRANSIT_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0 && v <= 1024) return static_cast<unsigned>(v);
    }
    return 1;
}

inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string format_vector(const Vector& v) {
    std::string s;
    for (std::size_t i = 0; i < v.dim(); ++i) s += (i ? " " : "") + format_number(v[i]);
    return s;
}

/// Ordered `key = value` lines.
class Report {
public:
    void add(const std::string& key, const std::string& value) { lines_.emplace_back(key, value); }
    void add(const std::string& key, const char* value) { add(key, std::string(value)); }
    void add(const std::string& key, double value) { add(key, format_number(value)); }
    void add(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }
    void add(const std::string& key, bool value) { add(key, value ? "true" : "false"); }

    std::optional<std::string> get(const std::string& key) const {
        for (const auto& [k, v] : lines_) {
            if (k == key) return v;
        }
        return std::nullopt;
    }

    std::string str() const {
        std::string out;
        for (const auto& [k, v] : lines_) out += k + " = " + v + "\n";
        return out;
    }

private:
    std::vector<std::pair<std::string, std::string>> lines_;
};

struct RunResult {
    int exit_code = exit_ok;
    Report report;
};

namespace detail {

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorKind::io_error, "cannot open " + path + " for writing");
    f << text;
    if (!f) fail(ErrorKind::io_error, "failed writing " + path);
}

inline const ParamFamily& require_family(const RunConfig& cfg, const std::optional<ParamFamily>& fam) {
    if (!fam) {
        fail(ErrorKind::semantic_error, std::string("operation ") + to_string(cfg.operation) +
                                            " needs a map family, but scenario " + cfg.scenario.value_or("?") +
                                            " is a circle system");
    }
    return *fam;
}

inline void add_cloud_keys(Report& rep, const PointCloud& cloud) {
    rep.add("cells", cloud.size());
    rep.add("resolution", cloud.resolution());
    const auto [lo, hi] = cloud.bounding_box();
    rep.add("bbox_min", format_vector(lo));
    rep.add("bbox_max", format_vector(hi));
    rep.add("diameter", cloud.box_diameter());
}

inline std::string sweep_csv(const TransitionReport& tr) {
    std::string out = "t,residual,diameter,cauchy_gap,status\n";
    for (std::size_t i = 0; i < tr.entries.size(); ++i) {
        const auto& e = tr.entries[i];
        const double gap = i == 0 ? std::numeric_limits<double>::quiet_NaN() : tr.cauchy_gaps[i - 1];
        const char* status = e.converged ? "converged" : (e.diverged ? "diverged" : "inconclusive");
        out += format_number(e.t) + "," + format_number(e.residual) + "," + format_number(e.diameter) + "," +
               format_number(gap) + "," + status + "\n";
    }
    return out;
}

inline std::string view_path(const std::string& base, const std::string& view, std::size_t views) {
    if (views == 1) return base;
    const auto slash = base.find_last_of('/');
    const auto dot = base.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return base + "_" + view;
    return base.substr(0, dot) + "_" + view + base.substr(dot);
}

inline void write_images(Report& rep, const PointCloud& cloud, const Settings& s, const std::string& path,
                         const IfsSystem* label_system) {
    if (s.views.empty()) fail(ErrorKind::semantic_error, "views: rendering needs dimension >= 2 and at least one view");
    std::optional<LabeledCloud> labeled;
    if (label_system != nullptr) labeled = label_by_map(*label_system, cloud);
    const PointCloud& drawn = labeled ? labeled->cloud : cloud;
    std::string written;
    for (const auto& v : s.views) {
        Viewport vp = Viewport::fit(drawn, v.axis_x, v.axis_y, v.width, v.height);
        const Raster r = project(drawn, vp, labeled ? &labeled->labels : nullptr);
        const std::string p = view_path(path, v.name, s.views.size());
        write_ppm_file(r, p);
        written += (written.empty() ? "" : " ") + p;
    }
    rep.add("images", written);
}

inline std::vector<Vector> lower_anchors(const RunConfig& cfg, const ParamFamily& fam) {
    if (cfg.anchors) return *cfg.anchors;
    if (cfg.scenario) {
        const auto& s = builtin_scenario(*cfg.scenario);
        if (s.anchors) return *s.anchors;
    }
    std::vector<Vector> out;
    const auto limits = limit_fixed_points(fam);
    for (std::size_t i = 0; i < limits.size(); ++i) {
        if (!limits[i].point) {
            fail(ErrorKind::semantic_error, "anchors: the fixed point of map " + std::to_string(i) +
                                                " has no limit as t -> 1; give anchors explicitly");
        }
        out.push_back(*limits[i].point);
    }
    return out;
}

} // namespace detail

/// Runs one operation. Files named in cfg.outputs are written; the report is
/// also returned. Throws Error on invalid input or I/O failure.
inline RunResult run(const RunConfig& cfg, unsigned threads = 1) {
    threads = threads_from_env(threads);
    const Settings s = resolve_settings(cfg);
    std::optional<ParamFamily> family = cfg.family;
    std::optional<CircleIfs> circle;
    if (cfg.scenario) {
        const auto& sc = builtin_scenario(*cfg.scenario);
        family = sc.family;
        circle = sc.circle;
    }
    RunResult out;
    Report& rep = out.report;
    rep.add("operation", to_string(cfg.operation));
    rep.add("scenario", cfg.scenario.value_or("inline"));

    SolveOptions opt;
    opt.eps = s.epsilon;
    opt.tol = s.tol;
    opt.r_max = s.r_max;
    opt.max_iter = s.max_iter;
    opt.threads = threads;

    switch (cfg.operation) {
    case Operation::attractor:
    case Operation::render: {
        const auto& fam = detail::require_family(cfg, family);
        std::optional<PointCloud> cloud;
        std::optional<IfsSystem> labels_from;
        if (cfg.operation == Operation::attractor || cfg.source == RenderSource::attractor) {
            const IfsSystem sys = instantiate(fam, s.t);
            auto res = attractor_deterministic(sys, s.epsilon, s.tol, s.max_iter, s.r_max, threads);
            rep.add("t", s.t);
            rep.add("epsilon", s.epsilon);
            rep.add("tol", s.tol);
            rep.add("status", res.trace.converged ? "converged" : (res.trace.diverged ? "diverged" : "inconclusive"));
            rep.add("iterations", res.trace.iterations);
            rep.add("residual", res.trace.residuals.empty() ? 0.0 : res.trace.residuals.back());
            if (!res.trace.converged) out.exit_code = exit_negative;
            if (!res.trace.diverged) {
                if (res.trace.converged) rep.add("invariance_residual", invariance_residual(sys, res.cloud, threads));
                detail::add_cloud_keys(rep, res.cloud);
                cloud = std::move(res.cloud);
                labels_from = sys;
            }
        } else if (cfg.source == RenderSource::lower) {
            const IfsSystem base = instantiate(fam, 1.0);
            auto low = lower_transition({base, detail::lower_anchors(cfg, fam)}, s.epsilon, s.max_iter, s.r_max, threads);
            rep.add("status", low.unbounded ? "unbounded" : (low.cloud ? "compact" : "inconclusive"));
            if (low.cloud) {
                detail::add_cloud_keys(rep, *low.cloud);
                cloud = std::move(low.cloud);
            } else {
                out.exit_code = exit_negative;
            }
            labels_from = base;
        } else {
            auto up = upper_transition(fam, s.schedule.ratio, s.schedule.count, opt);
            rep.add("status", to_string(up.status));
            if (up.upper) {
                detail::add_cloud_keys(rep, *up.upper);
                cloud = std::move(up.upper);
                if (fam.affine_in_t()) labels_from = instantiate(fam, 1.0);
            } else {
                out.exit_code = exit_negative;
            }
        }
        if (cfg.operation == Operation::render && cfg.outputs.image.empty()) {
            fail(ErrorKind::semantic_error, "outputs.image: render needs an image path");
        }
        if (cloud && !cfg.outputs.image.empty()) {
            detail::write_images(rep, *cloud, s, cfg.outputs.image,
                                 cfg.color_by_map && labels_from ? &*labels_from : nullptr);
        }
        break;
    }
    case Operation::sweep: {
        const auto& fam = detail::require_family(cfg, family);
        const auto tr = sweep(fam, s.schedule.values(), opt);
        std::size_t converged = 0, diverged = 0;
        for (const auto& e : tr.entries) {
            converged += e.converged;
            diverged += e.diverged;
        }
        rep.add("epsilon", s.epsilon);
        rep.add("tol", s.tol);
        rep.add("entries", tr.entries.size());
        rep.add("converged", converged);
        rep.add("diverged", diverged);
        rep.add("status", to_string(tr.status));
        if (!cfg.outputs.csv.empty()) detail::write_text(cfg.outputs.csv, detail::sweep_csv(tr));
        if (tr.status != TransitionStatus::converged) out.exit_code = exit_negative;
        break;
    }
    case Operation::threshold: {
        const auto& fam = detail::require_family(cfg, family);
        JsrBounds b;
        const auto th = threshold(fam, s.depth, 1e-3, &b);
        rep.add("t_lo", th.t_lo);
        rep.add("t_hi", th.t_hi);
        rep.add("jsr_lower", b.lower);
        rep.add("jsr_upper", b.upper);
        rep.add("depth", b.depth);
        std::string word;
        for (std::size_t i : b.word) word += (word.empty() ? "" : " ") + std::to_string(i);
        rep.add("word", word);
        break;
    }
    case Operation::lower: {
        const auto& fam = detail::require_family(cfg, family);
        const auto anchors = detail::lower_anchors(cfg, fam);
        auto low = lower_transition({instantiate(fam, 1.0), anchors}, s.epsilon, s.max_iter, s.r_max, threads);
        rep.add("epsilon", s.epsilon);
        rep.add("anchors", anchors.size());
        rep.add("status", low.unbounded ? "unbounded" : (low.cloud ? "compact" : "inconclusive"));
        rep.add("iterations", low.trace.iterations);
        if (low.cloud) {
            detail::add_cloud_keys(rep, *low.cloud);
            if (!cfg.outputs.image.empty()) detail::write_images(rep, *low.cloud, s, cfg.outputs.image, nullptr);
        } else {
            out.exit_code = exit_negative;
        }
        break;
    }
    case Operation::upper: {
        const auto& fam = detail::require_family(cfg, family);
        if (fam.affine_in_t()) {
            const auto hc = check_h_conditions(fam);
            rep.add("h1", hc.h1);
            rep.add("h2", hc.h2);
            rep.add("h2_uniform", hc.h2_uniform);
            rep.add("h2_sup", hc.h2_sup);
            rep.add("h3", hc.h3);
        }
        const auto tr = upper_transition(fam, s.schedule.ratio, s.schedule.count, opt);
        rep.add("epsilon", s.epsilon);
        rep.add("tol", s.tol);
        rep.add("status", to_string(tr.status));
        rep.add("steps", tr.entries.size());
        if (!tr.entries.empty()) rep.add("t_last", tr.entries.back().t);
        if (!tr.cauchy_gaps.empty()) rep.add("last_gap", tr.cauchy_gaps.back());
        if (tr.upper) {
            if (fam.affine_in_t()) rep.add("invariance_residual", invariance_residual(instantiate(fam, 1.0), *tr.upper, threads));
            detail::add_cloud_keys(rep, *tr.upper);
            if (!cfg.outputs.image.empty()) detail::write_images(rep, *tr.upper, s, cfg.outputs.image, nullptr);
        } else {
            out.exit_code = exit_negative;
        }
        if (!cfg.outputs.csv.empty()) detail::write_text(cfg.outputs.csv, detail::sweep_csv(tr));
        break;
    }
    case Operation::verify_perturbation: {
        const auto& fam = detail::require_family(cfg, family);
        const auto pc = perturbation_check(instantiate(fam, s.t), instantiate(fam, s.t_other), std::nullopt, s.epsilon, threads);
        rep.add("t", s.t);
        rep.add("t_other", s.t_other);
        rep.add("epsilon", s.epsilon);
        rep.add("delta", pc.delta);
        rep.add("bound", pc.bound);
        rep.add("measured", pc.measured);
        rep.add("holds", pc.holds);
        rep.add("subinvariant", pc.subinvariant);
        rep.add("lip_g", pc.lip_g);
        rep.add("lip_h", pc.lip_h);
        if (!pc.holds) out.exit_code = exit_negative;
        break;
    }
    case Operation::circle_density: {
        if (!circle) {
            fail(ErrorKind::semantic_error, "operation circle-density needs a circle scenario (circle-rot or circle-double)");
        }
        const CircleIfs sys = cfg.alpha ? detail::circle_with_alpha(*circle, *cfg.alpha) : *circle;
        const auto gaps = density_profile(sys, s.theta0, s.n_max);
        rep.add("theta0", s.theta0);
        rep.add("steps", gaps.size());
        std::string csv = "n,max_arc_gap\n";
        for (std::size_t n = 0; n < gaps.size(); ++n) {
            rep.add("gap_" + std::to_string(n + 1), gaps[n]);
            csv += std::to_string(n + 1) + "," + format_number(gaps[n]) + "\n";
        }
        rep.add("final_gap", gaps.back());
        if (!cfg.outputs.csv.empty()) detail::write_text(cfg.outputs.csv, csv);
        break;
    }
    }
    if (!cfg.outputs.report.empty()) detail::write_text(cfg.outputs.report, rep.str());
    return out;
}

} // namespace ifs_transit
