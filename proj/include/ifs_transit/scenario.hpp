#pragma once

// Scenario catalog and the run-configuration text format (a YAML subset, see
// docs/scenario-format.md).

#include "ifs_transit/circle.hpp"
#include "ifs_transit/param.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace ifs_transit {

enum class Operation { attractor, sweep, threshold, lower, upper, verify_perturbation, circle_density, render };

inline const char* to_string(Operation op) {
    switch (op) {
    case Operation::attractor: return "attractor";
    case Operation::sweep: return "sweep";
    case Operation::threshold: return "threshold";
    case Operation::lower: return "lower";
    case Operation::upper: return "upper";
    case Operation::verify_perturbation: return "verify-perturbation";
    case Operation::circle_density: return "circle-density";
    case Operation::render: return "render";
    }
    return "unknown";
}

inline std::optional<Operation> operation_from_string(const std::string& s) {
    for (auto op : {Operation::attractor, Operation::sweep, Operation::threshold, Operation::lower, Operation::upper,
                    Operation::verify_perturbation, Operation::circle_density, Operation::render}) {
        if (s == to_string(op)) return op;
    }
    return std::nullopt;
}

enum class ScheduleKind { geometric, linear };

/// geometric: t_n = 1 - ratio^n, n = 1..count. linear: count evenly spaced
/// values from start to stop inclusive.
struct ScheduleSpec {
    ScheduleKind kind = ScheduleKind::geometric;
    double ratio = 0.5;
    std::size_t count = 30;
    double start = 0.1;
    double stop = 0.9;

    std::vector<double> values() const {
        std::vector<double> out;
        if (kind == ScheduleKind::geometric) {
            double rn = 1.0;
            for (std::size_t n = 1; n <= count; ++n) {
                rn *= ratio;
                out.push_back(1.0 - rn);
            }
        } else if (count == 1) {
            out.push_back(start);
        } else {
            for (std::size_t i = 0; i < count; ++i)
                out.push_back(start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1));
        }
        return out;
    }

    friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

struct ViewSpec {
    std::string name = "view";
    std::size_t axis_x = 0;
    std::size_t axis_y = 1;
    std::size_t width = 512;
    std::size_t height = 512;

    friend bool operator==(const ViewSpec&, const ViewSpec&) = default;
};

enum class RenderSource { attractor, lower, upper };

inline const char* to_string(RenderSource s) {
    switch (s) {
    case RenderSource::attractor: return "attractor";
    case RenderSource::lower: return "lower";
    case RenderSource::upper: return "upper";
    }
    return "unknown";
}

/// Numeric parameters of a run, fully resolved.
struct Settings {
    double t = 0.5;
    double t_other = 0.55;   ///< second parameter for verify-perturbation
    double epsilon = 0.01;
    double tol = 0.02;
    double r_max = 1e6;
    std::size_t max_iter = 10000;
    std::size_t depth = 12;  ///< product length for threshold bounds
    std::size_t n_max = 12;  ///< circle steps
    double theta0 = 0.3;
    ScheduleSpec schedule;
    std::vector<ViewSpec> views;
};

struct Scenario {
    std::string name;
    std::string notes;
    Operation default_operation = Operation::attractor;
    std::optional<ParamFamily> family;
    std::optional<CircleIfs> circle;
    std::optional<std::vector<Vector>> anchors; ///< lower-transition anchors; default: limit fixed points
    Settings defaults;
};

struct Outputs {
    std::string image;
    std::string csv;
    std::string report;

    friend bool operator==(const Outputs&, const Outputs&) = default;
};

/// One operation on either a catalog scenario or an inline family, with
/// optional parameter overrides.
struct RunConfig {
    Operation operation = Operation::attractor;
    std::optional<std::string> scenario;
    std::optional<ParamFamily> family;
    std::optional<double> t;
    std::optional<double> t_other;
    std::optional<double> epsilon;
    std::optional<double> tol;
    std::optional<double> r_max;
    std::optional<std::size_t> max_iter;
    std::optional<std::size_t> depth;
    std::optional<std::size_t> n_max;
    std::optional<double> theta0;
    std::optional<double> alpha;
    std::optional<ScheduleSpec> schedule;
    std::optional<std::vector<Vector>> anchors;
    std::optional<std::vector<ViewSpec>> views;
    RenderSource source = RenderSource::attractor;
    bool color_by_map = false;
    Outputs outputs;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline Matrix rotation_z(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {{c, -s, 0}, {s, c, 0}, {0, 0, 1}};
}

inline std::vector<ViewSpec> default_views(std::size_t dim) {
    if (dim >= 3) return {{"side", 0, 2, 512, 512}, {"bottom", 0, 1, 512, 512}};
    if (dim == 2) return {{"plane", 0, 1, 512, 512}};
    return {};
}

inline CircleIfs circle_with_alpha(const CircleIfs& sys, double alpha) {
    CircleIfs out = sys;
    for (auto& m : out.maps) {
        if (m.shift != 0.0) m.shift = alpha;
    }
    return out;
}

inline std::vector<Scenario> build_catalog() {
    std::vector<Scenario> out;
    const double r2 = std::sqrt(2.0) / 2.0;
    const Matrix rot45{{r2, -r2, 0}, {r2, r2, 0}, {0, 0, 1}};
    {
        Scenario s;
        s.name = "intro3d";
        s.notes = "Two anchored maps on R^3: rotation by pi/4 about the z-axis fixing (0,0,2), and 0.4 times that "
                  "rotation fixing (1,0,0). Threshold t = 1.";
        s.family = ParamFamily(3, {ParamAffineMap::anchored(rot45, {0, 0, 2}), ParamAffineMap::anchored(0.4 * rot45, {1, 0, 0})});
        s.defaults.t = 0.95;
        s.defaults.t_other = 0.9;
        s.defaults.epsilon = 0.02;
        s.defaults.tol = 0.04;
        s.defaults.views = default_views(3);
        out.push_back(std::move(s));
    }
    {
        // f1 = [[0, k1 t], [l1/t, 0]] v, f2 = [[0, k2 t], [l2/t, 0]] v + (1/l2 - t, 1/k2 - 1/t).
        const double k1 = 3.0, l1 = 0.25, k2 = 2.0, l2 = 0.2;
        Scenario s;
        s.name = "evcontr";
        s.notes = "Anti-diagonal maps on R^2 with entries k t and l / t (k1 = 3, l1 = 1/4, k2 = 2, l2 = 1/5). Not "
                  "Euclidean contractions, but the second iterate is, so an attractor exists for every t > 0.";
        s.family = ParamFamily(
            2, {ParamAffineMap(Matrix{{0, k1}, {0, 0}}, Vector{0, 0}, Vector{0, 0},
                               {ParamTerm{Basis::inverse, Matrix{{0, 0}, {l1, 0}}, Vector{0, 0}}}),
                ParamAffineMap(Matrix{{0, k2}, {0, 0}}, Vector{-1, 0}, Vector{1 / l2, 1 / k2},
                               {ParamTerm{Basis::inverse, Matrix{{0, 0}, {l2, 0}}, Vector{0, -1}}})});
        s.defaults.t = 1.0;
        s.defaults.t_other = 1.05;
        s.defaults.epsilon = 5e-3;
        s.defaults.tol = 1e-2;
        s.defaults.views = default_views(2);
        out.push_back(std::move(s));
    }
    {
        Scenario s;
        s.name = "halfline";
        s.notes = "g_t(x) = -t x and f_t(x) = -t x + t + 1 on R. For t >= 1/2 the attractor is the interval "
                  "[-t/(1-t), 1/(1-t)]; the lower transition set is the whole line.";
        s.default_operation = Operation::lower;
        s.family = ParamFamily(1, {ParamAffineMap(Matrix{{-1}}, Vector{0.0}, Vector{0.0}),
                                   ParamAffineMap(Matrix{{-1}}, Vector{1.0}, Vector{1.0})});
        s.defaults.t = 0.5;
        s.defaults.t_other = 0.55;
        s.defaults.epsilon = 1e-3;
        s.defaults.tol = 1e-3;
        s.defaults.r_max = 100.0;
        s.defaults.schedule.count = 20;
        out.push_back(std::move(s));
    }
    {
        Scenario s;
        s.name = "dream3d";
        s.notes = "Five anchored maps on R^3: three halvings toward the unit-circle points at angles 0, 2pi/3, "
                  "4pi/3 (a Sierpinski triangle in the xy-plane), a quarter turn about the y-axis fixing (0,1,0) "
                  "and the reflection y -> -y fixing (0,0,1).";
        s.default_operation = Operation::lower;
        const Matrix half = 0.5 * Matrix::identity(3);
        const Matrix quarter_y{{0, 0, 1}, {0, 1, 0}, {-1, 0, 0}};
        const Matrix reflect_y{{1, 0, 0}, {0, -1, 0}, {0, 0, 1}};
        std::vector<ParamAffineMap> maps;
        for (int i = 0; i < 3; ++i) {
            const double a = 2.0 * std::numbers::pi * i / 3.0;
            maps.push_back(ParamAffineMap::anchored(half, {std::cos(a), std::sin(a), 0.0}));
        }
        maps.push_back(ParamAffineMap::anchored(quarter_y, {0, 1, 0}));
        maps.push_back(ParamAffineMap::anchored(reflect_y, {0, 0, 1}));
        s.family = ParamFamily(3, std::move(maps));
        s.defaults.t = 0.9;
        s.defaults.t_other = 0.85;
        s.defaults.epsilon = 0.01;
        s.defaults.tol = 0.02;
        s.defaults.views = default_views(3);
        out.push_back(std::move(s));
    }
    {
        Scenario s;
        s.name = "linear2d";
        s.notes = "Linear family {t L1, t L2} on R^2 with L1 = diag(0.02, 1) and L2 = [[0.0594, -1.98], [0.495, "
                  "0.01547]]. Its threshold is the reciprocal of the joint spectral radius.";
        s.default_operation = Operation::threshold;
        s.family = ParamFamily(2, {ParamAffineMap(Matrix{{0.02, 0}, {0, 1}}, Vector{0, 0}, Vector{0, 0}),
                                   ParamAffineMap(Matrix{{0.0594, -1.98}, {0.495, 0.01547}}, Vector{0, 0}, Vector{0, 0})});
        s.defaults.t = 0.5;
        s.defaults.epsilon = 0.01;
        s.defaults.views = default_views(2);
        out.push_back(std::move(s));
    }
    {
        Scenario s;
        s.name = "circle-rot";
        s.notes = "Angle doubling, an irrational rotation and the identity on the circle. The rotation orbit alone "
                  "is dense.";
        s.default_operation = Operation::circle_density;
        s.circle = CircleIfs{{CircleMap::doubling(), CircleMap::rotation(golden_angle), CircleMap::identity()}};
        out.push_back(std::move(s));
    }
    {
        Scenario s;
        s.name = "circle-double";
        s.notes = "Angle doubling and doubling followed by an irrational rotation. The n-step image of {theta} is "
                  "{2^n theta + m alpha : 0 <= m < 2^n}.";
        s.default_operation = Operation::circle_density;
        s.circle = CircleIfs{{CircleMap::doubling(), CircleMap::doubling_then_rotation(golden_angle)}};
        out.push_back(std::move(s));
    }
    {
        Scenario s;
        s.name = "pole-f";
        s.notes = "f_t(x) = t x / 2 + (2 - t)/(1 - t) and g_t(x) = t x on R. The fixed point of f_t runs off to "
                  "infinity as t -> 1, so no upper transition set exists.";
        s.default_operation = Operation::upper;
        s.family = ParamFamily(1, {ParamAffineMap(Matrix{{0.5}}, Vector{0.0}, Vector{1.0},
                                                  {ParamTerm{Basis::pole, Matrix{{0.0}}, Vector{1.0}}}),
                                   ParamAffineMap(Matrix{{1.0}}, Vector{0.0}, Vector{0.0})});
        s.defaults.epsilon = 0.01;
        s.defaults.tol = 0.02;
        s.defaults.r_max = 1000.0;
        s.defaults.schedule.count = 20;
        out.push_back(std::move(s));
    }
    {
        Scenario s;
        s.name = "offset-g";
        s.notes = "f_t(x) = t x / 2 + 1 and g_t(x) = t x + 1 on R. g_1 is a translation, the fixed point of g_t "
                  "diverges as t -> 1, and no upper transition set exists.";
        s.default_operation = Operation::upper;
        s.family = ParamFamily(1, {ParamAffineMap(Matrix{{0.5}}, Vector{0.0}, Vector{1.0}),
                                   ParamAffineMap(Matrix{{1.0}}, Vector{0.0}, Vector{1.0})});
        s.defaults.epsilon = 0.01;
        s.defaults.tol = 0.02;
        s.defaults.r_max = 1000.0;
        s.defaults.schedule.count = 20;
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace detail

inline const std::vector<Scenario>& catalog() {
    static const std::vector<Scenario> scenarios = detail::build_catalog();
    return scenarios;
}

inline const Scenario& builtin_scenario(const std::string& name) {
    std::string known;
    for (const auto& s : catalog()) {
        if (s.name == name) return s;
        known += (known.empty() ? "" : ", ") + s.name;
    }
    fail(ErrorKind::semantic_error, "scenario: unknown name '" + name + "' (known: " + known + ")");
}

namespace detail {

inline std::string where(const YAML::Node& n) {
    const auto m = n.Mark();
    if (m.is_null()) return "";
    return " (line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ")";
}

[[noreturn]] inline void semantic(const std::string& field, const std::string& what, const YAML::Node& n) {
    fail(ErrorKind::semantic_error, field + ": " + what + where(n));
}

inline double read_double(const YAML::Node& n, const std::string& field) {
    if (!n.IsScalar()) semantic(field, "expected a number", n);
    double v = 0.0;
    if (!YAML::convert<double>::decode(n, v)) semantic(field, "expected a number, got '" + n.Scalar() + "'", n);
    if (!std::isfinite(v)) semantic(field, "must be finite", n);
    return v;
}

inline std::size_t read_count(const YAML::Node& n, const std::string& field) {
    if (!n.IsScalar()) semantic(field, "expected a non-negative integer", n);
    long long v = 0;
    if (!YAML::convert<long long>::decode(n, v) || v < 0) {
        semantic(field, "expected a non-negative integer, got '" + n.Scalar() + "'", n);
    }
    return static_cast<std::size_t>(v);
}

inline std::string read_string(const YAML::Node& n, const std::string& field) {
    if (!n.IsScalar()) semantic(field, "expected a string", n);
    return n.Scalar();
}

inline bool read_bool(const YAML::Node& n, const std::string& field) {
    bool v = false;
    if (!n.IsScalar() || !YAML::convert<bool>::decode(n, v)) semantic(field, "expected true or false", n);
    return v;
}

inline Vector read_vector(const YAML::Node& n, std::size_t dim, const std::string& field) {
    if (!n.IsSequence()) semantic(field, "expected a list of " + std::to_string(dim) + " numbers", n);
    if (n.size() != dim) semantic(field, "expected " + std::to_string(dim) + " entries", n);
    Vector v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = read_double(n[i], field + "[" + std::to_string(i) + "]");
    return v;
}

inline Matrix read_matrix(const YAML::Node& n, std::size_t dim, const std::string& field) {
    if (!n.IsSequence()) semantic(field, "expected a list of " + std::to_string(dim) + " rows", n);
    if (n.size() != dim) semantic(field, "expected " + std::to_string(dim) + " rows", n);
    std::vector<double> entries;
    for (std::size_t r = 0; r < dim; ++r) {
        const YAML::Node row = n[r];
        const std::string row_field = field + " row " + std::to_string(r);
        if (!row.IsSequence() || row.size() != dim) {
            fail(ErrorKind::semantic_error, row_field + ": expected " + std::to_string(dim) + " entries" + where(row));
        }
        for (std::size_t c = 0; c < dim; ++c) entries.push_back(read_double(row[c], row_field));
    }
    return {dim, std::move(entries)};
}

inline void check_keys(const YAML::Node& n, const std::set<std::string>& allowed, const std::string& field) {
    if (!n.IsMap()) semantic(field, "expected a mapping", n);
    for (const auto& kv : n) {
        const std::string key = kv.first.as<std::string>();
        if (!allowed.count(key)) {
            fail(ErrorKind::semantic_error,
                 (field.empty() ? "" : field + ": ") + "unknown key '" + key + "'" + where(kv.first));
        }
    }
}

inline ParamAffineMap read_map(const YAML::Node& n, std::size_t dim, std::size_t index) {
    const std::string field = "map[" + std::to_string(index) + "]";
    check_keys(n, {"L", "u", "w", "anchor", "isometry", "terms"}, field);
    if (!n["L"]) semantic(field, "missing key 'L'", n);
    Matrix lin = read_matrix(n["L"], dim, field + ".L");
    ParamAffineMap map;
    if (n["anchor"]) {
        if (n["u"] || n["w"] || n["terms"]) semantic(field, "'anchor' cannot be combined with u, w or terms", n);
        map = ParamAffineMap::anchored(std::move(lin), read_vector(n["anchor"], dim, field + ".anchor"));
    } else {
        Vector u = n["u"] ? read_vector(n["u"], dim, field + ".u") : Vector(dim);
        Vector w = n["w"] ? read_vector(n["w"], dim, field + ".w") : Vector(dim);
        std::vector<ParamTerm> terms;
        if (const YAML::Node ts = n["terms"]) {
            if (!ts.IsSequence()) semantic(field + ".terms", "expected a list", ts);
            for (std::size_t k = 0; k < ts.size(); ++k) {
                const std::string tf = field + ".terms[" + std::to_string(k) + "]";
                check_keys(ts[k], {"basis", "L", "u"}, tf);
                ParamTerm term;
                const std::string basis = ts[k]["basis"] ? read_string(ts[k]["basis"], tf + ".basis") : "";
                if (basis == "inverse") term.basis = Basis::inverse;
                else if (basis == "pole") term.basis = Basis::pole;
                else semantic(tf + ".basis", "expected 'inverse' or 'pole'", ts[k]);
                term.linear = ts[k]["L"] ? read_matrix(ts[k]["L"], dim, tf + ".L") : Matrix(dim, std::vector<double>(dim * dim, 0.0));
                term.offset = ts[k]["u"] ? read_vector(ts[k]["u"], dim, tf + ".u") : Vector(dim);
                terms.push_back(std::move(term));
            }
        }
        map = ParamAffineMap(std::move(lin), std::move(u), std::move(w), std::move(terms));
    }
    if (n["isometry"] && read_bool(n["isometry"], field + ".isometry") && !(map.affine_in_t() && is_orthogonal(map.linear()))) {
        semantic(field + ".isometry", "declared true but L is not orthogonal", n["isometry"]);
    }
    return map;
}

inline ScheduleSpec read_schedule(const YAML::Node& n) {
    check_keys(n, {"kind", "ratio", "count", "start", "stop"}, "schedule");
    ScheduleSpec s;
    const std::string kind = n["kind"] ? read_string(n["kind"], "schedule.kind") : "geometric";
    if (kind == "geometric") s.kind = ScheduleKind::geometric;
    else if (kind == "linear") s.kind = ScheduleKind::linear;
    else semantic("schedule.kind", "expected 'geometric' or 'linear'", n["kind"]);
    if (n["ratio"]) s.ratio = read_double(n["ratio"], "schedule.ratio");
    if (n["count"]) s.count = read_count(n["count"], "schedule.count");
    if (n["start"]) s.start = read_double(n["start"], "schedule.start");
    if (n["stop"]) s.stop = read_double(n["stop"], "schedule.stop");
    if (s.kind == ScheduleKind::geometric && !(s.ratio > 0.0 && s.ratio < 1.0)) semantic("schedule.ratio", "must lie in (0, 1)", n);
    if (s.count == 0) semantic("schedule.count", "must be >= 1", n);
    if (s.kind == ScheduleKind::linear && s.count > 1 && !(s.start < s.stop)) semantic("schedule", "start must be below stop", n);
    if (s.kind == ScheduleKind::linear && s.start < 0.0) semantic("schedule.start", "must be >= 0", n);
    return s;
}

inline ViewSpec read_view(const YAML::Node& n, std::size_t index) {
    const std::string field = "views[" + std::to_string(index) + "]";
    check_keys(n, {"name", "axes", "width", "height"}, field);
    ViewSpec v;
    if (n["name"]) v.name = read_string(n["name"], field + ".name");
    if (const YAML::Node axes = n["axes"]) {
        if (!axes.IsSequence() || axes.size() != 2) semantic(field + ".axes", "expected two axis indices", axes);
        v.axis_x = read_count(axes[0], field + ".axes");
        v.axis_y = read_count(axes[1], field + ".axes");
    }
    if (n["width"]) v.width = read_count(n["width"], field + ".width");
    if (n["height"]) v.height = read_count(n["height"], field + ".height");
    if (v.width == 0 || v.height == 0) semantic(field, "width and height must be >= 1", n);
    if (v.axis_x == v.axis_y) semantic(field + ".axes", "axes must differ", n);
    return v;
}

} // namespace detail

/// Parses a run configuration. Throws parse_error (with line and column) on
/// malformed text and semantic_error naming the offending field otherwise.
inline RunConfig load_scenario(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        fail(ErrorKind::parse_error, "line " + std::to_string(e.mark.line + 1) + ", column " +
                                         std::to_string(e.mark.column + 1) + ": " + e.msg);
    }
    if (!root.IsMap()) fail(ErrorKind::parse_error, "line 1, column 1: expected a mapping at top level");
    using namespace detail;
    check_keys(root, {"operation", "scenario", "dim", "maps", "t", "t_other", "epsilon", "tol", "r_max", "max_iter",
                      "depth", "n_max", "theta0", "alpha", "schedule", "anchors", "views", "render", "outputs"},
               "");

    RunConfig cfg;
    if (!root["operation"]) fail(ErrorKind::semantic_error, "operation: missing (exactly one operation is required)");
    {
        const std::string op = read_string(root["operation"], "operation");
        const auto parsed = operation_from_string(op);
        if (!parsed) semantic("operation", "unknown operation '" + op + "'", root["operation"]);
        cfg.operation = *parsed;
    }
    if (root["scenario"]) {
        cfg.scenario = read_string(root["scenario"], "scenario");
        (void)builtin_scenario(*cfg.scenario);
        if (root["dim"] || root["maps"]) semantic("scenario", "give either a scenario name or dim and maps, not both", root["scenario"]);
    }
    std::size_t dim = 0;
    if (root["dim"] || root["maps"]) {
        if (!root["dim"]) fail(ErrorKind::semantic_error, "dim: missing (required with maps)");
        if (!root["maps"]) semantic("maps", "missing (required with dim)", root["dim"]);
        dim = read_count(root["dim"], "dim");
        if (dim == 0) semantic("dim", "must be >= 1", root["dim"]);
        const YAML::Node maps = root["maps"];
        if (!maps.IsSequence() || maps.size() == 0) semantic("maps", "expected a non-empty list", maps);
        std::vector<ParamAffineMap> list;
        for (std::size_t i = 0; i < maps.size(); ++i) list.push_back(read_map(maps[i], dim, i));
        cfg.family = ParamFamily(dim, std::move(list));
    }
    if (!cfg.scenario && !cfg.family) fail(ErrorKind::semantic_error, "scenario: missing (or give dim and maps)");
    if (cfg.scenario) {
        const Scenario& s = builtin_scenario(*cfg.scenario);
        dim = s.family ? s.family->dim() : 0;
    }

    if (root["t"]) cfg.t = read_double(root["t"], "t");
    if (root["t_other"]) cfg.t_other = read_double(root["t_other"], "t_other");
    if (root["epsilon"]) cfg.epsilon = read_double(root["epsilon"], "epsilon");
    if (root["tol"]) cfg.tol = read_double(root["tol"], "tol");
    if (root["r_max"]) cfg.r_max = read_double(root["r_max"], "r_max");
    if (root["max_iter"]) cfg.max_iter = read_count(root["max_iter"], "max_iter");
    if (root["depth"]) cfg.depth = read_count(root["depth"], "depth");
    if (root["n_max"]) cfg.n_max = read_count(root["n_max"], "n_max");
    if (root["theta0"]) cfg.theta0 = read_double(root["theta0"], "theta0");
    if (root["alpha"]) cfg.alpha = read_double(root["alpha"], "alpha");
    if (cfg.t && *cfg.t < 0.0) semantic("t", "must be >= 0", root["t"]);
    if (cfg.t_other && *cfg.t_other < 0.0) semantic("t_other", "must be >= 0", root["t_other"]);
    if (cfg.epsilon && !(*cfg.epsilon > 0.0)) semantic("epsilon", "must be > 0", root["epsilon"]);
    if (cfg.tol && !(*cfg.tol > 0.0)) semantic("tol", "must be > 0", root["tol"]);
    if (cfg.r_max && !(*cfg.r_max > 0.0)) semantic("r_max", "must be > 0", root["r_max"]);
    if (cfg.depth && *cfg.depth == 0) semantic("depth", "must be >= 1", root["depth"]);
    if (cfg.n_max && *cfg.n_max == 0) semantic("n_max", "must be >= 1", root["n_max"]);
    if (root["schedule"]) cfg.schedule = read_schedule(root["schedule"]);
    if (const YAML::Node anchors = root["anchors"]) {
        if (dim == 0) semantic("anchors", "needs a family", anchors);
        if (!anchors.IsSequence() || anchors.size() == 0) semantic("anchors", "expected a non-empty list of points", anchors);
        std::vector<Vector> pts;
        for (std::size_t i = 0; i < anchors.size(); ++i) pts.push_back(read_vector(anchors[i], dim, "anchors[" + std::to_string(i) + "]"));
        cfg.anchors = std::move(pts);
    }
    if (const YAML::Node views = root["views"]) {
        if (!views.IsSequence()) semantic("views", "expected a list", views);
        std::vector<ViewSpec> list;
        for (std::size_t i = 0; i < views.size(); ++i) {
            list.push_back(read_view(views[i], i));
            if (list.back().axis_x >= dim || list.back().axis_y >= dim) {
                semantic("views[" + std::to_string(i) + "].axes", "axis out of range for dimension " + std::to_string(dim), views[i]);
            }
        }
        cfg.views = std::move(list);
    }
    if (const YAML::Node render = root["render"]) {
        check_keys(render, {"source", "color_by"}, "render");
        if (render["source"]) {
            const std::string src = read_string(render["source"], "render.source");
            if (src == "attractor") cfg.source = RenderSource::attractor;
            else if (src == "lower") cfg.source = RenderSource::lower;
            else if (src == "upper") cfg.source = RenderSource::upper;
            else semantic("render.source", "expected attractor, lower or upper", render["source"]);
        }
        if (render["color_by"]) {
            const std::string c = read_string(render["color_by"], "render.color_by");
            if (c == "map") cfg.color_by_map = true;
            else if (c != "none") semantic("render.color_by", "expected 'none' or 'map'", render["color_by"]);
        }
    }
    if (const YAML::Node o = root["outputs"]) {
        check_keys(o, {"image", "csv", "report"}, "outputs");
        if (o["image"]) cfg.outputs.image = read_string(o["image"], "outputs.image");
        if (o["csv"]) cfg.outputs.csv = read_string(o["csv"], "outputs.csv");
        if (o["report"]) cfg.outputs.report = read_string(o["report"], "outputs.report");
    }
    return cfg;
}

namespace detail {

inline void emit_vector(YAML::Emitter& e, const Vector& v) {
    e << YAML::Flow << YAML::BeginSeq;
    for (std::size_t i = 0; i < v.dim(); ++i) e << v[i];
    e << YAML::EndSeq;
}

inline void emit_matrix(YAML::Emitter& e, const Matrix& m) {
    e << YAML::Flow << YAML::BeginSeq;
    for (std::size_t r = 0; r < m.dim(); ++r) {
        e << YAML::Flow << YAML::BeginSeq;
        for (std::size_t c = 0; c < m.dim(); ++c) e << m(r, c);
        e << YAML::EndSeq;
    }
    e << YAML::EndSeq;
}

} // namespace detail

/// Text that load_scenario parses back to an equal RunConfig. Numbers are
/// written with 17 significant digits.
inline std::string serialize(const RunConfig& cfg) {
    using detail::emit_matrix;
    using detail::emit_vector;
    YAML::Emitter e;
    e.SetDoublePrecision(17);
    e << YAML::BeginMap;
    e << YAML::Key << "operation" << YAML::Value << to_string(cfg.operation);
    if (cfg.scenario) e << YAML::Key << "scenario" << YAML::Value << *cfg.scenario;
    if (cfg.family) {
        const auto& fam = *cfg.family;
        e << YAML::Key << "dim" << YAML::Value << fam.dim();
        e << YAML::Key << "maps" << YAML::Value << YAML::BeginSeq;
        for (std::size_t i = 0; i < fam.size(); ++i) {
            const auto& m = fam[i];
            e << YAML::BeginMap;
            e << YAML::Key << "L" << YAML::Value;
            emit_matrix(e, m.linear());
            e << YAML::Key << "u" << YAML::Value;
            emit_vector(e, m.u());
            e << YAML::Key << "w" << YAML::Value;
            emit_vector(e, m.w());
            e << YAML::Key << "isometry" << YAML::Value << static_cast<bool>(fam.isometry_flags()[i]);
            if (!m.terms().empty()) {
                e << YAML::Key << "terms" << YAML::Value << YAML::BeginSeq;
                for (const auto& term : m.terms()) {
                    e << YAML::BeginMap << YAML::Key << "basis" << YAML::Value << to_string(term.basis);
                    e << YAML::Key << "L" << YAML::Value;
                    emit_matrix(e, term.linear);
                    e << YAML::Key << "u" << YAML::Value;
                    emit_vector(e, term.offset);
                    e << YAML::EndMap;
                }
                e << YAML::EndSeq;
            }
            e << YAML::EndMap;
        }
        e << YAML::EndSeq;
    }
    auto scalar = [&](const char* key, const auto& value) {
        if (value) e << YAML::Key << key << YAML::Value << *value;
    };
    scalar("t", cfg.t);
    scalar("t_other", cfg.t_other);
    scalar("epsilon", cfg.epsilon);
    scalar("tol", cfg.tol);
    scalar("r_max", cfg.r_max);
    scalar("max_iter", cfg.max_iter);
    scalar("depth", cfg.depth);
    scalar("n_max", cfg.n_max);
    scalar("theta0", cfg.theta0);
    scalar("alpha", cfg.alpha);
    if (cfg.schedule) {
        const auto& s = *cfg.schedule;
        e << YAML::Key << "schedule" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "kind" << YAML::Value << (s.kind == ScheduleKind::geometric ? "geometric" : "linear");
        e << YAML::Key << "ratio" << YAML::Value << s.ratio;
        e << YAML::Key << "count" << YAML::Value << s.count;
        e << YAML::Key << "start" << YAML::Value << s.start;
        e << YAML::Key << "stop" << YAML::Value << s.stop;
        e << YAML::EndMap;
    }
    if (cfg.anchors) {
        e << YAML::Key << "anchors" << YAML::Value << YAML::BeginSeq;
        for (const auto& a : *cfg.anchors) emit_vector(e, a);
        e << YAML::EndSeq;
    }
    if (cfg.views) {
        e << YAML::Key << "views" << YAML::Value << YAML::BeginSeq;
        for (const auto& v : *cfg.views) {
            e << YAML::BeginMap << YAML::Key << "name" << YAML::Value << v.name;
            e << YAML::Key << "axes" << YAML::Value << YAML::Flow << YAML::BeginSeq << v.axis_x << v.axis_y << YAML::EndSeq;
            e << YAML::Key << "width" << YAML::Value << v.width;
            e << YAML::Key << "height" << YAML::Value << v.height << YAML::EndMap;
        }
        e << YAML::EndSeq;
    }
    e << YAML::Key << "render" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "source" << YAML::Value << to_string(cfg.source);
    e << YAML::Key << "color_by" << YAML::Value << (cfg.color_by_map ? "map" : "none") << YAML::EndMap;
    if (!cfg.outputs.image.empty() || !cfg.outputs.csv.empty() || !cfg.outputs.report.empty()) {
        e << YAML::Key << "outputs" << YAML::Value << YAML::BeginMap;
        if (!cfg.outputs.image.empty()) e << YAML::Key << "image" << YAML::Value << cfg.outputs.image;
        if (!cfg.outputs.csv.empty()) e << YAML::Key << "csv" << YAML::Value << cfg.outputs.csv;
        if (!cfg.outputs.report.empty()) e << YAML::Key << "report" << YAML::Value << cfg.outputs.report;
        e << YAML::EndMap;
    }
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

/// Scenario defaults with the config's overrides applied.
inline Settings resolve_settings(const RunConfig& cfg) {
    Settings s;
    if (cfg.scenario) s = builtin_scenario(*cfg.scenario).defaults;
    else if (cfg.family) s.views = detail::default_views(cfg.family->dim());
    if (cfg.t) s.t = *cfg.t;
    if (cfg.t_other) s.t_other = *cfg.t_other;
    if (cfg.epsilon) s.epsilon = *cfg.epsilon;
    if (cfg.tol) s.tol = *cfg.tol;
    if (cfg.r_max) s.r_max = *cfg.r_max;
    if (cfg.max_iter) s.max_iter = *cfg.max_iter;
    if (cfg.depth) s.depth = *cfg.depth;
    if (cfg.n_max) s.n_max = *cfg.n_max;
    if (cfg.theta0) s.theta0 = *cfg.theta0;
    if (cfg.schedule) s.schedule = *cfg.schedule;
    if (cfg.views) s.views = *cfg.views;
    return s;
}

} // namespace ifs_transit
