// Command-line front end: one operation per process.

#include "ifs_transit/runner.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace ifs_transit;

struct Flags {
    std::string config;
    std::string scenario;
    std::optional<double> t, t_other, epsilon, tol, r_max, theta0, alpha, ratio;
    std::optional<std::size_t> max_iter, depth, n_max, count;
    std::string source;
    std::string color_by;
    std::string image, csv, report;
};

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(ErrorKind::io_error, "cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void add_flags(CLI::App* cmd, Flags& f, Operation op) {
    cmd->add_option("--config", f.config, "scenario file (YAML); flags override its values");
    cmd->add_option("--scenario", f.scenario, "catalog scenario name");
    if (op == Operation::circle_density) {
        cmd->add_option("--theta0", f.theta0, "starting angle");
        cmd->add_option("--alpha", f.alpha, "rotation angle");
        cmd->add_option("--n-max", f.n_max, "number of steps");
        cmd->add_option("--csv", f.csv, "write n,max_arc_gap rows here");
    } else {
        if (op != Operation::threshold) {
            cmd->add_option("--t", f.t, "parameter value");
            cmd->add_option("--epsilon", f.epsilon, "grid resolution");
            cmd->add_option("--tol", f.tol, "convergence tolerance");
            cmd->add_option("--r-max", f.r_max, "divergence radius");
            cmd->add_option("--max-iter", f.max_iter, "iteration cap");
        }
        if (op == Operation::threshold) cmd->add_option("--depth", f.depth, "longest matrix product");
        if (op == Operation::verify_perturbation) cmd->add_option("--t-other", f.t_other, "parameter of the second system");
        if (op == Operation::sweep || op == Operation::upper || op == Operation::render) {
            cmd->add_option("--ratio", f.ratio, "geometric schedule ratio r, t_n = 1 - r^n");
            cmd->add_option("--count", f.count, "number of schedule steps");
        }
        if (op == Operation::sweep || op == Operation::upper) cmd->add_option("--csv", f.csv, "sweep diagnostics CSV");
        if (op == Operation::render) {
            cmd->add_option("--source", f.source, "attractor, lower or upper")->check(CLI::IsMember({"attractor", "lower", "upper"}));
            cmd->add_option("--color-by", f.color_by, "none or map")->check(CLI::IsMember({"none", "map"}));
        }
        if (op == Operation::attractor || op == Operation::lower || op == Operation::upper || op == Operation::render) {
            cmd->add_option("--image", f.image, "PPM output path (one file per view, suffixed by view name)");
        }
    }
    cmd->add_option("--report", f.report, "also write the key = value report here");
}

RunConfig build_config(const Flags& f, Operation op) {
    RunConfig cfg;
    if (!f.config.empty()) {
        cfg = load_scenario(read_file(f.config));
        if (cfg.operation != op) {
            fail(ErrorKind::semantic_error, std::string("operation: file selects ") + to_string(cfg.operation) +
                                                " but the subcommand is " + to_string(op));
        }
    }
    cfg.operation = op;
    if (!f.scenario.empty()) {
        (void)builtin_scenario(f.scenario);
        cfg.scenario = f.scenario;
        cfg.family.reset();
    }
    if (!cfg.scenario && !cfg.family) fail(ErrorKind::semantic_error, "scenario: give --scenario NAME or --config FILE");
    auto set = [](auto& target, const auto& value) {
        if (value) target = value;
    };
    set(cfg.t, f.t);
    set(cfg.t_other, f.t_other);
    set(cfg.epsilon, f.epsilon);
    set(cfg.tol, f.tol);
    set(cfg.r_max, f.r_max);
    set(cfg.theta0, f.theta0);
    set(cfg.alpha, f.alpha);
    set(cfg.max_iter, f.max_iter);
    set(cfg.depth, f.depth);
    set(cfg.n_max, f.n_max);
    if (f.ratio || f.count) {
        ScheduleSpec s = cfg.schedule ? *cfg.schedule : resolve_settings(cfg).schedule;
        s.kind = ScheduleKind::geometric;
        if (f.ratio) s.ratio = *f.ratio;
        if (f.count) s.count = *f.count;
        cfg.schedule = s;
    }
    if (cfg.epsilon && !(*cfg.epsilon > 0.0)) fail(ErrorKind::semantic_error, "epsilon: must be > 0");
    if (cfg.tol && !(*cfg.tol > 0.0)) fail(ErrorKind::semantic_error, "tol: must be > 0");
    if (cfg.schedule && !(cfg.schedule->ratio > 0.0 && cfg.schedule->ratio < 1.0)) {
        fail(ErrorKind::semantic_error, "schedule.ratio: must lie in (0, 1)");
    }
    if (f.source == "lower") cfg.source = RenderSource::lower;
    else if (f.source == "upper") cfg.source = RenderSource::upper;
    else if (f.source == "attractor") cfg.source = RenderSource::attractor;
    if (!f.color_by.empty()) cfg.color_by_map = f.color_by == "map";
    if (!f.image.empty()) cfg.outputs.image = f.image;
    if (!f.csv.empty()) cfg.outputs.csv = f.csv;
    if (!f.report.empty()) cfg.outputs.report = f.report;
    return cfg;
}

int scenario_list() {
    for (const auto& s : catalog()) std::cout << s.name << "  (" << to_string(s.default_operation) << ")  " << s.notes << "\n";
    return exit_ok;
}

int scenario_show(const std::string& name) {
    const Scenario& s = builtin_scenario(name);
    std::cout << "# " << s.notes << "\n";
    if (s.circle) {
        std::cout << "# circle maps (theta -> k theta + shift):";
        for (const auto& m : s.circle->maps) std::cout << " (" << m.multiplier << ", " << format_number(m.shift) << ")";
        std::cout << "\n";
    }
    RunConfig cfg;
    cfg.operation = s.default_operation;
    cfg.family = s.family;
    if (!s.family) cfg.scenario = s.name;
    const Settings& d = s.defaults;
    cfg.t = d.t;
    cfg.epsilon = d.epsilon;
    cfg.tol = d.tol;
    cfg.r_max = d.r_max;
    cfg.schedule = d.schedule;
    if (!d.views.empty()) cfg.views = d.views;
    std::cout << serialize(cfg);
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Attractors of one-parameter affine IFS families and their transition sets"};
    app.require_subcommand(1);
    unsigned threads = 0;
    const char* threads_help = "worker threads (default: IFS_TRANSIT_THREADS, else 1)";
    app.add_option("--threads", threads, threads_help);

    const std::vector<std::pair<Operation, const char*>> ops{
        {Operation::attractor, "attractor of F_t by grid iteration"},
        {Operation::sweep, "attractors along a parameter schedule"},
        {Operation::threshold, "joint spectral radius bracket and threshold"},
        {Operation::lower, "lower transition set at t = 1"},
        {Operation::upper, "upper transition set along t_n = 1 - r^n"},
        {Operation::verify_perturbation, "attractor perturbation bound between F_t and F_t_other"},
        {Operation::circle_density, "arc-gap profile of circle dynamics"},
        {Operation::render, "write PPM views of an attractor or transition set"},
    };
    std::vector<Flags> flags(ops.size());
    std::vector<CLI::App*> cmds;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        CLI::App* cmd = app.add_subcommand(to_string(ops[i].first), ops[i].second);
        add_flags(cmd, flags[i], ops[i].first);
        cmd->add_option("--threads", threads, threads_help);
        cmds.push_back(cmd);
    }
    CLI::App* scen = app.add_subcommand("scenario", "inspect the scenario catalog");
    scen->require_subcommand(1);
    CLI::App* list = scen->add_subcommand("list", "list catalog scenarios");
    std::string show_name;
    CLI::App* show = scen->add_subcommand("show", "print a scenario as a config file");
    show->add_option("name", show_name, "scenario name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_error;
    }

    try {
        if (list->parsed()) return scenario_list();
        if (show->parsed()) return scenario_show(show_name);
        for (std::size_t i = 0; i < ops.size(); ++i) {
            if (!cmds[i]->parsed()) continue;
            const RunConfig cfg = build_config(flags[i], ops[i].first);
            const RunResult res = run(cfg, threads);
            std::cout << res.report.str();
            return res.exit_code;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
        return exit_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_error;
    }
    return exit_error;
}
