// Acceptance checks, one PASS/FAIL line per criterion.
//
//   acceptance           run every criterion
//   acceptance 3 5       run criteria 3 and 5
//
// Exit status is nonzero when any selected criterion fails.

#include "ifs_transit/circle.hpp"
#include "ifs_transit/family.hpp"
#include "ifs_transit/hutch.hpp"
#include "ifs_transit/metric.hpp"
#include "ifs_transit/render.hpp"
#include "ifs_transit/scenario.hpp"
#include "goldens.hpp"
#include "oracles/oracle_values.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

using namespace ifs_transit;

namespace {

// Collects sub-check results and a short detail string for the report line.
class Check {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok) {
            pass_ = false;
            failed_ += (failed_.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string& s) { notes_ += (notes_.empty() ? "" : ", ") + s; }

    bool pass() const { return pass_; }
    const std::string& failed() const { return failed_; }
    const std::string& notes() const { return notes_; }

private:
    bool pass_ = true;
    std::string failed_;
    std::string notes_;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

const ParamFamily& family_of(const std::string& name) { return *builtin_scenario(name).family; }

PointCloud interval(double lo, double hi, double eps) {
    std::vector<Vector> pts;
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / (eps / 4)));
    for (std::size_t i = 0; i <= n; ++i) pts.push_back(Vector{lo + (hi - lo) * double(i) / double(n)});
    return quantize(pts, eps);
}

std::vector<Vector> anchors_of(const ParamFamily& fam) {
    std::vector<Vector> out;
    for (const auto& lp : limit_fixed_points(fam)) out.push_back(lp.point.value());
    return out;
}

void check_closed_form_interval(Check& c) {
    const double eps = 1e-3;
    for (double t : {0.25, 0.5, 0.75}) {
        const auto start = std::chrono::steady_clock::now();
        const auto res = attractor_deterministic(instantiate(family_of("halfline"), t), eps, eps, 100000, 1e6);
        const double h = hausdorff(res.cloud, interval(-t / (1 - t), 1 / (1 - t), eps)).distance;
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        c.note("t=" + num(t) + " h=" + num(h) + " " + num(secs) + "s");
        c.expect(res.trace.converged, "t=" + num(t) + " did not converge");
        c.expect(h <= 5e-3, "t=" + num(t) + " h=" + num(h) + " > 5e-3");
        c.expect(secs < 5.0, "t=" + num(t) + " took " + num(secs) + "s");
    }
}

void check_threshold_reproduction(Check& c) {
    for (const char* name : {"intro3d", "dream3d"}) {
        const auto th = threshold(family_of(name), 4);
        c.note(std::string(name) + " [" + num(th.t_lo) + ", " + num(th.t_hi) + "]");
        c.expect(std::abs(th.t_lo - 1.0) <= 1e-9 && std::abs(th.t_hi - 1.0) <= 1e-9, std::string(name) + " threshold");
    }
    const ParamFamily half(2, {ParamAffineMap(0.5 * Matrix::identity(2), Vector(2), Vector(2))});
    const auto th = threshold(half, 4);
    c.expect(th.t_lo == 2.0 && th.t_hi == 2.0, "threshold of {0.5 I} is not exactly 2");

    const auto& s = builtin_scenario("intro3d").defaults;
    const auto below = attractor_deterministic(instantiate(family_of("intro3d"), 0.95), s.epsilon, s.tol, s.max_iter, 1e6);
    const IfsSystem above = instantiate(family_of("intro3d"), 1.1);
    const auto up = attractor_deterministic(above, default_seed(above, s.epsilon), s.tol, s.max_iter, 1e6);
    c.expect(below.trace.converged, "no convergence at t=0.95");
    c.expect(up.trace.diverged, "no divergence at t=1.1");
    c.note("t=0.95 " + std::string(below.trace.converged ? "converged" : "not converged") + ", t=1.1 " +
           (up.trace.diverged ? "diverged" : "not diverged"));
}

void check_second_iterate(Check& c) {
    const double eps = 2e-3;
    const double products[] = {0.75, 0.6, 0.5, 0.4};
    const ParamFamily& fam = family_of("evcontr");
    const double* lips[] = {oracle::evcontr_square_lips_t05, oracle::evcontr_square_lips_t1, oracle::evcontr_square_lips_t5};
    int k = 0;
    for (double t : {0.5, 1.0, 5.0}) {
        const IfsSystem sq = second_iterate(instantiate(fam, t));
        // Diagonal entries of f_i o f_j are k_i l_j and k_j l_i.
        std::vector<double> diag;
        for (std::size_t m = 0; m < sq.size(); ++m) {
            diag.push_back(sq[m].linear()(0, 0));
            diag.push_back(sq[m].linear()(1, 1));
            c.expect(std::abs(lipschitz(sq[m]) - lips[k][m]) <= 1e-9, "Lip of composed map " + std::to_string(m));
        }
        for (double p : products) {
            bool found = false;
            for (double v : diag) found = found || std::abs(v - p) <= 1e-9;
            c.expect(found, "product " + num(p) + " missing at t=" + num(t));
        }
        const auto start = std::chrono::steady_clock::now();
        const auto det = attractor_deterministic(sq, eps, eps, 100000, 1e6).cloud;
        const auto chaos = attractor_chaos(sq, 4'000'000, 1000, 17, eps);
        const double h = hausdorff(det, chaos).distance;
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        c.note("t=" + num(t) + " h=" + num(h) + " det eps=" + num(det.resolution()) + " " + num(secs) + "s");
        c.expect(h <= 3 * eps, "t=" + num(t) + " h=" + num(h) + " > " + num(3 * eps));
        ++k;
    }
}

void check_lower_transition_dream(Check& c) {
    const double eps = 0.01;
    const IfsSystem base = instantiate(family_of("dream3d"), 1.0);
    const auto q = anchors_of(family_of("dream3d"));
    const auto low = lower_transition({base, q}, eps, 100000, 1e6);
    c.expect(low.cloud.has_value(), "dream3d lower transition not compact");
    if (low.cloud) {
        const PointCloud& a = *low.cloud;
        c.note(std::to_string(a.size()) + " cells");
        for (std::size_t i = 0; i < q.size(); ++i) {
            const double d = excess(quantize({q[i]}, eps), a);
            c.expect(d <= eps, "q" + std::to_string(i + 1) + " at distance " + num(d));
        }
        const double refl = hausdorff(hutchinson_step(IfsSystem(3, {base[4]}), a), a).distance;
        const double rot = hausdorff(hutchinson_step(IfsSystem(3, {base[3]}), a), a).distance;
        c.note("reflection " + num(refl) + ", rotation " + num(rot));
        c.expect(refl <= 2 * eps, "reflection symmetry " + num(refl));
        c.expect(rot <= 2 * eps, "rotation symmetry " + num(rot));
        const auto fewer = lower_transition({base, {q[3], q[4]}}, eps, 100000, 1e6);
        c.expect(fewer.cloud.has_value(), "restricted anchors not compact");
        if (fewer.cloud) {
            const double h = hausdorff(*fewer.cloud, a).distance;
            c.note("restricted anchors " + num(h));
            c.expect(h <= 2 * eps, "restricted anchors differ by " + num(h));
        }
    }
    const IfsSystem line = instantiate(family_of("halfline"), 1.0);
    const auto unb = lower_transition({line, anchors_of(family_of("halfline"))}, 1e-3, 100000, 100.0);
    c.expect(unb.unbounded, "halfline not reported unbounded");
}

void check_upper_transition_intro(Check& c) {
    const auto& d = builtin_scenario("intro3d").defaults;
    const double eps = 0.02;
    SolveOptions opt;
    opt.eps = eps;
    opt.tol = d.tol;
    const ParamFamily& fam = family_of("intro3d");
    const auto half = upper_transition(fam, 0.5, 30, opt);
    c.expect(half.upper.has_value(), "r=1/2 did not converge");
    const auto twothirds = upper_transition(fam, 2.0 / 3.0, 40, opt);
    c.expect(twothirds.upper.has_value(), "r=2/3 did not converge");
    if (half.upper) {
        const IfsSystem one = instantiate(fam, 1.0);
        const double inv = invariance_residual(one, *half.upper);
        c.note("tol=" + num(opt.tol) + " invariance " + num(inv));
        c.expect(inv <= opt.tol + 2 * std::sqrt(3.0) * eps, "invariance residual " + num(inv));
        const auto low = lower_transition({one, anchors_of(fam)}, eps, 100000, 1e6);
        c.expect(low.cloud.has_value(), "lower transition set missing");
        if (low.cloud) {
            const double ex = excess(*low.cloud, *half.upper);
            c.note("excess(lower, upper) " + num(ex));
            c.expect(ex <= 3 * eps, "excess(lower, upper) " + num(ex));
        }
        if (twothirds.upper) {
            const double h = hausdorff(*half.upper, *twothirds.upper).distance;
            c.note("schedules differ by " + num(h));
            c.expect(h <= 3 * eps, "schedules differ by " + num(h));
        }
    }
    SolveOptions lo = opt;
    lo.eps = 0.01;
    lo.r_max = 100.0;
    const auto line = upper_transition(family_of("halfline"), 0.5, 30, lo);
    c.expect(line.status == TransitionStatus::no_convergence, "halfline upper transition converged");
}

void check_perturbation_bound(Check& c) {
    std::mt19937_64 rng(2718);
    std::uniform_int_distribution<std::size_t> count(1, 3);
    int holds = 0;
    double worst_margin = -1e300;
    const double eps = 0.01;
    for (int trial = 0; trial < 100; ++trial) {
        const auto g = test_support::random_contractive_ifs(rng, 2, count(rng), 0.8);
        const auto h = test_support::random_contractive_ifs(rng, 2, count(rng), 0.8);
        const auto res = perturbation_check(g, h, std::nullopt, eps);
        holds += res.holds;
        worst_margin = std::max(worst_margin, res.measured - res.bound - 4 * std::sqrt(2.0) * eps);
    }
    c.note(std::to_string(holds) + "/100 hold, worst margin " + num(worst_margin));
    c.expect(holds == 100, std::to_string(100 - holds) + " random pairs violate the bound");

    const IfsSystem g(1, {AffineMap(Matrix{{0.5}}, Vector{0.0})});
    const IfsSystem h(1, {AffineMap(Matrix{{0.5}}, Vector{0.1})});
    std::vector<Vector> box;
    for (int i = 0; i <= 3000; ++i) box.push_back(Vector{-1.0 + i * 1e-3});
    const auto eq = perturbation_check(g, h, quantize(box, 1e-3), 1e-3);
    c.note("equality case measured " + num(eq.measured) + " bound " + num(eq.bound));
    c.expect(std::abs(eq.measured - 0.2) <= 1e-6 && std::abs(eq.bound - 0.2) <= 1e-6, "equality case");
}

void check_isometry_algebra(Check& c) {
    std::mt19937_64 rng(141);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t d = 1 + trial % 3;
        const Matrix g = test_support::random_orthogonal(rng, d);
        const Vector centre = test_support::random_vector(rng, d, 2.0);
        const std::size_t m = 1 + trial % 8;
        AffineMap chain = AffineMap::identity(d);
        double scale = 1.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double t = ut(rng);
            const Matrix lin = t * g;
            chain = compose(chain, AffineMap(lin, centre - lin * centre));
            scale *= t;
        }
        const Vector x = test_support::random_vector(rng, d, 3.0);
        const Vector closed = scale * (matrix_power(g, static_cast<unsigned>(m)) * (x - centre)) + centre;
        worst = std::max(worst, distance(apply_affine(chain, x), closed));
    }
    c.note("closed form worst " + num(worst));
    c.expect(worst <= 1e-8, "closed form off by " + num(worst));
    const ParamFamily& dream = family_of("dream3d");
    const auto p4 = isometry_period(dream[3].linear(), 1000);
    const auto p5 = isometry_period(dream[4].linear(), 1000);
    const Matrix one_radian{{std::cos(1.0), -std::sin(1.0)}, {std::sin(1.0), std::cos(1.0)}};
    const auto none = isometry_period(one_radian, 1'000'000);
    c.expect(p4 == 4u, "quarter turn period");
    c.expect(p5 == 2u, "reflection period");
    c.expect(!none, "one-radian rotation reported periodic");
    c.note("periods 4, 2, none");
}

void check_circle_density(Check& c) {
    const CircleIfs sys{{CircleMap::doubling(), CircleMap::doubling_then_rotation(golden_angle)}};
    const double theta = 0.3;
    AngleSet s({theta});
    double worst = 0.0;
    for (int n = 1; n <= 12; ++n) {
        s = circle_step(sys, s);
        std::vector<double> closed;
        for (long m = 0; m < (1L << n); ++m) closed.push_back(std::ldexp(theta, n) + double(m) * golden_angle);
        const AngleSet expected(closed);
        c.expect(expected.size() == s.size(), "size mismatch at n=" + std::to_string(n));
        if (expected.size() != s.size()) continue;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double d = std::abs(s[i] - expected[i]);
            worst = std::max(worst, std::min(d, two_pi - d));
        }
    }
    c.expect(worst <= 1e-9, "closed form off by " + num(worst));
    const auto gaps = density_profile(sys, theta, 12);
    c.note("closed form worst " + num(worst) + ", gap_12 " + num(gaps.back()));
    c.expect(std::abs(gaps.back() - oracle::circle_double_gaps[11]) <= 1e-9, "gap_12 differs from the oracle");
    c.expect(gaps.back() < 0.05, "gap_12 not below 0.05");
}

void check_engine_invariants(Check& c) {
    std::mt19937_64 rng(55);
    // Banach decay of plain iteration residuals.
    for (int trial = 0; trial < 10; ++trial) {
        const auto sys = test_support::random_contractive_ifs(rng, 2, 3, 0.8);
        const double eps = 0.01;
        const auto res = attractor_deterministic(sys, quantize({Vector{9.0, -7.0}}, eps), eps, 500, 1e6);
        const auto& r = res.trace.residuals;
        for (std::size_t n = 1; n < r.size(); ++n) {
            c.expect(r[n] <= sys.max_lipschitz() * r[n - 1] + 2 * std::sqrt(2.0) * eps, "residual decay");
        }
    }
    // quantize idempotence and order independence.
    std::vector<Vector> pts;
    for (int i = 0; i < 5000; ++i) pts.push_back(test_support::random_vector(rng, 3, 2.0));
    const PointCloud q = quantize(pts, 0.05);
    c.expect(quantize(q.points(), 0.05) == q, "quantize not idempotent");
    std::shuffle(pts.begin(), pts.end(), rng);
    const PointCloud q2 = quantize(pts, 0.05);
    c.expect(q2 == q && q2.representatives() == q.representatives(), "quantize order dependent");
    // Hausdorff triangle inequality and brute-force agreement.
    auto cloud = [&](double spread) {
        std::vector<Vector> v;
        for (int i = 0; i < 800; ++i) v.push_back(test_support::random_vector(rng, 2, spread));
        return quantize(v, 0.02);
    };
    for (int trial = 0; trial < 50; ++trial) {
        const PointCloud a = cloud(1.0), b = cloud(0.5), d = cloud(1.5);
        const auto ab = hausdorff(a, b), bd = hausdorff(b, d), ad = hausdorff(a, d);
        c.expect(ad.distance <= ab.distance + bd.distance + 1e-9, "triangle inequality");
        c.expect(ab.distance == hausdorff_brute_force(a, b).distance, "grid and brute force differ");
    }
    // PPM goldens.
    const PointCloud sier = goldens::sierpinski_cloud();
    c.expect(goldens::fnv1a(goldens::sierpinski_ppm(sier)) == goldens::sierpinski_hash, "plain golden image");
    c.expect(goldens::fnv1a(goldens::sierpinski_labeled_ppm(sier)) == goldens::sierpinski_labeled_hash,
             "labeled golden image");
    // Thread-count invariance.
    for (unsigned threads : {2u, 4u}) {
        const PointCloud st = goldens::sierpinski_cloud(threads);
        c.expect(st == sier && st.representatives() == sier.representatives(), "attractor depends on threads");
        c.expect(goldens::sierpinski_ppm(st) == goldens::sierpinski_ppm(sier), "image depends on threads");
        const auto sys = test_support::sierpinski();
        c.expect(attractor_chaos(sys, 200000, 50, 3, 0.01, threads) == attractor_chaos(sys, 200000, 50, 3, 0.01, 1),
                 "chaos game depends on threads");
        const IfsSystem base = instantiate(family_of("dream3d"), 1.0);
        const auto l1 = lower_transition({base, anchors_of(family_of("dream3d"))}, 0.05, 1000, 1e6, 1);
        const auto lt = lower_transition({base, anchors_of(family_of("dream3d"))}, 0.05, 1000, 1e6, threads);
        c.expect(l1.cloud && lt.cloud && *l1.cloud == *lt.cloud, "lower transition depends on threads");
        const PointCloud a = cloud(1.0), b = cloud(0.7);
        const auto h1 = hausdorff(a, b, 1), ht = hausdorff(a, b, threads);
        c.expect(h1.distance == ht.distance && h1.witness_a == ht.witness_a, "hausdorff depends on threads");
    }
    c.note("decay, quantize, hausdorff, goldens, threads");
}

struct Criterion {
    const char* title;
    double limit_seconds;
    std::function<void(Check&)> body;
};

} // namespace

int main(int argc, char** argv) {
    const std::map<int, Criterion> criteria{
        {1, {"closed-form interval attractor", 15.0, check_closed_form_interval}},
        {2, {"threshold reproduction", 10.0, check_threshold_reproduction}},
        {3, {"second-iterate equivalence", 20.0, check_second_iterate}},
        {4, {"lower transition set", 60.0, check_lower_transition_dream}},
        {5, {"upper transition set", 120.0, check_upper_transition_intro}},
        {6, {"perturbation bound", 60.0, check_perturbation_bound}},
        {7, {"isometry algebra", 10.0, check_isometry_algebra}},
        {8, {"circle density", 5.0, check_circle_density}},
        {9, {"engine invariants", 120.0, check_engine_invariants}},
    };
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
    if (selected.empty()) {
        for (const auto& [k, v] : criteria) selected.push_back(k);
    }
    bool all = true;
    for (int k : selected) {
        const auto it = criteria.find(k);
        if (it == criteria.end()) {
            std::printf("criterion %d: unknown\n", k);
            all = false;
            continue;
        }
        Check c;
        const auto start = std::chrono::steady_clock::now();
        try {
            it->second.body(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        c.expect(secs < it->second.limit_seconds, "runtime " + num(secs) + "s over " + num(it->second.limit_seconds) + "s");
        std::printf("criterion %d %s: %s (%.1fs) %s%s%s\n", k, it->second.title, c.pass() ? "PASS" : "FAIL", secs,
                    c.notes().c_str(), c.pass() ? "" : " | failed: ", c.failed().c_str());
        std::fflush(stdout);
        all = all && c.pass();
    }
    return all ? EXIT_SUCCESS : EXIT_FAILURE;
}
