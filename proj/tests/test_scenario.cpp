#include "ifs_transit/scenario.hpp"
#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace ifs_transit;

namespace {

std::string error_message(const std::string& text, ErrorKind expected) {
    try {
        (void)load_scenario(text);
    } catch (const Error& e) {
        CHECK(e.kind() == expected);
        return e.what();
    }
    FAIL("no error for:\n" << text);
    return {};
}

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

} // namespace

TEST_CASE("catalog names are unique and families valid") {
    std::set<std::string> names;
    for (const auto& s : catalog()) {
        CHECK(names.insert(s.name).second);
        CHECK((s.family || s.circle));
        CHECK_FALSE(s.notes.empty());
    }
    for (const char* name : {"intro3d", "evcontr", "halfline", "dream3d", "linear2d", "circle-rot", "circle-double"}) {
        CHECK(names.count(name));
    }
    try {
        (void)builtin_scenario("nope");
        FAIL("expected semantic_error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::semantic_error);
        CHECK(contains(e.what(), "dream3d"));
    }
}

TEST_CASE("dream3d matrices match the construction") {
    const ParamFamily& fam = *builtin_scenario("dream3d").family;
    REQUIRE(fam.size() == 5);
    const double s = std::sqrt(3.0) / 2.0;
    const Vector q[] = {Vector{1.0, 0.0, 0.0}, Vector{-0.5, s, 0.0}, Vector{-0.5, -s, 0.0}, Vector{0.0, 1.0, 0.0},
                        Vector{0.0, 0.0, 1.0}};
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(fam[i].linear() == 0.5 * Matrix::identity(3));
        CHECK(distance(fam[i].w(), q[i]) < 1e-15);
        CHECK(fam[i].is_anchored_isometry() == false);
    }
    CHECK(fam[3].linear() == Matrix{{0, 0, 1}, {0, 1, 0}, {-1, 0, 0}});
    CHECK(fam[4].linear() == Matrix{{1, 0, 0}, {0, -1, 0}, {0, 0, 1}});
    CHECK(fam[3].w() == q[3]);
    CHECK(fam[4].w() == q[4]);
    CHECK(fam[3].is_anchored_isometry());
    CHECK(fam[4].is_anchored_isometry());
    CHECK(fam.isometry_flags() == std::vector<bool>{false, false, false, true, true});
}

TEST_CASE("inline family parses") {
    const RunConfig cfg = load_scenario(R"(
operation: attractor
dim: 2
maps:
  - L: [[0.5, 0], [0, 0.5]]
    w: [0, 0]
  - L: [[0, -1], [1, 0]]
    anchor: [1, 0]
    isometry: true
  - L: [[0, 3], [0, 0]]
    terms:
      - basis: inverse
        L: [[0, 0], [0.25, 0]]
t: 0.7
epsilon: 0.005
outputs:
  image: out.ppm
)");
    CHECK(cfg.operation == Operation::attractor);
    REQUIRE(cfg.family);
    CHECK(cfg.family->size() == 3);
    CHECK((*cfg.family)[1].is_anchored_isometry());
    CHECK_FALSE(cfg.family->affine_in_t());
    CHECK(cfg.t == 0.7);
    CHECK(cfg.epsilon == 0.005);
    CHECK(cfg.outputs.image == "out.ppm");
}

TEST_CASE("serialize round-trips") {
    RunConfig a;
    a.operation = Operation::upper;
    a.family = *builtin_scenario("evcontr").family;
    a.t = 0.1 + 0.2;
    a.epsilon = 1.0 / 3.0;
    a.tol = 2e-3;
    a.r_max = 1e6;
    a.max_iter = 77;
    a.schedule = ScheduleSpec{ScheduleKind::linear, 0.5, 7, 0.2, 0.8};
    a.anchors = std::vector<Vector>{Vector{0.1, 1.0 / 7.0}};
    a.views = std::vector<ViewSpec>{{"side", 1, 0, 64, 32}};
    a.source = RenderSource::upper;
    a.color_by_map = true;
    a.outputs = {"img.ppm", "gaps.csv", "rep.txt"};
    CHECK(load_scenario(serialize(a)) == a);

    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        RunConfig b;
        b.operation = static_cast<Operation>(trial % 8);
        std::vector<ParamAffineMap> maps;
        const std::size_t d = 1 + trial % 3;
        for (int i = 0; i < 1 + trial % 4; ++i) {
            maps.emplace_back(test_support::random_matrix(rng, d), test_support::random_vector(rng, d),
                              test_support::random_vector(rng, d));
        }
        b.family = ParamFamily(d, std::move(maps));
        b.t = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
        CHECK(load_scenario(serialize(b)) == b);
    }

    for (const auto& s : catalog()) {
        RunConfig c;
        c.operation = s.default_operation;
        c.scenario = s.name;
        CHECK(load_scenario(serialize(c)) == c);
    }
}

TEST_CASE("matrix shape errors name the map and row") {
    const std::string msg = error_message(R"(
operation: attractor
dim: 3
maps:
  - L: [[1, 0, 0], [0, 1], [0, 0, 1]]
)",
                                          ErrorKind::semantic_error);
    CHECK(contains(msg, "map[0].L row 1: expected 3 entries"));
    CHECK(contains(msg, "line 5"));
}

TEST_CASE("parse errors carry line and column") {
    const std::string msg = error_message("operation: attractor\nmaps: [[1, 2\n", ErrorKind::parse_error);
    CHECK(contains(msg, "line "));
    CHECK(contains(msg, "column "));
}

TEST_CASE("semantic errors") {
    CHECK(contains(error_message("scenario: intro3d\n", ErrorKind::semantic_error), "operation"));
    CHECK(contains(error_message("operation: fly\nscenario: intro3d\n", ErrorKind::semantic_error), "unknown operation"));
    CHECK(contains(error_message("operation: attractor\nscenario: intro3d\nbogus: 1\n", ErrorKind::semantic_error),
                   "unknown key 'bogus'"));
    CHECK(contains(error_message("operation: attractor\nscenario: intro3d\nepsilon: -1\n", ErrorKind::semantic_error),
                   "epsilon"));
    CHECK(contains(error_message("operation: attractor\nscenario: intro3d\nepsilon: abc\n", ErrorKind::semantic_error),
                   "epsilon"));
    CHECK(contains(error_message("operation: attractor\nscenario: intro3d\ndim: 1\nmaps: [{L: [[1]]}]\n",
                                 ErrorKind::semantic_error),
                   "not both"));
    CHECK(contains(error_message("operation: attractor\ndim: 2\nmaps:\n  - L: [[2, 0], [0, 1]]\n    isometry: true\n",
                                 ErrorKind::semantic_error),
                   "map[0].isometry"));
    CHECK(contains(error_message("operation: sweep\nscenario: halfline\nschedule: {ratio: 1.5}\n",
                                 ErrorKind::semantic_error),
                   "schedule.ratio"));
    CHECK(contains(error_message("operation: render\nscenario: halfline\nviews: [{axes: [0, 1]}]\n",
                                 ErrorKind::semantic_error),
                   "views[0].axes"));
    CHECK(contains(error_message("operation: attractor\ndim: 1\nmaps:\n  - L: [[1]]\n    anchor: [0]\n    w: [1]\n",
                                 ErrorKind::semantic_error),
                   "anchor"));
}

TEST_CASE("settings resolve from scenario defaults and overrides") {
    RunConfig cfg;
    cfg.scenario = "intro3d";
    Settings s = resolve_settings(cfg);
    CHECK(s.t == builtin_scenario("intro3d").defaults.t);
    CHECK(s.views.size() == 2);
    cfg.epsilon = 0.5;
    s = resolve_settings(cfg);
    CHECK(s.epsilon == 0.5);
}

TEST_CASE("schedules") {
    const ScheduleSpec geo{ScheduleKind::geometric, 0.5, 3, 0, 0};
    CHECK(geo.values() == std::vector<double>{0.5, 0.75, 0.875});
    const ScheduleSpec lin{ScheduleKind::linear, 0.5, 3, 0.2, 0.6};
    const auto v = lin.values();
    REQUIRE(v.size() == 3);
    CHECK(v[1] == Catch::Approx(0.4));
    CHECK(v[2] == 0.6);
}
