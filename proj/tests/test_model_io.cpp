#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "daeire/emit.hpp"
#include "daeire/parser.hpp"

using namespace daeire;

namespace {

std::string fixture(const std::string& name) {
    std::ifstream in(std::string(DAEIRE_FIXTURE_DIR) + "/" + name);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("parse the worked two-equation example") {
    DaeSystem sys =
        parse_model("var x, y; 2*y*x'' - x*y'' + 2*x*x'^2 - x' + sin(t) = 0; y - x^2 = 0;");
    CHECK(sys.n_eqs() == 2);
    CHECK(sys.n_vars() == 2);
    CHECK(highest_order(sys.equations[0], 0) == 2);
    CHECK(highest_order(sys.equations[1], 0) == 0);
}

TEST_CASE("parse a one-equation model and diff syntax") {
    DaeSystem sys = parse_model("var u; u' - 1 = 0;");
    CHECK(sys.n_eqs() == 1);
    DaeSystem sys2 = parse_model("var u; diff(u, t, 2) - diff(u, t) = 0;");
    CHECK(highest_order(sys2.equations[0], 0) == 2);
}

TEST_CASE("parse errors carry position information") {
    CHECK_THROWS_AS(parse_model("var x; x'' = 0"), ParseError);  // missing ';'
    CHECK_THROWS_AS(parse_model("var x; z + x = 0;"), ParseError);
    CHECK_THROWS_AS(parse_model("var x; x^2.5 = 0;"), ParseError);
    CHECK_THROWS_AS(parse_model("var x; x^-1 = 0;"), ParseError);
    try {
        parse_model("var x;\n x' - w = 0;");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
        CHECK(std::string(e.what()).find("unknown identifier") != std::string::npos);
    }
}

TEST_CASE("validate square") {
    DaeSystem two = parse_model("var x, y; x' - y = 0; y' + x = 0;");
    CHECK_NOTHROW(validate_square(two));
    DaeSystem bad = parse_model(fixture("nonsquare.dae"));
    try {
        validate_square(bad);
        FAIL("expected NonSquareError");
    } catch (const NonSquareError& e) {
        CHECK(e.equations == 3);
        CHECK(e.variables == 2);
    }
    DaeSystem empty;
    CHECK_THROWS_AS(validate_square(empty), EmptySystemError);
}

TEST_CASE("print/parse round trip is structurally identical") {
    for (const char* name : {"example4.dae", "beam.dae", "pendulum.dae", "amplifier.dae",
                             "ring.dae", "recombo.dae", "squared.dae", "twospheres.dae"}) {
        DaeSystem sys = parse_model(fixture(name));
        DaeSystem again = parse_model(print_model(sys));
        REQUIRE(again.n_eqs() == sys.n_eqs());
        for (int i = 0; i < sys.n_eqs(); ++i) {
            INFO(name << " equation " << i);
            CHECK(structurally_equal(sys.equations[i], again.equations[i]));
        }
    }
}

TEST_CASE("JSON model input") {
    std::string j = R"({
        "variables": ["x", "y"],
        "parameters": {"k": 2.0},
        "interval": [0, 5],
        "equations": ["x' - k*y", "y - x^2"]
    })";
    DaeSystem sys = parse_model_auto(j);
    CHECK(sys.n_eqs() == 2);
    CHECK(sys.t_end == 5.0);
    Point p;
    p.set(JetVar{0, 0}, 1.0);
    p.set(JetVar{0, 1}, 6.0);
    p.set(JetVar{1, 0}, 3.0);
    CHECK(evaluate(sys.equations[0], p) == doctest::Approx(0.0));
}

TEST_CASE("trajectory CSV shape") {
    Trajectory traj;
    traj.variables = {"x"};
    traj.component_tag = 0;
    traj.times = {0.0, 0.1};
    traj.states = {{0.0}, {0.1}};
    CHECK(emit_trajectory_csv(traj) == "t,x,component\n0,0,0\n0.1,0.1,0\n");

    Trajectory empty;
    empty.variables = {"x", "y"};
    CHECK(emit_trajectory_csv(empty) == "t,x,y,component\n");
}

TEST_CASE("reals survive a 15-digit round trip") {
    std::mt19937_64 rng(404);
    for (int i = 0; i < 500; ++i) {
        double v = std::ldexp(double(rng() >> 11) / 9007199254740992.0 - 0.5, int(rng() % 40) - 20);
        double back = std::strtod(format_real(v).c_str(), nullptr);
        CHECK(std::abs(back - v) <= 1e-14 * std::max(1.0, std::abs(v)));
    }
}

TEST_CASE("report JSON carries the structural fields") {
    DaeSystem sys = parse_model(fixture("example4.dae"));
    SignatureMatrix sigma = signature_matrix(sys);
    StructuralSolution sol = solve_assignment(sigma);
    ReportInput in;
    in.sys = &sys;
    in.sigma = &sigma;
    in.structural = &sol;
    std::string json = emit_report_json(in);
    CHECK(json.find("\"schema\": 1") != std::string::npos);
    CHECK(json.find("\"c\": [\n    0,\n    2\n  ]") != std::string::npos);
    CHECK(json.find("\"d\": [\n    2,\n    2\n  ]") != std::string::npos);
}
