// Tests for scenario parsing, validation, defaults, and serialization
#include <doctest.h>
#include <json.hpp>

#include <sloshsim/scenario.hpp>

#include <filesystem>
#include <fstream>
#include <string>

using namespace sloshsim;
using nlohmann::json;

namespace {

/// Smallest accepted scenario: the unit rig with inertia given about B.
json minimal() {
    return json::parse(R"({
        "body": {"mass": 9.0, "inertia": [[5, 0, 0], [0, 5, 0], [0, 0, 5]]},
        "pendulums": [
            {"mass": 1.0, "length": 1.0,
             "fulcrum": [0.0, 0.0, 0.4444444444444444]}
        ],
        "gravity": [0.0, 0.0, -9.81]
    })");
}

Scenario parse(const json& j) { return parse_scenario_string(j.dump()); }

/// Expect a ConfigError whose message contains the given fragment.
template <typename Fn>
void expect_config_error(Fn&& fn, const std::string& fragment) {
    try {
        fn();
        FAIL_CHECK("expected ConfigError containing '" << fragment << "'");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
}

}  // namespace

// =============================================================================
// Defaults
// =============================================================================

TEST_CASE("a minimal file gets the documented defaults") {
    const Scenario sc = parse(minimal());

    CHECK(sc.rig.body.m_B == 9.0);
    CHECK(sc.rig.body.J_B.isApprox(5.0 * Mat3::Identity(), 1e-15));
    // About-B input: the CoM-frame tensor gains the parallel-axis term.
    CHECK(sc.rig.body.J_Gbar(0, 0) ==
          doctest::Approx(5.0 + 1.0 / 36.0).epsilon(1e-14));
    CHECK(sc.rig.body.J_Gbar(2, 2) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(sc.inertia_about == InertiaAbout::B);

    REQUIRE(sc.rig.n_pend() == 1);
    CHECK(sc.rig.pendulums[0].q == 0.0);
    CHECK(sc.rig.pendulums[0].R_BQ.isIdentity(0.0));

    CHECK(sc.initial.r.isZero(0.0));
    CHECK(sc.initial.v.isZero(0.0));
    CHECK(sc.initial.q == Quat(1, 0, 0, 0));
    CHECK(sc.initial.omega.isZero(0.0));
    REQUIRE(sc.initial.pend.size() == 1);
    CHECK(sc.initial.pend[0].theta == 0.0);
    CHECK(sc.initial.pend[0].phi_dot == 0.0);

    CHECK(sc.inputs.g_I == Vec3(0, 0, -9.81));
    REQUIRE(sc.inputs.force.size() == 1);
    CHECK(sc.inputs.force[0].t == 0.0);
    CHECK(sc.inputs.force[0].value.isZero(0.0));
    CHECK(sc.inputs.force_frame == ForceFrame::Inertial);
    CHECK(sc.inputs.interpolation == Interp::Linear);

    CHECK(!sc.nominal.has_value());
    CHECK(sc.sim.t0 == 0.0);
    CHECK(sc.sim.tf == 10.0);
    CHECK(sc.sim.dt == 1e-3);
}

// =============================================================================
// Unknown keys and missing fields
// =============================================================================

TEST_CASE("unknown fields are rejected with their full path") {
    json j = minimal();
    j["body"]["masss"] = 1.0;
    CHECK_THROWS_WITH_AS(parse(j), "unknown field 'body.masss'", ConfigError);

    j = minimal();
    j["extra"] = 1;
    CHECK_THROWS_WITH_AS(parse(j), "unknown field 'extra'", ConfigError);

    j = minimal();
    j["pendulums"][0]["dampingq"] = 0.1;
    CHECK_THROWS_WITH_AS(parse(j), "unknown field 'pendulums[0].dampingq'",
                         ConfigError);

    j = minimal();
    j["initial_state"] = {{"spin", {0, 0, 1}}};
    CHECK_THROWS_WITH_AS(parse(j), "unknown field 'initial_state.spin'",
                         ConfigError);
}

TEST_CASE("missing required sections and fields are named") {
    json j = minimal();
    j.erase("body");
    CHECK_THROWS_WITH_AS(parse(j), "body: missing required section",
                         ConfigError);

    j = minimal();
    j["body"].erase("inertia");
    CHECK_THROWS_WITH_AS(parse(j), "body.inertia: missing required field",
                         ConfigError);

    j = minimal();
    j["pendulums"].push_back({{"mass", 2.0}, {"length", 0.5}});
    CHECK_THROWS_WITH_AS(parse(j),
                         "pendulums[1].fulcrum: missing required field",
                         ConfigError);

    j = minimal();
    j["pendulums"] = json::array({json(1.0)});
    expect_config_error([&] { parse(j); }, "pendulums[0]");
}

TEST_CASE("syntax errors are wrapped as configuration errors") {
    expect_config_error([] { parse_scenario_string("{ not json"); },
                        "syntax error");
}

// =============================================================================
// Physical invariants
// =============================================================================

TEST_CASE("physical invariants carry the offending value") {
    json j = minimal();
    j["pendulums"][0]["length"] = -0.8;
    CHECK_THROWS_WITH_AS(
        parse(j), "invariant violated: pendulums[0].length > 0 (got -0.8)",
        ConfigError);

    j = minimal();
    j["body"]["mass"] = 0.0;
    CHECK_THROWS_WITH_AS(parse(j),
                         "invariant violated: body.mass > 0 (got 0)",
                         ConfigError);

    j = minimal();
    j["pendulums"][0]["mass"] = -3.0;
    expect_config_error([&] { parse(j); }, "pendulums[0].mass > 0");
}

TEST_CASE("the inertia tensor must be symmetric positive definite") {
    json j = minimal();
    j["body"]["inertia"][0][1] = 0.3;  // no matching (1,0) entry
    expect_config_error([&] { parse(j); }, "body.inertia must be symmetric");

    j = minimal();
    j["body"]["inertia"] = {{-1, 0, 0}, {0, 5, 0}, {0, 0, 5}};
    expect_config_error([&] { parse(j); },
                        "body.inertia must be positive definite");
}

TEST_CASE("the fulcrum frame must be a proper rotation") {
    json j = minimal();
    j["pendulums"][0]["fulcrum_dcm"] = {{2, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    expect_config_error([&] { parse(j); },
                        "fulcrum_dcm must be a proper rotation");

    // Determinant -1 (reflection) is orthonormal but still rejected.
    j = minimal();
    j["pendulums"][0]["fulcrum_dcm"] = {{-1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    expect_config_error([&] { parse(j); },
                        "fulcrum_dcm must be a proper rotation");
}

TEST_CASE("initial pendulum angles must stay inside the hemisphere") {
    json j = minimal();
    j["initial_state"]["pendulum_angles"] = {{1.6, 0.0}};
    expect_config_error([&] { parse(j); }, "|theta| < pi/2");
}

TEST_CASE("the initial quaternion is normalized within tolerance only") {
    json j = minimal();
    j["initial_state"]["attitude_quat"] = {1.0 + 5e-7, 0.0, 0.0, 0.0};
    const Scenario sc = parse(j);
    CHECK(std::abs(sc.initial.q.norm() - 1.0) <= 1e-15);
    CHECK(sc.initial.q(0) == doctest::Approx(1.0).epsilon(1e-12));

    j["initial_state"]["attitude_quat"] = {1.1, 0.0, 0.0, 0.0};
    expect_config_error([&] { parse(j); },
                        "attitude_quat must be unit length");
}

// =============================================================================
// Damping specification
// =============================================================================

TEST_CASE("damping_q and damping_xi are mutually exclusive") {
    json j = minimal();
    j["pendulums"][0]["damping_q"] = 0.1;
    j["pendulums"][0]["damping_xi"] = 0.05;
    CHECK_THROWS_WITH_AS(parse(j),
                         "pendulums[0]: give damping_q or damping_xi, not both",
                         ConfigError);
}

TEST_CASE("damping_xi resolves to q through the nominal point") {
    json j = minimal();
    j["pendulums"][0]["damping_xi"] = 0.05;
    j["nominal"] = {{"Fz_bar", 10.0}};
    const Scenario sc = parse(j);
    // q = 2 xi m_P sqrt(Fz l / m_Gbar) = 2·0.05·1·sqrt(1) = 0.1
    CHECK(sc.rig.pendulums[0].q == doctest::Approx(0.1).epsilon(1e-14));

    j.erase("nominal");
    CHECK_THROWS_WITH_AS(
        parse(j), "pendulums[0].damping_xi requires the nominal section",
        ConfigError);
}

TEST_CASE("negative damping is rejected") {
    json j = minimal();
    j["pendulums"][0]["damping_q"] = -0.1;
    expect_config_error([&] { parse(j); }, "damping_q >= 0");

    j = minimal();
    j["pendulums"][0]["damping_xi"] = -0.1;
    expect_config_error([&] { parse(j); }, "damping_xi >= 0");
}

// =============================================================================
// Inertia conventions
// =============================================================================

TEST_CASE("the two inertia conventions differ by the parallel-axis shift") {
    json j = minimal();
    j["body"]["inertia_about"] = "Gbar";
    const Scenario g = parse(j);
    CHECK(g.inertia_about == InertiaAbout::Gbar);
    CHECK(g.rig.body.J_Gbar.isApprox(5.0 * Mat3::Identity(), 1e-15));
    CHECK(g.rig.body.J_B(0, 0) ==
          doctest::Approx(5.0 - 1.0 / 36.0).epsilon(1e-14));
    CHECK(g.rig.body.J_B(2, 2) == doctest::Approx(5.0).epsilon(1e-14));

    j["body"]["inertia_about"] = "G";
    expect_config_error([&] { parse(j); }, "body.inertia_about");
}

TEST_CASE("a Gbar tensor that loses definiteness under the shift is "
          "rejected") {
    // Heavy, far-hanging pendulums with a tiny rest-CoM inertia: deriving the
    // reference-point tensor subtracts the parallel-axis term and goes
    // indefinite.
    json j = minimal();
    j["body"]["mass"] = 1000.0;
    j["body"]["inertia"] = {{1e-3, 0, 0}, {0, 1e-3, 0}, {0, 0, 1e-3}};
    j["body"]["inertia_about"] = "Gbar";
    j["pendulums"][0]["mass"] = 100.0;
    expect_config_error([&] { parse(j); },
                        "must remain positive definite after the parallel-axis "
                        "shift");
}

// =============================================================================
// Input profiles
// =============================================================================

TEST_CASE("profile rows are validated") {
    json j = minimal();
    j["inputs"]["force_profile"] = {{0.0, 1.0, 0.0, 0.0}, {0.0, 2.0, 0.0, 0.0}};
    CHECK_THROWS_WITH_AS(
        parse(j), "inputs.force_profile: timestamps must be strictly increasing",
        ConfigError);

    j["inputs"]["force_profile"] = json::array();
    CHECK_THROWS_WITH_AS(
        parse(j), "inputs.force_profile: must contain at least one sample",
        ConfigError);

    j["inputs"]["force_profile"] = {{0.0, 1.0, 2.0}};
    CHECK_THROWS_WITH_AS(parse(j),
                         "inputs.force_profile[0]: expected [t, x, y, z]",
                         ConfigError);
}

TEST_CASE("enumerated input options reject unknown values") {
    json j = minimal();
    j["inputs"]["force_frame"] = "spin";
    CHECK_THROWS_WITH_AS(
        parse(j),
        "inputs.force_frame: expected \"inertial\" or \"body\", got \"spin\"",
        ConfigError);

    j = minimal();
    j["inputs"]["interpolation"] = "cubic";
    expect_config_error([&] { parse(j); }, "inputs.interpolation");
}

TEST_CASE("gravity must be a 3-vector") {
    json j = minimal();
    j["gravity"] = {0.0, -9.81};
    CHECK_THROWS_WITH_AS(parse(j), "gravity: expected an array of 3 numbers",
                         ConfigError);
}

// =============================================================================
// Simulation grid
// =============================================================================

TEST_CASE("the time grid is validated jointly") {
    json j = minimal();
    j["sim"] = {{"dt", -0.1}};
    CHECK_THROWS_WITH_AS(parse(j), "sim.dt must be positive", ConfigError);

    j["sim"] = {{"t0", 2.0}, {"tf", 1.0}};
    CHECK_THROWS_WITH_AS(parse(j), "sim.tf must exceed sim.t0", ConfigError);

    j["sim"] = {{"tf", 1.0}, {"dt", 0.3}};
    CHECK_THROWS_WITH_AS(parse(j),
                         "sim: (tf - t0)/dt must be an integer within 1e-9",
                         ConfigError);
}

// =============================================================================
// Nominal section
// =============================================================================

TEST_CASE("require_nominal names the missing section") {
    const Scenario sc = parse(minimal());
    CHECK_THROWS_WITH_AS(
        sc.require_nominal(),
        "nominal: section required for this command (set nominal.Fz_bar)",
        ConfigError);

    json j = minimal();
    j["nominal"] = {{"Fz_bar", -1.0}};
    expect_config_error([&] { parse(j); }, "nominal.Fz_bar >= 0");
}

// =============================================================================
// Serialization round trip
// =============================================================================

TEST_CASE("serialize/parse round trip is byte-stable and lossless") {
    json j = minimal();
    j["body"]["inertia_about"] = "Gbar";
    j["pendulums"][0]["damping_q"] = 0.7;
    j["pendulums"].push_back({
        {"mass", 2.0},
        {"length", 0.8},
        {"fulcrum", {0.3, -0.4, 0.25}},
        {"fulcrum_dcm", {{0, -1, 0}, {1, 0, 0}, {0, 0, 1}}},
    });
    j["initial_state"] = {
        {"position", {1.0, -2.0, 3.0}},
        {"velocity", {0.25, 0.5, -0.75}},
        {"attitude_quat", {0.5, 0.5, 0.5, 0.5}},
        {"omega", {0.1, -0.2, 0.3}},
        {"pendulum_angles", {{0.2, -0.3}, {0.1, 0.4}}},
        {"pendulum_rates", {{1.5, -1.0}, {0.0, 0.5}}},
    };
    j["inputs"] = {
        {"force_frame", "body"},
        {"force_profile", {{0.0, 1.0, 2.0, 3.0}, {1.0, -1.0, 0.0, 4.0}}},
        {"torque_profile", {{0.0, 0.1, 0.2, 0.3}}},
        {"interpolation", "zoh"},
    };
    j["nominal"] = {{"Fz_bar", 25.0}, {"force_frame", "body"}};
    j["sim"] = {{"t0", 0.5}, {"tf", 2.5}, {"dt", 0.25}};

    const Scenario first = parse(j);
    const std::string s1 = serialize_scenario(first);
    const Scenario second = parse_scenario_string(s1);
    const std::string s2 = serialize_scenario(second);
    CHECK(s1 == s2);

    // Lossless field recovery, exact comparisons.
    CHECK(second.rig.body.m_B == first.rig.body.m_B);
    CHECK(second.rig.body.J_Gbar == first.rig.body.J_Gbar);
    CHECK(second.rig.pendulums[1].r_BQ == first.rig.pendulums[1].r_BQ);
    CHECK(second.rig.pendulums[1].R_BQ == first.rig.pendulums[1].R_BQ);
    CHECK(second.rig.pendulums[0].q == 0.7);
    CHECK(second.initial.q == first.initial.q);
    CHECK(second.initial.pend[1].phi_dot == 0.5);
    CHECK(second.inputs.force_frame == ForceFrame::Body);
    CHECK(second.inputs.interpolation == Interp::ZeroOrderHold);
    REQUIRE(second.inputs.force.size() == 2);
    CHECK(second.inputs.force[1].value == Vec3(-1.0, 0.0, 4.0));
    REQUIRE(second.nominal.has_value());
    CHECK(second.nominal->Fz_bar == 25.0);
    CHECK(second.nominal->force_frame == ForceFrame::Body);
    CHECK(second.sim.dt == 0.25);
    CHECK(second.inertia_about == InertiaAbout::Gbar);
}

// =============================================================================
// File loading
// =============================================================================

TEST_CASE("scenario files load from disk, with a clear error when absent") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "sloshsim_scenario_test.json";
    {
        std::ofstream out(path);
        out << minimal().dump(2);
    }
    const Scenario sc = parse_scenario(path.string());
    CHECK(sc.rig.body.m_B == 9.0);
    fs::remove(path);

    expect_config_error(
        [] { parse_scenario("/nonexistent/rig.json"); },
        "cannot open scenario file '/nonexistent/rig.json'");
}
