#include "sloshsim/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "sloshsim/dynamics.hpp"
#include "sloshsim/frames.hpp"

namespace sloshsim {

using nlohmann::json;

namespace {

// ============================================================================
// Schema helpers: every accessor carries the dotted field path so that errors
// point at the offending entry of the file.
// ============================================================================

[[noreturn]] void invariant_error(const std::string& name, double got) {
    std::ostringstream os;
    os << "invariant violated: " << name << " (got " << got << ")";
    throw ConfigError(os.str());
}

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) {
        throw ConfigError(path + ": expected an object");
    }
}

/// Reject any key not in the allowed list, naming its full path.
void check_keys(const json& obj, const std::string& prefix,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            const std::string path =
                prefix.empty() ? item.key() : prefix + "." + item.key();
            throw ConfigError("unknown field '" + path + "'");
        }
    }
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) {
        throw ConfigError(path + ": expected a number");
    }
    return j.get<double>();
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) {
        throw ConfigError(path + ": expected a string");
    }
    return j.get<std::string>();
}

Vec3 get_vec3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) {
        throw ConfigError(path + ": expected an array of 3 numbers");
    }
    Vec3 v;
    for (int k = 0; k < 3; ++k) {
        v(k) = get_number(j[k], path + "[" + std::to_string(k) + "]");
    }
    return v;
}

Quat get_vec4(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 4) {
        throw ConfigError(path + ": expected an array of 4 numbers");
    }
    Quat v;
    for (int k = 0; k < 4; ++k) {
        v(k) = get_number(j[k], path + "[" + std::to_string(k) + "]");
    }
    return v;
}

Mat3 get_mat3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) {
        throw ConfigError(path + ": expected a 3x3 array of numbers");
    }
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
        const json& row = j[r];
        if (!row.is_array() || row.size() != 3) {
            throw ConfigError(path + "[" + std::to_string(r) +
                              "]: expected an array of 3 numbers");
        }
        for (int c = 0; c < 3; ++c) {
            m(r, c) = get_number(row[c], path + "[" + std::to_string(r) + "][" +
                                             std::to_string(c) + "]");
        }
    }
    return m;
}

ForceFrame parse_force_frame(const json& j, const std::string& path) {
    const std::string s = get_string(j, path);
    if (s == "inertial") return ForceFrame::Inertial;
    if (s == "body") return ForceFrame::Body;
    throw ConfigError(path + ": expected \"inertial\" or \"body\", got \"" + s +
                      "\"");
}

/// Parse a list of [t, x, y, z] rows into a time-stamped sample list.
std::vector<ProfileSample> parse_profile(const json& j,
                                         const std::string& path) {
    if (!j.is_array()) {
        throw ConfigError(path + ": expected an array of [t, x, y, z] rows");
    }
    std::vector<ProfileSample> out;
    out.reserve(j.size());
    for (std::size_t r = 0; r < j.size(); ++r) {
        const std::string row_path = path + "[" + std::to_string(r) + "]";
        const json& row = j[r];
        if (!row.is_array() || row.size() != 4) {
            throw ConfigError(row_path + ": expected [t, x, y, z]");
        }
        ProfileSample s;
        s.t = get_number(row[0], row_path + "[0]");
        for (int k = 0; k < 3; ++k) {
            s.value(k) = get_number(row[k + 1],
                                    row_path + "[" + std::to_string(k + 1) + "]");
        }
        if (!out.empty() && s.t <= out.back().t) {
            throw ConfigError(path + ": timestamps must be strictly increasing");
        }
        out.push_back(s);
    }
    if (out.empty()) {
        throw ConfigError(path + ": must contain at least one sample");
    }
    return out;
}

// ============================================================================
// Section parsers
// ============================================================================

/// Body section minus the inertia conversion, which needs the pendulum list.
struct RawBody {
    double mass = 0.0;
    Mat3 inertia = Mat3::Zero();
    InertiaAbout about = InertiaAbout::B;
};

RawBody parse_body(const json& j) {
    require_object(j, "body");
    check_keys(j, "body", {"mass", "inertia", "inertia_about"});
    if (!j.contains("mass")) throw ConfigError("body.mass: missing required field");
    if (!j.contains("inertia")) {
        throw ConfigError("body.inertia: missing required field");
    }
    RawBody out;
    out.mass = get_number(j.at("mass"), "body.mass");
    if (out.mass <= 0.0) invariant_error("body.mass > 0", out.mass);
    out.inertia = get_mat3(j.at("inertia"), "body.inertia");

    const double scale = std::max(1.0, out.inertia.cwiseAbs().maxCoeff());
    const double asym = (out.inertia - out.inertia.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-9 * scale) {
        invariant_error("body.inertia must be symmetric", asym);
    }
    out.inertia = 0.5 * (out.inertia + out.inertia.transpose());
    Eigen::SelfAdjointEigenSolver<Mat3> es(out.inertia);
    if (es.eigenvalues().minCoeff() <= 0.0) {
        invariant_error("body.inertia must be positive definite",
                        es.eigenvalues().minCoeff());
    }

    if (j.contains("inertia_about")) {
        const std::string s = get_string(j.at("inertia_about"), "body.inertia_about");
        if (s == "B") {
            out.about = InertiaAbout::B;
        } else if (s == "Gbar") {
            out.about = InertiaAbout::Gbar;
        } else {
            throw ConfigError("body.inertia_about: expected \"B\" or \"Gbar\", got \"" +
                              s + "\"");
        }
    }
    return out;
}

/// One pendulum entry; damping_xi is kept aside until the nominal section and
/// the total mass are known.
PendulumDef parse_pendulum(const json& j, std::size_t i,
                           std::vector<std::pair<std::size_t, double>>& xi_requests) {
    const std::string path = "pendulums[" + std::to_string(i) + "]";
    require_object(j, path);
    check_keys(j, path, {"mass", "length", "fulcrum", "fulcrum_dcm", "damping_q",
                         "damping_xi"});
    for (const char* key : {"mass", "length", "fulcrum"}) {
        if (!j.contains(key)) {
            throw ConfigError(path + "." + key + ": missing required field");
        }
    }

    PendulumDef p;
    p.m_P = get_number(j.at("mass"), path + ".mass");
    if (p.m_P <= 0.0) invariant_error(path + ".mass > 0", p.m_P);
    p.l = get_number(j.at("length"), path + ".length");
    if (p.l <= 0.0) invariant_error(path + ".length > 0", p.l);
    p.r_BQ = get_vec3(j.at("fulcrum"), path + ".fulcrum");

    if (j.contains("fulcrum_dcm")) {
        p.R_BQ = get_mat3(j.at("fulcrum_dcm"), path + ".fulcrum_dcm");
        const double ortho =
            (p.R_BQ.transpose() * p.R_BQ - Mat3::Identity()).cwiseAbs().maxCoeff();
        if (ortho > 1e-9 || p.R_BQ.determinant() < 0.0) {
            invariant_error(path + ".fulcrum_dcm must be a proper rotation", ortho);
        }
    }

    const bool has_q = j.contains("damping_q");
    const bool has_xi = j.contains("damping_xi");
    if (has_q && has_xi) {
        throw ConfigError(path + ": give damping_q or damping_xi, not both");
    }
    if (has_q) {
        p.q = get_number(j.at("damping_q"), path + ".damping_q");
        if (p.q < 0.0) invariant_error(path + ".damping_q >= 0", p.q);
    } else if (has_xi) {
        const double xi = get_number(j.at("damping_xi"), path + ".damping_xi");
        if (xi < 0.0) invariant_error(path + ".damping_xi >= 0", xi);
        xi_requests.emplace_back(i, xi);
    }
    return p;
}

void parse_initial_state(const json& j, std::size_t n, SystemState& state) {
    require_object(j, "initial_state");
    check_keys(j, "initial_state",
               {"position", "velocity", "attitude_quat", "omega",
                "pendulum_angles", "pendulum_rates"});
    if (j.contains("position")) {
        state.r = get_vec3(j.at("position"), "initial_state.position");
    }
    if (j.contains("velocity")) {
        state.v = get_vec3(j.at("velocity"), "initial_state.velocity");
    }
    if (j.contains("attitude_quat")) {
        state.q = get_vec4(j.at("attitude_quat"), "initial_state.attitude_quat");
        const double norm = state.q.norm();
        if (std::abs(norm - 1.0) > 1e-6) {
            invariant_error("initial_state.attitude_quat must be unit length", norm);
        }
        state.q /= norm;
    }
    if (j.contains("omega")) {
        state.omega = get_vec3(j.at("omega"), "initial_state.omega");
    }

    auto parse_pairs = [&](const char* key, auto&& store) {
        if (!j.contains(key)) return;
        const std::string path = std::string("initial_state.") + key;
        const json& arr = j.at(key);
        if (!arr.is_array() || arr.size() != n) {
            throw ConfigError(path + ": expected " + std::to_string(n) +
                              " [a, b] pairs, one per pendulum");
        }
        for (std::size_t i = 0; i < n; ++i) {
            const std::string row_path = path + "[" + std::to_string(i) + "]";
            const json& row = arr[i];
            if (!row.is_array() || row.size() != 2) {
                throw ConfigError(row_path + ": expected [a, b]");
            }
            store(i, get_number(row[0], row_path + "[0]"),
                  get_number(row[1], row_path + "[1]"));
        }
    };
    parse_pairs("pendulum_angles", [&](std::size_t i, double a, double b) {
        state.pend[i].theta = a;
        state.pend[i].phi = b;
    });
    parse_pairs("pendulum_rates", [&](std::size_t i, double a, double b) {
        state.pend[i].theta_dot = a;
        state.pend[i].phi_dot = b;
    });

    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(state.pend[i].theta) >= M_PI / 2.0) {
            invariant_error("initial_state.pendulum_angles[" + std::to_string(i) +
                                "]: |theta| < pi/2",
                            state.pend[i].theta);
        }
    }
}

void parse_inputs(const json& j, InputProfile& inputs) {
    require_object(j, "inputs");
    check_keys(j, "inputs",
               {"force_frame", "force_profile", "torque_profile", "interpolation"});
    if (j.contains("force_frame")) {
        inputs.force_frame = parse_force_frame(j.at("force_frame"), "inputs.force_frame");
    }
    if (j.contains("force_profile")) {
        inputs.force = parse_profile(j.at("force_profile"), "inputs.force_profile");
    }
    if (j.contains("torque_profile")) {
        inputs.torque = parse_profile(j.at("torque_profile"), "inputs.torque_profile");
    }
    if (j.contains("interpolation")) {
        const std::string s = get_string(j.at("interpolation"), "inputs.interpolation");
        if (s == "linear") {
            inputs.interpolation = Interp::Linear;
        } else if (s == "zoh") {
            inputs.interpolation = Interp::ZeroOrderHold;
        } else {
            throw ConfigError("inputs.interpolation: expected \"linear\" or \"zoh\", got \"" +
                              s + "\"");
        }
    }
}

NominalConfig parse_nominal(const json& j) {
    require_object(j, "nominal");
    check_keys(j, "nominal", {"Fz_bar", "force_frame"});
    if (!j.contains("Fz_bar")) {
        throw ConfigError("nominal.Fz_bar: missing required field");
    }
    NominalConfig out;
    out.Fz_bar = get_number(j.at("Fz_bar"), "nominal.Fz_bar");
    if (out.Fz_bar < 0.0) invariant_error("nominal.Fz_bar >= 0", out.Fz_bar);
    if (j.contains("force_frame")) {
        out.force_frame = parse_force_frame(j.at("force_frame"), "nominal.force_frame");
    }
    return out;
}

void parse_sim(const json& j, SimSettings& sim) {
    require_object(j, "sim");
    check_keys(j, "sim", {"t0", "tf", "dt"});
    if (j.contains("t0")) sim.t0 = get_number(j.at("t0"), "sim.t0");
    if (j.contains("tf")) sim.tf = get_number(j.at("tf"), "sim.tf");
    if (j.contains("dt")) sim.dt = get_number(j.at("dt"), "sim.dt");
}

json profile_to_json(const std::vector<ProfileSample>& profile) {
    json out = json::array();
    for (const ProfileSample& s : profile) {
        out.push_back({s.t, s.value(0), s.value(1), s.value(2)});
    }
    return out;
}

json mat3_to_json(const Mat3& m) {
    json out = json::array();
    for (int r = 0; r < 3; ++r) {
        out.push_back({m(r, 0), m(r, 1), m(r, 2)});
    }
    return out;
}

}  // namespace

// ============================================================================
// Public entry points
// ============================================================================

NominalConfig Scenario::require_nominal() const {
    if (!nominal) {
        throw ConfigError(
            "nominal: section required for this command (set nominal.Fz_bar)");
    }
    return *nominal;
}

Scenario parse_scenario_string(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("syntax error: ") + e.what());
    }
    require_object(root, "top level");
    check_keys(root, "",
               {"body", "pendulums", "gravity", "initial_state", "inputs",
                "nominal", "sim"});
    for (const char* key : {"body", "pendulums", "gravity"}) {
        if (!root.contains(key)) {
            throw ConfigError(std::string(key) + ": missing required section");
        }
    }

    Scenario sc;
    const RawBody body = parse_body(root.at("body"));
    sc.inertia_about = body.about;
    sc.rig.body.m_B = body.mass;

    const json& pends = root.at("pendulums");
    if (!pends.is_array()) {
        throw ConfigError("pendulums: expected an array");
    }
    std::vector<std::pair<std::size_t, double>> xi_requests;
    for (std::size_t i = 0; i < pends.size(); ++i) {
        sc.rig.pendulums.push_back(parse_pendulum(pends[i], i, xi_requests));
    }

    // The two inertia conventions are related by the parallel-axis shift
    // through the rest CoM offset r_BGbar.
    const Vec3 r_BG = com_shift(sc.rig);
    const Mat3 shift = sc.rig.body.m_B * skew(r_BG) * skew(r_BG);
    if (body.about == InertiaAbout::B) {
        sc.rig.body.J_B = body.inertia;
        sc.rig.body.J_Gbar = body.inertia - shift;
    } else {
        sc.rig.body.J_Gbar = body.inertia;
        sc.rig.body.J_B = body.inertia + shift;
    }
    // The given tensor is checked in parse_body; the derived one can only
    // lose definiteness in the Gbar -> B direction (the shift subtracts), but
    // check whichever was computed.
    Eigen::SelfAdjointEigenSolver<Mat3> es(body.about == InertiaAbout::B
                                               ? sc.rig.body.J_Gbar
                                               : sc.rig.body.J_B);
    if (es.eigenvalues().minCoeff() <= 0.0) {
        invariant_error(
            "body.inertia must remain positive definite after the "
            "parallel-axis shift",
            es.eigenvalues().minCoeff());
    }

    sc.inputs = InputProfile::zero(get_vec3(root.at("gravity"), "gravity"));
    sc.initial.pend.resize(sc.rig.n_pend());
    if (root.contains("initial_state")) {
        parse_initial_state(root.at("initial_state"), sc.rig.n_pend(), sc.initial);
    }
    if (root.contains("inputs")) {
        parse_inputs(root.at("inputs"), sc.inputs);
    }
    if (root.contains("nominal")) {
        sc.nominal = parse_nominal(root.at("nominal"));
    }
    if (root.contains("sim")) {
        parse_sim(root.at("sim"), sc.sim);
    }
    sc.sim.n_steps();  // Validates t0/tf/dt jointly.

    for (const auto& [i, xi] : xi_requests) {
        if (!sc.nominal) {
            throw ConfigError("pendulums[" + std::to_string(i) +
                              "].damping_xi requires the nominal section");
        }
        sc.rig.pendulums[i].q = damping_q_from_xi(sc.rig, *sc.nominal, i, xi);
    }
    return sc;
}

Scenario parse_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open scenario file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_string(buf.str());
}

std::string serialize_scenario(const Scenario& sc) {
    json root;
    root["body"]["mass"] = sc.rig.body.m_B;
    root["body"]["inertia"] =
        mat3_to_json(sc.inertia_about == InertiaAbout::B ? sc.rig.body.J_B
                                                         : sc.rig.body.J_Gbar);
    root["body"]["inertia_about"] =
        sc.inertia_about == InertiaAbout::B ? "B" : "Gbar";

    root["pendulums"] = json::array();
    for (const PendulumDef& p : sc.rig.pendulums) {
        json jp;
        jp["mass"] = p.m_P;
        jp["length"] = p.l;
        jp["fulcrum"] = {p.r_BQ(0), p.r_BQ(1), p.r_BQ(2)};
        jp["fulcrum_dcm"] = mat3_to_json(p.R_BQ);
        jp["damping_q"] = p.q;
        root["pendulums"].push_back(jp);
    }

    root["gravity"] = {sc.inputs.g_I(0), sc.inputs.g_I(1), sc.inputs.g_I(2)};

    json& init = root["initial_state"];
    init["position"] = {sc.initial.r(0), sc.initial.r(1), sc.initial.r(2)};
    init["velocity"] = {sc.initial.v(0), sc.initial.v(1), sc.initial.v(2)};
    init["attitude_quat"] = {sc.initial.q(0), sc.initial.q(1),
                             sc.initial.q(2), sc.initial.q(3)};
    init["omega"] = {sc.initial.omega(0), sc.initial.omega(1),
                     sc.initial.omega(2)};
    init["pendulum_angles"] = json::array();
    init["pendulum_rates"] = json::array();
    for (const PendulumAngles& p : sc.initial.pend) {
        init["pendulum_angles"].push_back({p.theta, p.phi});
        init["pendulum_rates"].push_back({p.theta_dot, p.phi_dot});
    }

    json& inputs = root["inputs"];
    inputs["force_frame"] =
        sc.inputs.force_frame == ForceFrame::Inertial ? "inertial" : "body";
    inputs["force_profile"] = profile_to_json(sc.inputs.force);
    inputs["torque_profile"] = profile_to_json(sc.inputs.torque);
    inputs["interpolation"] =
        sc.inputs.interpolation == Interp::Linear ? "linear" : "zoh";

    if (sc.nominal) {
        root["nominal"]["Fz_bar"] = sc.nominal->Fz_bar;
        root["nominal"]["force_frame"] =
            sc.nominal->force_frame == ForceFrame::Inertial ? "inertial" : "body";
    }

    root["sim"]["t0"] = sc.sim.t0;
    root["sim"]["tf"] = sc.sim.tf;
    root["sim"]["dt"] = sc.sim.dt;

    return root.dump(2) + "\n";
}

}  // namespace sloshsim
