// Python bindings for the slosh dynamics library
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sloshsim/checks.hpp"
#include "sloshsim/csvio.hpp"
#include "sloshsim/dynamics.hpp"
#include "sloshsim/freq.hpp"
#include "sloshsim/frames.hpp"
#include "sloshsim/linmodel.hpp"
#include "sloshsim/propagate.hpp"
#include "sloshsim/scenario.hpp"

namespace py = pybind11;
using namespace sloshsim;

namespace {

/// Propagation results repackaged as dense arrays for numpy consumption.
py::dict propagate_arrays(const RigParams& params, const InputProfile& profile,
                          const SystemState& initial,
                          const SimSettings& settings) {
    const Trajectory traj = propagate(params, profile, initial, settings);
    const std::size_t rows = traj.steps.size();
    const std::size_t n = params.n_pend();
    const std::size_t m = 13 + 4 * n;

    VecX t(rows), E(rows);
    MatX state(rows, m), tensions(rows, n), p(rows, 3), L(rows, 3);
    for (std::size_t k = 0; k < rows; ++k) {
        const TrajectoryStep& step = traj.steps[k];
        t(k) = step.t;
        state.row(k) = pack_state(step.state).transpose();
        for (std::size_t i = 0; i < n; ++i) tensions(k, i) = step.tensions[i];
        E(k) = step.diag.E;
        p.row(k) = step.diag.p.transpose();
        L.row(k) = step.diag.L_O.transpose();
    }

    py::dict out;
    out["t"] = t;
    out["state"] = state;
    out["tension"] = tensions;
    out["E"] = E;
    out["p"] = p;
    out["L"] = L;
    return out;
}

VecX solve_accel_stacked(const SystemState& state, const RigParams& params,
                         const ExternalInputs& inputs) {
    const AssembledSystem sys = assemble(state, params, inputs);
    return solve_accel(sys, params).stacked();
}

}  // namespace

PYBIND11_MODULE(sloshsim, m) {
    m.doc() = "Propellant-slosh dynamics: rigid hub with spherical-pendulum tanks";

    py::register_exception<ModelError>(m, "ModelError");
    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<NumericalError>(m, "NumericalError");
    py::register_exception<SingularityError>(m, "SingularityError");

    // --- System description --------------------------------------------------
    py::enum_<ForceFrame>(m, "ForceFrame")
        .value("INERTIAL", ForceFrame::Inertial)
        .value("BODY", ForceFrame::Body);

    py::class_<PendulumAngles>(m, "PendulumAngles")
        .def(py::init<>())
        .def_readwrite("theta", &PendulumAngles::theta)
        .def_readwrite("phi", &PendulumAngles::phi)
        .def_readwrite("theta_dot", &PendulumAngles::theta_dot)
        .def_readwrite("phi_dot", &PendulumAngles::phi_dot);

    py::class_<BodyParams>(m, "BodyParams")
        .def(py::init<>())
        .def_readwrite("m_B", &BodyParams::m_B)
        .def_readwrite("J_B", &BodyParams::J_B)
        .def_readwrite("J_Gbar", &BodyParams::J_Gbar);

    py::class_<PendulumDef>(m, "PendulumDef")
        .def(py::init<>())
        .def_readwrite("m_P", &PendulumDef::m_P)
        .def_readwrite("l", &PendulumDef::l)
        .def_readwrite("r_BQ", &PendulumDef::r_BQ)
        .def_readwrite("R_BQ", &PendulumDef::R_BQ)
        .def_readwrite("q", &PendulumDef::q);

    py::class_<RigParams>(m, "RigParams")
        .def(py::init<>())
        .def_readwrite("body", &RigParams::body)
        .def_readwrite("pendulums", &RigParams::pendulums)
        .def("n_pend", &RigParams::n_pend)
        .def("total_mass", &RigParams::total_mass);

    py::class_<SystemState>(m, "SystemState")
        .def(py::init<>())
        .def_readwrite("r", &SystemState::r)
        .def_readwrite("v", &SystemState::v)
        .def_readwrite("q", &SystemState::q)
        .def_readwrite("omega", &SystemState::omega)
        .def_readwrite("pend", &SystemState::pend);

    py::class_<ExternalInputs>(m, "ExternalInputs")
        .def(py::init<>())
        .def_readwrite("F", &ExternalInputs::F)
        .def_readwrite("frame", &ExternalInputs::frame)
        .def_readwrite("tau_B", &ExternalInputs::tau_B)
        .def_readwrite("g_I", &ExternalInputs::g_I);

    py::class_<ProfileSample>(m, "ProfileSample")
        .def(py::init<>())
        .def_readwrite("t", &ProfileSample::t)
        .def_readwrite("value", &ProfileSample::value);

    py::class_<InputProfile>(m, "InputProfile")
        .def(py::init<>())
        .def_readwrite("force", &InputProfile::force)
        .def_readwrite("force_frame", &InputProfile::force_frame)
        .def_readwrite("torque", &InputProfile::torque)
        .def_readwrite("g_I", &InputProfile::g_I)
        .def_static("zero", &InputProfile::zero, py::arg("g_I"));

    py::class_<SimSettings>(m, "SimSettings")
        .def(py::init<>())
        .def_readwrite("t0", &SimSettings::t0)
        .def_readwrite("tf", &SimSettings::tf)
        .def_readwrite("dt", &SimSettings::dt)
        .def("n_steps", &SimSettings::n_steps);

    py::class_<NominalConfig>(m, "NominalConfig")
        .def(py::init<>())
        .def_readwrite("Fz_bar", &NominalConfig::Fz_bar)
        .def_readwrite("force_frame", &NominalConfig::force_frame);

    py::class_<Scenario>(m, "Scenario")
        .def_readwrite("rig", &Scenario::rig)
        .def_readwrite("inputs", &Scenario::inputs)
        .def_readwrite("initial", &Scenario::initial)
        .def_readwrite("sim", &Scenario::sim)
        .def_property_readonly(
            "nominal", [](const Scenario& sc) -> py::object {
                if (!sc.nominal) return py::none();
                return py::cast(*sc.nominal);
            });

    // --- Linear models -------------------------------------------------------
    py::class_<LinearModel>(m, "LinearModel")
        .def_readonly("M", &LinearModel::M)
        .def_readonly("D", &LinearModel::D)
        .def_readonly("K", &LinearModel::K)
        .def_readonly("labels", &LinearModel::labels)
        .def_readonly("B_f", &LinearModel::B_f)
        .def_readonly("L", &LinearModel::L);

    py::class_<ModalConstants>(m, "ModalConstants")
        .def_readonly("m_Gbar", &ModalConstants::m_Gbar)
        .def_readonly("omega0_sq", &ModalConstants::omega0_sq)
        .def_readonly("tau0", &ModalConstants::tau0)
        .def_readonly("I_B", &ModalConstants::I_B);

    py::class_<CheckResult>(m, "CheckResult")
        .def_readonly("name", &CheckResult::name)
        .def_readonly("passed", &CheckResult::passed)
        .def_readonly("measured", &CheckResult::measured)
        .def_readonly("tolerance", &CheckResult::tolerance)
        .def_readonly("note", &CheckResult::note);

    py::class_<RunReport>(m, "RunReport")
        .def_readonly("checks", &RunReport::checks)
        .def("all_passed", &RunReport::all_passed);

    // --- Kinematics ----------------------------------------------------------
    m.def("skew", &skew, py::arg("v"), "Cross-product matrix of a 3-vector");
    m.def("rot_qp", &rot_qp, py::arg("theta"), py::arg("phi"),
          "Fulcrum-to-pendulum rotation matrix");
    m.def("pend_position", &pend_position, py::arg("theta"), py::arg("phi"),
          py::arg("l"), "Pendulum mass position in the fulcrum frame");
    m.def("quat_to_dcm", &quat_to_dcm, py::arg("q"),
          "Direction cosine matrix of a unit quaternion (body -> inertial)");

    // --- Dynamics ------------------------------------------------------------
    m.def(
        "assemble",
        [](const SystemState& st, const RigParams& p, const ExternalInputs& in) {
            const AssembledSystem sys = assemble(st, p, in);
            return py::make_tuple(sys.M, sys.u);
        },
        py::arg("state"), py::arg("params"), py::arg("inputs"),
        "Mass matrix and forcing vector of the body-CoM formulation");
    m.def("solve_accel", &solve_accel_stacked, py::arg("state"),
          py::arg("params"), py::arg("inputs"),
          "Stacked accelerations (rdd, omega_dot, theta_dd/phi_dd per pendulum)");
    m.def("com_shift", &com_shift, py::arg("params"),
          "Composite rest CoM Gbar measured from B, body frame");
    m.def("propagate", &propagate_arrays, py::arg("params"), py::arg("profile"),
          py::arg("initial"), py::arg("settings"),
          "Propagate and return t/state/tension/E/p/L arrays");
    m.def("pack_state", &pack_state, py::arg("state"));
    m.def("unpack_state", &unpack_state, py::arg("x"), py::arg("n"));

    // --- Linearization -------------------------------------------------------
    m.def("nominal_accel", &nominal_accel, py::arg("cfg"), py::arg("params"),
          py::arg("g_I"));
    m.def("build_physical_single", &build_physical_single, py::arg("params"),
          py::arg("cfg"));
    m.def("build_modal", &build_modal, py::arg("params"), py::arg("cfg"));
    m.def("build_msd_modal", &build_msd_modal, py::arg("params"), py::arg("cfg"),
          py::arg("k"));
    m.def("modal_transform_matrices", &modal_transform_matrices,
          py::arg("params"));
    m.def("modal_transform_check", &modal_transform_check, py::arg("physical"),
          py::arg("modal"), py::arg("params"));
    m.def("damping_q_from_xi", &damping_q_from_xi, py::arg("params"),
          py::arg("cfg"), py::arg("i"), py::arg("xi"));
    m.def("damping_xi_from_q", &damping_xi_from_q, py::arg("params"),
          py::arg("cfg"), py::arg("i"), py::arg("q"));

    py::class_<FdSettings>(m, "FdSettings")
        .def(py::init<>())
        .def_readwrite("h_pos", &FdSettings::h_pos)
        .def_readwrite("h_ang", &FdSettings::h_ang)
        .def_readwrite("h_rate", &FdSettings::h_rate)
        .def_readwrite("verify_steps", &FdSettings::verify_steps);

    m.def("fd_linearize", &fd_linearize, py::arg("params"), py::arg("cfg"),
          py::arg("g_I"), py::arg("settings") = FdSettings{});

    // --- Frequency domain ----------------------------------------------------
    m.def(
        "second_order_gain",
        [](const LinearModel& model, double omega) {
            return second_order_gain(model, omega);
        },
        py::arg("model"), py::arg("omega"));
    m.def(
        "eigenvalues",
        [](const LinearModel& model) { return eigenmodes(model).values; },
        py::arg("model"), "Companion-form eigenvalues");

    // --- Scenario and checks -------------------------------------------------
    m.def("parse_scenario", &parse_scenario, py::arg("path"));
    m.def("parse_scenario_string", &parse_scenario_string, py::arg("text"));
    m.def("serialize_scenario", &serialize_scenario, py::arg("scenario"));
    m.def("run_checks", &run_checks, py::arg("scenario"));
}
