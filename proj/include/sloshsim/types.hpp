// Core value types shared across the slosh dynamics library
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace sloshsim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Unit quaternion (w, x, y, z), rotating body-frame vectors into the
/// inertial frame.  Stored as a plain 4-vector so it can be integrated as
/// ordinary state and renormalized explicitly.
using Quat = Eigen::Vector4d;

// =============================================================================
// System description
// =============================================================================

/// Spherical-pendulum deflection angles and rates.
///
/// theta tilts the rod in the fulcrum x-z plane; phi then swings it about the
/// tilted x-axis.  The parameterization is singular at |theta| = pi/2.
struct PendulumAngles {
    double theta = 0.0;      ///< Tilt angle [rad]
    double phi = 0.0;        ///< Swing angle [rad]
    double theta_dot = 0.0;  ///< Tilt rate [rad/s]
    double phi_dot = 0.0;    ///< Swing rate [rad/s]
};

/// Rigid-body (dry hub) parameters.
///
/// B is the hub's own center of mass; Gbar is the composite center of mass
/// with every pendulum at its rest position (theta = phi = 0), constant in
/// the body frame.  Both inertia tensors are kept because the two dynamics
/// formulations reference different points.
struct BodyParams {
    double m_B = 0.0;  ///< Hub mass [kg]
    Mat3 J_B;          ///< Inertia about B, body axes [kg·m²]
    Mat3 J_Gbar;       ///< Inertia about Gbar, body axes [kg·m²]
};

/// One slosh pendulum: point mass on a rigid massless rod of fixed length,
/// hinged at a fulcrum Q fixed in the body frame.
struct PendulumDef {
    double m_P = 0.0;            ///< Pendulum mass [kg]
    double l = 0.0;              ///< Rod length [m]
    Vec3 r_BQ = Vec3::Zero();    ///< Fulcrum position from B, body frame [m]
    Mat3 R_BQ = Mat3::Identity();///< Fulcrum frame orientation in body axes
    double q = 0.0;              ///< Proportional damping coefficient [kg·m/s]
};

/// Full mechanical description: hub plus pendulum list.
struct RigParams {
    BodyParams body;
    std::vector<PendulumDef> pendulums;

    std::size_t n_pend() const { return pendulums.size(); }
    /// Total mass m_B + sum of pendulum masses [kg]
    double total_mass() const {
        double m = body.m_B;
        for (const auto& p : pendulums) m += p.m_P;
        return m;
    }
};

/// Frame tag for an applied force vector.
enum class ForceFrame { Inertial, Body };

/// Instantaneous external loads and the ambient gravity field.
struct ExternalInputs {
    Vec3 F = Vec3::Zero();               ///< Applied force [N]
    ForceFrame frame = ForceFrame::Inertial;  ///< Frame of F
    Vec3 tau_B = Vec3::Zero();           ///< Applied torque, body frame [N·m]
    Vec3 g_I = Vec3::Zero();             ///< Uniform gravity, inertial frame [m/s²]
};

/// Minimal-coordinate state of the coupled system.
///
/// r and v locate the formulation's reference point (B for the body-CoM
/// model, Gbar for the nominal-CoM model) in the inertial frame; which point
/// is meant is decided by the assembly routine consuming the state.
struct SystemState {
    Vec3 r = Vec3::Zero();      ///< Reference-point position, inertial [m]
    Vec3 v = Vec3::Zero();      ///< Reference-point velocity, inertial [m/s]
    Quat q = Quat(1, 0, 0, 0);  ///< Attitude, body -> inertial
    Vec3 omega = Vec3::Zero();  ///< Angular rate, body frame [rad/s]
    std::vector<PendulumAngles> pend;  ///< Per-pendulum angles and rates
};

// =============================================================================
// Errors
// =============================================================================

/// Base class for all library-raised failures.
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when a pendulum reaches the parameterization singularity
/// |theta| >= pi/2 - eps.  Carries the offending pendulum index and, when
/// raised during propagation, the simulation time.
class SingularityError : public ModelError {
public:
    SingularityError(std::size_t index, double theta, double time = std::nan(""))
        : ModelError(format(index, theta, time)),
          pendulum_index(index), theta(theta), time(time) {}

    std::size_t pendulum_index;  ///< Zero-based pendulum index
    double theta;                ///< Offending tilt angle [rad]
    double time;                 ///< Simulation time [s]; NaN outside propagation

private:
    static std::string format(std::size_t index, double theta, double time);
};

/// Raised on invalid configuration input (schema, physical invariants).
class ConfigError : public ModelError {
public:
    explicit ConfigError(const std::string& msg) : ModelError(msg) {}
};

/// Raised on numerical failure: singular solves, non-finite states,
/// unresolvable finite-difference steps.
class NumericalError : public ModelError {
public:
    explicit NumericalError(const std::string& msg) : ModelError(msg) {}
};

}  // namespace sloshsim
