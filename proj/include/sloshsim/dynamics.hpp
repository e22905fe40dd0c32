// Assembly and solution of the coupled rigid-body + n-pendulum equations of motion
#pragma once

#include <sloshsim/frames.hpp>
#include <sloshsim/types.hpp>

#include <array>

namespace sloshsim {

/// Singularity guard margin: assembly fails when |theta| >= pi/2 - eps.
inline constexpr double kSingularityEps = 1e-6;

// =============================================================================
// Assembled system
// =============================================================================

/// Per-pendulum coupling blocks of the equations of motion, plus the
/// kinematic quantities the downstream tension/wrench operations reuse.
///
/// The pendulum contributes A·(rdd, omega_dot) and a to the six rigid
/// equations, and its own two equations C·(theta_dd, phi_dd) = b - B·(rdd,
/// omega_dot).  All lever arms are measured from the formulation's reference
/// point (B or Gbar).
struct PendulumBlocks {
    Mat6 A;                        ///< Rigid-equation mass contribution
    Eigen::Matrix<double, 2, 6> B; ///< Pendulum-row coupling into rigid accelerations
    Eigen::Matrix2d C;             ///< Pendulum-row mass block, diag(m·l, m·l·cos(theta))
    Vec6 a;                        ///< Rigid-equation forcing contribution
    Eigen::Vector2d b;             ///< Pendulum-row forcing (damping folded in)
    Vec3 v;                        ///< Rate-quadratic kinematic term, P frame [m/s²]
    Vec3 r_refP;                   ///< Reference point -> mass lever, body frame [m]
    Vec3 zP_I;                     ///< Rod axis z_P in inertial frame
    Vec3 zP_B;                     ///< Rod axis z_P in body frame
    Mat3 R_IP;                     ///< Pendulum frame -> inertial
    Vec3 g_P;                      ///< Gravity in pendulum frame [m/s²]
    double m_P;                    ///< Pendulum mass [kg]
};

/// The full system M·xdd = u in the stacked coordinates
/// (rdd, omega_dot, theta_dd_1, phi_dd_1, ...), plus the blocks needed for
/// the structured solve.
struct AssembledSystem {
    MatX M;    ///< (6+2n)×(6+2n) mass matrix (block lower-triangular)
    VecX u;    ///< (6+2n) forcing vector
    Mat6 M66;  ///< Rigid 6×6 block M_R + sum of A_i
    Vec6 u6;   ///< Rigid forcing u_R + sum of a_i
    std::vector<PendulumBlocks> blocks;
};

/// Solved accelerations in the same stacking as AssembledSystem.
struct Accelerations {
    Vec3 rdd = Vec3::Zero();        ///< Reference-point acceleration, inertial [m/s²]
    Vec3 omega_dot = Vec3::Zero();  ///< Angular acceleration, body frame [rad/s²]
    std::vector<std::array<double, 2>> pend_acc;  ///< (theta_dd, phi_dd) [rad/s²]

    Vec6 acc6() const {
        Vec6 a;
        a << rdd, omega_dot;
        return a;
    }
    /// Full (6+2n) stacked acceleration vector.
    VecX stacked() const;
};

/// Reaction of one pendulum on the hub, and the rod tension producing it.
struct PendulumWrench {
    Vec3 force_I;   ///< Force on the hub, inertial frame [N]; equals -N·z_P_I
    Vec3 torque_B;  ///< Torque on the hub about the reference point, body frame [N·m]
    double tension; ///< Rod tension N [N], positive pulling mass toward fulcrum
};

// =============================================================================
// Operations
// =============================================================================

/// Coupling blocks for pendulum i.
///
/// @param state System state (angles of pendulum i are read from it)
/// @param pend Pendulum parameters
/// @param inputs External loads (only gravity enters the blocks)
/// @param i Pendulum index, used in error reporting
/// @param r_refQ Fulcrum lever from the formulation's reference point, body
///        frame [m]: r_BQ for the body-CoM model, r_BQ - r_BGbar for the
///        nominal-CoM model
/// @throws SingularityError if |theta_i| >= pi/2 - 1e-6
PendulumBlocks aux_terms(const SystemState& state, const PendulumDef& pend,
                         const ExternalInputs& inputs, std::size_t i,
                         const Vec3& r_refQ);

/// Assemble the body-CoM formulation: state positions refer to B, the hub's
/// own center of mass, with inertia J_B.
///
/// @throws SingularityError if any |theta_i| >= pi/2 - 1e-6
AssembledSystem assemble(const SystemState& state, const RigParams& params,
                         const ExternalInputs& inputs);

/// Composite center of mass Gbar with all pendulums at rest, measured from B
/// in the body frame [m].
Vec3 com_shift(const RigParams& params);

/// Assemble the nominal-CoM formulation: state positions refer to Gbar, with
/// inertia J_Gbar.  Adds the CoM-shift coupling, centrifugal, and gravity-
/// torque terms that distinguish this form from the body-CoM one.
///
/// @throws SingularityError if any |theta_i| >= pi/2 - 1e-6
AssembledSystem assemble_comG(const SystemState& state, const RigParams& params,
                              const ExternalInputs& inputs);

/// Solve M·xdd = u by block elimination: factor the rigid 6×6 system first,
/// then close each pendulum pair through its diagonal 2×2 block.
///
/// @throws NumericalError if the rigid block is numerically singular
Accelerations solve_accel(const AssembledSystem& sys, const RigParams& params);

/// Rod tension N of pendulum i [N] at a solved acceleration.
///
/// Positive N pulls the mass toward the fulcrum; the force on the mass is
/// +N·z_P_I and the reaction on the hub -N·z_P_I.  Damping never enters this
/// formula.
double tension(const AssembledSystem& sys, const Accelerations& acc,
               std::size_t i);

/// Reaction wrench of pendulum i on the hub.
///
/// Computed as a_i - A_i·(rdd, omega_dot); agrees with the tension path
/// -N·(z_P_I ; r_refP × z_P_B) to solver precision.
PendulumWrench pendulum_wrench(const AssembledSystem& sys,
                               const Accelerations& acc, std::size_t i);

/// Time derivative of every state component (body-CoM formulation).
struct StateDerivative {
    Vec3 r_dot;       ///< = v [m/s]
    Vec3 v_dot;       ///< = rdd [m/s²]
    Quat q_dot;       ///< Quaternion kinematics
    Vec3 omega_dot;   ///< [rad/s²]
    std::vector<std::array<double, 4>> pend;  ///< (theta_dot, phi_dot, theta_dd, phi_dd)
};

/// Full first-order derivative for propagation.
///
/// @param t Simulation time, only used to stamp singularity errors [s]
/// @throws SingularityError with time context
StateDerivative state_derivative(const SystemState& state,
                                 const RigParams& params,
                                 const ExternalInputs& inputs, double t = 0.0);

// =============================================================================
// Pendulum point kinematics (used by diagnostics and validation oracles)
// =============================================================================

/// Inertial position of pendulum mass i [m] (body-CoM state).
Vec3 pend_point_position(const SystemState& state, const RigParams& params,
                         std::size_t i);

/// Inertial velocity of pendulum mass i [m/s] (body-CoM state).
Vec3 pend_point_velocity(const SystemState& state, const RigParams& params,
                         std::size_t i);

/// Inertial acceleration of pendulum mass i reconstructed purely from the
/// kinematic chain (reference acceleration, frame rates, pendulum rates and
/// accelerations) [m/s²].  Independent of the force balance, so it serves as
/// the Newton-residual oracle: m·a_P must equal gravity + tension + damping.
///
/// @param r_refQ Fulcrum lever consistent with how acc was produced (r_BQ for
///        the body-CoM model, r_BQ - r_BGbar for the nominal-CoM model)
Vec3 pend_point_accel(const SystemState& state, const RigParams& params,
                      const Accelerations& acc, std::size_t i,
                      const Vec3& r_refQ);

/// Damping force applied to pendulum mass i by the proportional damper,
/// expressed in the inertial frame [N].  The damper is grounded: it acts on
/// the pendulum equations only, with no reaction on the hub.
Vec3 damping_force_I(const SystemState& state, const RigParams& params,
                     std::size_t i);

}  // namespace sloshsim
