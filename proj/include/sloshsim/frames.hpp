// Frame conventions, small-matrix primitives, and pendulum kinematics
#pragma once

#include <sloshsim/types.hpp>

namespace sloshsim {

// =============================================================================
// Small-matrix primitives
// =============================================================================

/// Cross-product matrix: skew(v)·u = v × u for all u.
Mat3 skew(const Vec3& v);

/// Dyadic (outer) product: dyad(a, b)(i, j) = a_i · b_j.
Mat3 dyad(const Vec3& a, const Vec3& b);

// =============================================================================
// Pendulum kinematics
// =============================================================================

/// Rotation from the pendulum frame P to the fulcrum frame Q.
///
/// The rod axis z_P points from the mass toward the fulcrum; theta tilts it
/// in the x-z plane, phi swings it about the tilted x-axis.  Orthonormal
/// with det +1 for all angles.
///
/// @param theta Tilt angle [rad]
/// @param phi Swing angle [rad]
Mat3 rot_qp(double theta, double phi);

/// Position of the pendulum mass P in the fulcrum frame Q.
///
/// Equals rot_qp(theta, phi)·(0, 0, -l); |result| = l always.
///
/// @param theta Tilt angle [rad]
/// @param phi Swing angle [rad]
/// @param l Rod length [m], must be > 0
/// @throws std::invalid_argument if l <= 0
Vec3 pend_position(double theta, double phi, double l);

/// Pendulum angular rate and the rate-only part of its angular acceleration.
struct PendRates {
    Vec3 omega_qp;          ///< Angular rate of P relative to Q, P frame [rad/s]
    Vec3 omega_dot_partial; ///< Angular-acceleration part free of theta_dd, phi_dd [rad/s²]
};

/// Relative angular rate of the pendulum frame and the accelerations' known
/// (rate-quadratic) part:
///   omega_qp          = (phi_dot·cos(theta), -theta_dot, -phi_dot·sin(theta))
///   omega_dot_partial = (-phi_dot·theta_dot·sin(theta), 0, -phi_dot·theta_dot·cos(theta))
PendRates pend_rates(const PendulumAngles& angles);

// =============================================================================
// Quaternion attitude
// =============================================================================

/// Direction cosine matrix (body -> inertial) of a unit quaternion (w,x,y,z).
Mat3 quat_to_dcm(const Quat& q);

/// Hamilton product a ⊗ b.
Quat quat_mul(const Quat& a, const Quat& b);

/// Attitude kinematics: q_dot = ½ q ⊗ (0, omega_B) for body-frame rate.
Quat quat_deriv(const Quat& q, const Vec3& omega_B);

/// Quaternion of the rotation by |rotvec| radians about rotvec's direction.
/// Returns identity for a zero vector.
Quat quat_from_rotvec(const Vec3& rotvec);

/// Return q scaled to unit norm.
Quat quat_normalized(const Quat& q);

}  // namespace sloshsim
