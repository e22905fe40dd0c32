// Fixed-step time integration with input profiles and per-step diagnostics
#pragma once

#include <sloshsim/dynamics.hpp>
#include <sloshsim/types.hpp>

#include <functional>

namespace sloshsim {

// =============================================================================
// Input profiles
// =============================================================================

/// One time-stamped 3-vector sample of an input profile.
struct ProfileSample {
    double t;    ///< Sample time [s]
    Vec3 value;  ///< Force [N] or torque [N·m]
};

/// Interpolation mode between profile samples.
enum class Interp { Linear, ZeroOrderHold };

/// Open-loop force/torque commands plus the constant gravity field.
struct InputProfile {
    std::vector<ProfileSample> force;   ///< Applied force samples [N]
    ForceFrame force_frame = ForceFrame::Inertial;
    std::vector<ProfileSample> torque;  ///< Body-frame torque samples [N·m]
    Interp interpolation = Interp::Linear;
    Vec3 g_I = Vec3::Zero();            ///< Uniform gravity, inertial [m/s²]

    /// Constant zero-input profile under the given gravity.
    static InputProfile zero(const Vec3& g_I);
};

/// Evaluate the profile at time t.  Times outside the sampled span clamp to
/// the nearest endpoint.
///
/// @throws std::invalid_argument if either sample list is empty
ExternalInputs eval_inputs(const InputProfile& profile, double t);

// =============================================================================
// Integration
// =============================================================================

/// Fixed-step integration settings.
struct SimSettings {
    double t0 = 0.0;   ///< Start time [s]
    double tf = 10.0;  ///< End time [s]
    double dt = 1e-3;  ///< Step size [s]

    /// Number of steps; validates dt > 0, tf > t0, and that (tf - t0)/dt is
    /// an integer within 1e-9.
    /// @throws ConfigError on violation
    std::size_t n_steps() const;
};

/// One classical Runge-Kutta 4 step of a generic first-order system
/// x_dot = f(x, t); no renormalization is applied at this level.
template <typename F>
VecX rk4_step(F&& f, const VecX& x, double t, double dt) {
    VecX k1 = f(x, t);
    VecX k2 = f(x + 0.5 * dt * k1, t + 0.5 * dt);
    VecX k3 = f(x + 0.5 * dt * k2, t + 0.5 * dt);
    VecX k4 = f(x + dt * k3, t + dt);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Pack a system state into a flat vector of length 13 + 4n:
/// (r, v, q, omega, then per pendulum theta, phi, theta_dot, phi_dot).
VecX pack_state(const SystemState& state);

/// Inverse of pack_state for n pendulums.
SystemState unpack_state(const VecX& x, std::size_t n);

/// One RK4 step of the coupled system under the input profile, with the
/// attitude quaternion renormalized after the step.
///
/// @throws SingularityError (stamped with time) on pendulum singularity
SystemState rk4_step(const RigParams& params, const InputProfile& profile,
                     const SystemState& state, double t, double dt);

// =============================================================================
// Diagnostics
// =============================================================================

/// Conserved-quantity diagnostics of a body-CoM state.
struct Diagnostics {
    double E;  ///< Total mechanical energy [J]
    Vec3 p;    ///< Linear momentum, inertial [kg·m/s]
    Vec3 L_O;  ///< Angular momentum about the inertial origin [kg·m²/s]
};

/// Energy, linear momentum, and angular momentum about the inertial origin.
/// Gravity potential is -m·g·r per particle; pendulum velocities come from
/// the full kinematic chain.
Diagnostics diagnostics(const SystemState& state, const RigParams& params,
                        const Vec3& g_I);

// =============================================================================
// Trajectory
// =============================================================================

/// One recorded step of a propagation.
struct TrajectoryStep {
    double t;                             ///< Time [s]
    SystemState state;                    ///< State at t (body-CoM)
    Accelerations acc;                    ///< Solved accelerations at t
    std::vector<double> tensions;         ///< Rod tensions [N]
    std::vector<PendulumWrench> wrenches; ///< Hub reaction wrenches
    Diagnostics diag;                     ///< Energy and momenta
};

/// Uniform-grid trajectory, inclusive of both endpoints.
struct Trajectory {
    std::vector<TrajectoryStep> steps;
};

/// Propagate the body-CoM model on a uniform grid.  Records state,
/// accelerations, tensions, wrenches, and diagnostics at every grid point
/// including t0.  Stops with full context (time, pendulum index) if a
/// singularity is reached mid-run.
///
/// @throws SingularityError, NumericalError (non-finite state), ConfigError
///         (bad settings)
Trajectory propagate(const RigParams& params, const InputProfile& profile,
                     const SystemState& initial, const SimSettings& settings);

}  // namespace sloshsim
