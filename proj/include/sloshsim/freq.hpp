// Frequency-domain evaluation, eigenmodes, and the finite-difference
// linearization oracle
#pragma once

#include <sloshsim/linmodel.hpp>
#include <sloshsim/types.hpp>

#include <complex>

namespace sloshsim {

/// Dynamic-stiffness condition number above which a sweep point is treated
/// as an unresolved resonance and flagged instead of reported.
inline constexpr double kResonanceCondLimit = 1e12;

// =============================================================================
// Domain types
// =============================================================================

/// Logarithmically spaced frequency grid [rad/s].
struct FreqGrid {
    double wmin = 1e-2;  ///< Lower bound [rad/s], must be > 0
    double wmax = 1e2;   ///< Upper bound [rad/s], must be > wmin
    int points = 200;    ///< Number of grid points, must be >= 2

    /// The grid values, strictly increasing.
    /// @throws std::invalid_argument on invalid bounds or count
    std::vector<double> omegas() const;
};

/// Frequency-response data over a grid for selected input/output channels.
struct BodeData {
    std::vector<double> omega;        ///< Grid [rad/s]
    std::vector<int> outputs;         ///< Selected coordinate indices
    std::vector<int> inputs;          ///< Selected input indices (0..5)
    std::vector<Eigen::MatrixXcd> gain;  ///< Per point: outputs×inputs complex gains
    std::vector<bool> flagged;        ///< True where the solve was near-singular

    /// Magnitude in dB of channel (row, col) at grid index k.
    double mag_db(std::size_t k, std::size_t row, std::size_t col) const;
};

/// Finite-difference stencil settings.
struct FdSettings {
    double h_pos = 1e-6;   ///< Translation step [m]
    double h_ang = 1e-6;   ///< Attitude / pendulum angle step [rad]
    double h_rate = 1e-6;  ///< Rate step [1/s scaled by coordinate]
    bool verify_steps = false;  ///< Re-run at h/2 and fail on disagreement
};

// =============================================================================
// Operations
// =============================================================================

/// Frequency response X(i·omega) = (-omega²·M + i·omega·D + K)^{-1}·B_f,
/// one column per input channel.
///
/// @throws NumericalError when the dynamic stiffness is near-singular
///         (condition number above kResonanceCondLimit): undamped resonance,
///         or omega = 0 with rank-deficient K
Eigen::MatrixXcd second_order_gain(const LinearModel& model, double omega,
                                   double* cond_out = nullptr);

/// Sweep the grid and collect complex gains for the selected channels.
/// Near-singular points are flagged per point, never thrown.
///
/// @throws std::invalid_argument on empty or out-of-range selections
BodeData bode_sweep(const LinearModel& model, const std::vector<int>& inputs,
                    const std::vector<int>& outputs, const FreqGrid& grid);

/// Eigen decomposition of the first-order companion form
/// [[0, I], [-M^{-1}K, -M^{-1}D]].
struct Eigenmodes {
    Eigen::VectorXcd values;   ///< 2·(6+2n) eigenvalues
    Eigen::MatrixXcd vectors;  ///< Columns: (position; velocity) mode shapes
};

/// Companion-form eigenvalues and mode shapes.
/// @throws NumericalError if M is singular
Eigenmodes eigenmodes(const LinearModel& model);

/// Numerically linearize the nominal-CoM nonlinear model about the nominal
/// point (rest angles, identity attitude, zero rates, force Fz_bar·e_z in
/// the configured frame, zero torque) by central differences of the residual
/// F(x, xd, xdd) = M(x)·xdd_bar - u(x, xd) evaluated at the nominal
/// acceleration.  Attitude perturbations are applied multiplicatively.  The
/// mass matrix is exact (the residual is linear in accelerations).
///
/// Coordinates match the physical linear model: (dr_OGbar, dth_IB,
/// theta_i, phi_i, ...).
///
/// @throws NumericalError if verify_steps detects cancellation
LinearModel fd_linearize(const RigParams& params, const NominalConfig& cfg,
                         const Vec3& g_I, const FdSettings& settings = {});

}  // namespace sloshsim
