// Linearized models about a nominal longitudinal force: physical and modal
// coordinates, the damping map, the mass-spring-damper equivalent, and the
// zero-g participation matrix
#pragma once

#include <sloshsim/types.hpp>

#include <string>
#include <utility>

namespace sloshsim {

// =============================================================================
// Domain types
// =============================================================================

/// Nominal operating point: a constant longitudinal force Fz_bar·e_z (thrust)
/// with zero nominal torque, body attitude aligned with the inertial frame.
struct NominalConfig {
    double Fz_bar = 0.0;  ///< Nominal longitudinal force [N]
    ForceFrame force_frame = ForceFrame::Inertial;  ///< Frame the force is fixed in
};

/// Scalars defined by the modal form.
struct ModalConstants {
    double m_Gbar;                  ///< Total mass m_B + sum m_i [kg]
    std::vector<double> omega0_sq;  ///< Slosh frequencies squared Fz_bar/(m_Gbar·l_i) [rad²/s²]
    std::vector<double> tau0;       ///< Attitude-destabilizing torques (m_i/m_Gbar)·Fz_bar·l_i [N·m]
    Mat3 I_B;                       ///< J_Gbar - sum m_i·skew(r_GbarQ_i)² [kg·m²]
};

/// Second-order linear system M·xdd + D·xd + K·x = B_f·(dF, dtau).
///
/// Coordinates are (dx, dy, dz, dthx, dthy, dthz) for the rigid part --
/// translation of Gbar and attitude -- followed by one pair per pendulum:
/// either modal (eta_theta, eta_phi) or physical (theta, phi) coordinates,
/// in declaration order.
struct LinearModel {
    MatX M;  ///< Mass matrix
    MatX D;  ///< Damping matrix
    MatX K;  ///< Stiffness matrix
    std::vector<std::string> labels;  ///< One label per coordinate
    MatX B_f;  ///< Input map, (6+2n)×6, equal to [I6; 0]
    std::vector<Eigen::Matrix<double, 2, 6>> L;  ///< Per-pendulum participation rows

    std::size_t dim() const { return static_cast<std::size_t>(M.rows()); }
};

/// Pendulum-equivalent mass-spring-damper parameters for one tank.
struct MsdParams {
    double m_P;        ///< Slosh mass [kg]
    double k;          ///< Spring stiffness [N/m]
    Vec3 r_GbarP_bar;  ///< Rest position of the mass from Gbar, body frame [m]
    double N_z_bar;    ///< Nominal vertical load (m_P/m_Gbar)·Fz_bar [N]
    double x0;         ///< Rest offset x of the mass from Gbar [m]
    double y0;         ///< Rest offset y of the mass from Gbar [m]
};

// =============================================================================
// Operations
// =============================================================================

/// Acceleration of the nominal trajectory: g + (Fz_bar/m_Gbar)·e_z [m/s²].
Vec3 nominal_accel(const NominalConfig& cfg, const RigParams& params,
                   const Vec3& g_I);

/// Single-pendulum linearized model in physical coordinates
/// (dr_OGbar, dth_IB, dtheta, dphi), 8×8.
///
/// @throws ConfigError for multiple pendulums, a misaligned fulcrum frame,
///         or Fz_bar <= 0
LinearModel build_physical_single(const RigParams& params,
                                  const NominalConfig& cfg);

/// Multi-pendulum linearized model in modal coordinates: symmetric M with
/// unit entries on the slosh diagonal, participation rows L_i, stiffness
/// with omega0² slosh entries and the tau0 attitude block.  D is diagonal
/// modal damping derived from each pendulum's q through the damping map.
///
/// @throws ConfigError if Fz_bar <= 0 or any fulcrum frame is misaligned
std::pair<LinearModel, ModalConstants> build_modal(const RigParams& params,
                                                   const NominalConfig& cfg);

/// Row-operation matrix S and coordinate map T (physical = T·modal per
/// column convention, rows combined by S) that carry the physical-coordinate
/// system into modal form: M_modal = S·M_phys·T, K_modal = S·K_phys·T.
/// Generalizes the single-pendulum construction to n pendulums.
std::pair<MatX, MatX> modal_transform_matrices(const RigParams& params);

/// Execute the physical -> modal coordinate change on the physical model's M
/// and K and return the largest absolute entry-wise discrepancy against the
/// modal builder's output.  Damping is excluded: the modal damping matrix is
/// defined directly by the damping-ratio map, not by congruence.
///
/// @throws std::invalid_argument on dimension mismatch
double modal_transform_check(const LinearModel& physical,
                             const LinearModel& modal,
                             const RigParams& params);

/// Damping map q = 2·xi·m_P·sqrt(Fz_bar·l/m_Gbar) for pendulum i.
/// @throws ConfigError if Fz_bar <= 0 or xi < 0
double damping_q_from_xi(const RigParams& params, const NominalConfig& cfg,
                         std::size_t i, double xi);

/// Inverse damping map xi from q for pendulum i.
/// @throws ConfigError if Fz_bar <= 0 or q < 0
double damping_xi_from_q(const RigParams& params, const NominalConfig& cfg,
                         std::size_t i, double q);

/// Equivalent mass-spring-damper parameters for pendulum i with spring k.
MsdParams msd_params(const RigParams& params, const NominalConfig& cfg,
                     std::size_t i, double k);

/// Modal-form linear model of the mass-spring-damper equivalent system, one
/// spring constant per pendulum.  With k_i = m_i·omega0_i² this reproduces
/// the pendulum modal model exactly; with Fz_bar = 0 it reduces to the
/// zero-force system whose participation rows use the rest offsets
/// r_GbarP_bar.
///
/// @throws ConfigError if any k_i <= 0 or a fulcrum frame is misaligned
LinearModel build_msd_modal(const RigParams& params, const NominalConfig& cfg,
                            const std::vector<double>& k);

/// Zero-g slosh participation matrices, 3×6 per pendulum:
/// sqrt(m_P)·[I3 | -skew(r_GbarP_bar)].
std::vector<Eigen::Matrix<double, 3, 6>> zero_g_participation(
    const RigParams& params);

}  // namespace sloshsim
