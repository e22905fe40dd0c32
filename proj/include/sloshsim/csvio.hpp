// Deterministic CSV output: trajectories, linear-model matrices, Bode data,
// eigenvalues
#pragma once

#include <sloshsim/freq.hpp>
#include <sloshsim/linmodel.hpp>
#include <sloshsim/propagate.hpp>

#include <iosfwd>
#include <string>

namespace sloshsim {

/// Format a double with 17 significant digits ("%.17g"), enough to
/// round-trip any IEEE-754 double exactly.
std::string format_full(double x);

/// Trajectory CSV.  Header: t, rx, ry, rz, vx, vy, vz, qw, qx, qy, qz, wx,
/// wy, wz, then per pendulum theta_i, phi_i, thetadot_i, phidot_i, N_i, then
/// E, px, py, pz, Lx, Ly, Lz.  One row per grid point, full precision.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Linear-model matrix file: a coordinate label row, then labeled blocks
/// "M", "D", "K", and "L_1".."L_n", each block one bare CSV row per matrix
/// row.
void write_linear_model(std::ostream& os, const LinearModel& model);

/// Bode CSV: column omega_rad_s then mag_db_<out>_<in> per channel, where
/// <out> is the coordinate label and <in> one of Fx, Fy, Fz, Tx, Ty, Tz.
/// Flagged (near-singular) points leave their magnitude cells empty.
void write_bode_csv(std::ostream& os, const BodeData& data,
                    const LinearModel& model);

/// Eigenvalue CSV: columns re, im; rows sorted by (re, im) for stable
/// output.
void write_modes_csv(std::ostream& os, const Eigenmodes& modes);

}  // namespace sloshsim
