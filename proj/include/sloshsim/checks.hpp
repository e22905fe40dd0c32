// Self-contained validation suite: conservation, algebraic residuals,
// modal congruence, MSD equivalence, linearization cross-checks, integrator
// order
#pragma once

#include <sloshsim/scenario.hpp>
#include <sloshsim/types.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>

namespace sloshsim {

/// Outcome of one named check.
struct CheckResult {
    std::string name;   ///< Stable machine-parseable identifier
    bool passed;
    double measured;    ///< Worst observed value
    double tolerance;   ///< Pass threshold
    std::string note;   ///< Optional human context
};

/// Ordered list of check outcomes for one scenario.
struct RunReport {
    std::vector<CheckResult> checks;
    bool all_passed() const;
};

/// Print one line per check: PASS/FAIL, name, measured value, tolerance.
void print_report(std::ostream& os, const RunReport& report);

// =============================================================================
// Individual check primitives (also used by the acceptance suite)
// =============================================================================

/// Worst-case algebraic residuals over random states drawn around a rig.
struct ResidualStats {
    double solve;    ///< ||M·xdd - u|| / ||u||, dense matrix
    double newton;   ///< Pendulum point-mass Newton residual, relative
    double com_law;  ///< Aggregate CoM law residual, relative
    double wrench;   ///< Wrench two-path disagreement, relative
};

/// Evaluate solve/Newton/CoM/wrench residuals on `count` random states of
/// random rigs (pendulum count 1..4, random fulcrum orientations).  With
/// with_damping the rigs carry q > 0 and the Newton and CoM laws include the
/// damper force explicitly.
ResidualStats residual_stats(int count, std::uint64_t seed, bool with_damping);

/// Evaluate the residuals on `count` random states of one given rig.
ResidualStats residual_stats_for(const RigParams& params, int count,
                                 std::uint64_t seed);

/// Relative energy drift and, for g = 0 runs, relative momentum drifts of a
/// zero-input propagation.
struct ConservationStats {
    double energy_rel;   ///< max |E(t) - E(0)| / |E(0)|
    double p_rel;        ///< max ||p(t) - p(0)|| / scale
    double L_rel;        ///< max ||L(t) - L(0)|| / scale
};

/// Propagate with zero force/torque and report conservation drift.
ConservationStats conservation_stats(const RigParams& params, const Vec3& g_I,
                                     const SystemState& initial,
                                     const SimSettings& settings);

/// Damped-run dissipation figures, evaluated in a reduced setting (zero
/// inputs, zero gravity, body linear velocity zeroed) where the grounded
/// damper is strictly dissipative.
struct DissipationStats {
    double E0;              ///< Initial energy, for scaling tolerances [J]
    double worst_uptick;    ///< Largest per-step energy increase [J] (<= 0 when monotone)
    double work_rate_err;   ///< |dE - integral of damper power| / |dE|
};

/// Propagate the reduced damped scenario and report monotonicity and the
/// work-rate identity defect.
DissipationStats dissipation_stats(const RigParams& params,
                                   const SystemState& initial,
                                   const SimSettings& settings);

/// Self-convergence order check: end-state errors at dt and dt/2 against a
/// dt/8 reference over the given span.
struct ConvergenceStats {
    double e1;      ///< ||x(dt) - x(dt/8)||
    double e2;      ///< ||x(dt/2) - x(dt/8)||
    double ratio;   ///< e1/e2, ~16 for a 4th-order scheme
    bool at_roundoff;  ///< True when errors are too small to resolve the order
};

ConvergenceStats convergence_stats(const RigParams& params, const Vec3& g_I,
                                   const SystemState& initial, double span,
                                   double dt);

/// Run the full ordered suite on a scenario: residuals, conservation (or
/// dissipation when damped), linearization FD-match, modal congruence, MSD
/// equivalence, integrator convergence.
RunReport run_checks(const Scenario& scenario);

}  // namespace sloshsim
