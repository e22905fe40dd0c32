// Scenario configuration: JSON parsing, validation, defaults, serialization
#pragma once

#include <sloshsim/linmodel.hpp>
#include <sloshsim/propagate.hpp>
#include <sloshsim/types.hpp>

#include <iosfwd>
#include <optional>
#include <string>

namespace sloshsim {

/// Which reference point the configured inertia tensor is given about.
enum class InertiaAbout { B, Gbar };

/// A fully validated scenario: the mechanical system, its initial state
/// (body-CoM convention), input profiles, the optional nominal point for
/// linearization, and integration settings.
struct Scenario {
    RigParams rig;
    InertiaAbout inertia_about = InertiaAbout::B;  ///< Convention of the source file
    InputProfile inputs;                  ///< Includes gravity
    SystemState initial;                  ///< r, v refer to B
    std::optional<NominalConfig> nominal; ///< Required by linearize/bode/modes
    SimSettings sim;

    /// Nominal point, or a ConfigError naming the missing section.
    NominalConfig require_nominal() const;
};

/// Parse and validate a scenario from a JSON file.
///
/// Applies defaults (dt = 1e-3, identity fulcrum orientation, zero initial
/// rates, zero input profiles), rejects unknown keys with their path,
/// enforces physical invariants (positive masses and lengths, symmetric
/// positive-definite inertia, orthonormal fulcrum frames, |theta| < pi/2,
/// at most one of damping_q/damping_xi per pendulum), and resolves
/// damping_xi to q through the nominal point.
///
/// @throws ConfigError with a field path on any violation
Scenario parse_scenario(const std::string& path);

/// Parse a scenario from an in-memory JSON string (same rules).
Scenario parse_scenario_string(const std::string& text);

/// Serialize a scenario back to canonical JSON with all defaults
/// materialized.  parse(serialize(s)) reproduces s exactly.
std::string serialize_scenario(const Scenario& scenario);

}  // namespace sloshsim
