#include <sloshsim/propagate.hpp>

#include <cmath>
#include <sstream>

namespace sloshsim {

InputProfile InputProfile::zero(const Vec3& g_I) {
    InputProfile p;
    p.force = {{0.0, Vec3::Zero()}};
    p.torque = {{0.0, Vec3::Zero()}};
    p.g_I = g_I;
    return p;
}

namespace {

Vec3 sample_profile(const std::vector<ProfileSample>& samples, Interp mode,
                    double t) {
    if (samples.empty())
        throw std::invalid_argument("eval_inputs: empty profile");
    if (t <= samples.front().t) return samples.front().value;
    if (t >= samples.back().t) return samples.back().value;
    // Find the first sample strictly after t.
    std::size_t hi = 1;
    while (samples[hi].t <= t) ++hi;
    const ProfileSample& s0 = samples[hi - 1];
    const ProfileSample& s1 = samples[hi];
    if (mode == Interp::ZeroOrderHold) return s0.value;
    const double w = (t - s0.t) / (s1.t - s0.t);
    return (1.0 - w) * s0.value + w * s1.value;
}

}  // namespace

ExternalInputs eval_inputs(const InputProfile& profile, double t) {
    ExternalInputs in;
    in.F = sample_profile(profile.force, profile.interpolation, t);
    in.frame = profile.force_frame;
    in.tau_B = sample_profile(profile.torque, profile.interpolation, t);
    in.g_I = profile.g_I;
    return in;
}

std::size_t SimSettings::n_steps() const {
    if (!(dt > 0.0)) throw ConfigError("sim.dt must be positive");
    if (!(tf > t0)) throw ConfigError("sim.tf must exceed sim.t0");
    const double ratio = (tf - t0) / dt;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9)
        throw ConfigError(
            "sim: (tf - t0)/dt must be an integer within 1e-9");
    return static_cast<std::size_t>(rounded);
}

VecX pack_state(const SystemState& state) {
    const std::size_t n = state.pend.size();
    VecX x(13 + 4 * n);
    x.head<3>() = state.r;
    x.segment<3>(3) = state.v;
    x.segment<4>(6) = state.q;
    x.segment<3>(10) = state.omega;
    for (std::size_t i = 0; i < n; ++i) {
        x(13 + 4 * i) = state.pend[i].theta;
        x(14 + 4 * i) = state.pend[i].phi;
        x(15 + 4 * i) = state.pend[i].theta_dot;
        x(16 + 4 * i) = state.pend[i].phi_dot;
    }
    return x;
}

SystemState unpack_state(const VecX& x, std::size_t n) {
    SystemState s;
    s.r = x.head<3>();
    s.v = x.segment<3>(3);
    s.q = x.segment<4>(6);
    s.omega = x.segment<3>(10);
    s.pend.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.pend[i].theta = x(13 + 4 * i);
        s.pend[i].phi = x(14 + 4 * i);
        s.pend[i].theta_dot = x(15 + 4 * i);
        s.pend[i].phi_dot = x(16 + 4 * i);
    }
    return s;
}

namespace {

VecX pack_derivative(const StateDerivative& d, std::size_t n) {
    VecX x(13 + 4 * n);
    x.head<3>() = d.r_dot;
    x.segment<3>(3) = d.v_dot;
    x.segment<4>(6) = d.q_dot;
    x.segment<3>(10) = d.omega_dot;
    for (std::size_t i = 0; i < n; ++i)
        for (int j = 0; j < 4; ++j) x(13 + 4 * i + j) = d.pend[i][j];
    return x;
}

}  // namespace

SystemState rk4_step(const RigParams& params, const InputProfile& profile,
                     const SystemState& state, double t, double dt) {
    const std::size_t n = params.pendulums.size();
    auto f = [&](const VecX& x, double tau) -> VecX {
        return pack_derivative(
            state_derivative(unpack_state(x, n), params,
                             eval_inputs(profile, tau), tau),
            n);
    };
    VecX x = rk4_step(f, pack_state(state), t, dt);
    x.segment<4>(6) /= x.segment<4>(6).norm();
    return unpack_state(x, n);
}

Diagnostics diagnostics(const SystemState& state, const RigParams& params,
                        const Vec3& g_I) {
    const Mat3 R_IB = quat_to_dcm(state.q);
    const double m_B = params.body.m_B;
    Diagnostics d;
    d.E = 0.5 * m_B * state.v.squaredNorm() +
          0.5 * state.omega.dot(params.body.J_B * state.omega) -
          m_B * g_I.dot(state.r);
    d.p = m_B * state.v;
    d.L_O = state.r.cross(m_B * state.v) + R_IB * (params.body.J_B * state.omega);
    for (std::size_t i = 0; i < params.pendulums.size(); ++i) {
        const double m = params.pendulums[i].m_P;
        const Vec3 vP = pend_point_velocity(state, params, i);
        const Vec3 rP = pend_point_position(state, params, i);
        d.E += 0.5 * m * vP.squaredNorm() - m * g_I.dot(rP);
        d.p += m * vP;
        d.L_O += rP.cross(m * vP);
    }
    return d;
}

Trajectory propagate(const RigParams& params, const InputProfile& profile,
                     const SystemState& initial, const SimSettings& settings) {
    const std::size_t n_steps = settings.n_steps();
    SystemState x = initial;
    x.q = quat_normalized(x.q);

    Trajectory traj;
    traj.steps.reserve(n_steps + 1);
    auto record = [&](double t, const SystemState& s) {
        const ExternalInputs in = eval_inputs(profile, t);
        try {
            const AssembledSystem sys = assemble(s, params, in);
            const Accelerations acc = solve_accel(sys, params);
            TrajectoryStep step;
            step.t = t;
            step.state = s;
            step.acc = acc;
            step.tensions.reserve(params.pendulums.size());
            step.wrenches.reserve(params.pendulums.size());
            for (std::size_t i = 0; i < params.pendulums.size(); ++i) {
                step.tensions.push_back(tension(sys, acc, i));
                step.wrenches.push_back(pendulum_wrench(sys, acc, i));
            }
            step.diag = diagnostics(s, params, in.g_I);
            traj.steps.push_back(std::move(step));
        } catch (const SingularityError& e) {
            throw SingularityError(e.pendulum_index, e.theta, t);
        }
    };

    record(settings.t0, x);
    for (std::size_t k = 1; k <= n_steps; ++k) {
        const double t_prev = settings.t0 + static_cast<double>(k - 1) * settings.dt;
        x = rk4_step(params, profile, x, t_prev, settings.dt);
        const double t = settings.t0 + static_cast<double>(k) * settings.dt;
        if (!pack_state(x).allFinite()) {
            std::ostringstream os;
            os << "state became non-finite at t = " << t << " s";
            throw NumericalError(os.str());
        }
        record(t, x);
    }
    return traj;
}

}  // namespace sloshsim
