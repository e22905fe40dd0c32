#include <sloshsim/dynamics.hpp>

#include <Eigen/LU>

#include <cmath>
#include <sstream>

namespace sloshsim {

std::string SingularityError::format(std::size_t index, double theta,
                                     double time) {
    std::ostringstream os;
    os << "pendulum " << index << " reached the singularity guard: |theta| = "
       << std::abs(theta) << " rad >= pi/2 - 1e-6";
    if (!std::isnan(time)) os << " at t = " << time << " s";
    return os.str();
}

VecX Accelerations::stacked() const {
    VecX x(6 + 2 * pend_acc.size());
    x.head<3>() = rdd;
    x.segment<3>(3) = omega_dot;
    for (std::size_t i = 0; i < pend_acc.size(); ++i) {
        x(6 + 2 * i) = pend_acc[i][0];
        x(7 + 2 * i) = pend_acc[i][1];
    }
    return x;
}

namespace {

/// Frames of pendulum i at the current state.
struct PendFrames {
    Mat3 R_IB;     ///< Body -> inertial
    Mat3 R_BP;     ///< Pendulum -> body
    Mat3 R_IP;     ///< Pendulum -> inertial
    Vec3 r_QP_P;   ///< Fulcrum -> mass in the pendulum frame, (0, 0, -l)
};

PendFrames pend_frames(const SystemState& state, const PendulumDef& pend,
                       std::size_t i) {
    const PendulumAngles& a = state.pend.at(i);
    PendFrames f;
    f.R_IB = quat_to_dcm(state.q);
    f.R_BP = pend.R_BQ * rot_qp(a.theta, a.phi);
    f.R_IP = f.R_IB * f.R_BP;
    f.r_QP_P = Vec3(0, 0, -pend.l);
    return f;
}

void check_state_size(const SystemState& state, const RigParams& params) {
    if (state.pend.size() != params.pendulums.size())
        throw std::invalid_argument(
            "state pendulum count does not match the rig");
}

Vec3 resolve_force_I(const ExternalInputs& inputs, const Mat3& R_IB) {
    return inputs.frame == ForceFrame::Inertial ? inputs.F : R_IB * inputs.F;
}

/// Shared assembly body: rigid 6x6 part supplied by the caller, pendulum
/// blocks with the given reference-point lever offset.
AssembledSystem assemble_with(const SystemState& state, const RigParams& params,
                              const ExternalInputs& inputs, const Mat6& M_R,
                              const Vec6& u_R, const Vec3& ref_offset) {
    const std::size_t n = params.pendulums.size();
    AssembledSystem sys;
    sys.M = MatX::Zero(6 + 2 * n, 6 + 2 * n);
    sys.u = VecX::Zero(6 + 2 * n);
    sys.M66 = M_R;
    sys.u6 = u_R;
    sys.blocks.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 r_refQ = params.pendulums[i].r_BQ - ref_offset;
        PendulumBlocks blk =
            aux_terms(state, params.pendulums[i], inputs, i, r_refQ);
        sys.M66 += blk.A;
        sys.u6 += blk.a;
        sys.M.block<2, 6>(6 + 2 * i, 0) = blk.B;
        sys.M.block<2, 2>(6 + 2 * i, 6 + 2 * i) = blk.C;
        sys.u.segment<2>(6 + 2 * i) = blk.b;
        sys.blocks.push_back(std::move(blk));
    }
    sys.M.topLeftCorner<6, 6>() = sys.M66;
    sys.u.head<6>() = sys.u6;
    return sys;
}

}  // namespace

PendulumBlocks aux_terms(const SystemState& state, const PendulumDef& pend,
                         const ExternalInputs& inputs, std::size_t i,
                         const Vec3& r_refQ) {
    const PendulumAngles& ang = state.pend.at(i);
    if (std::abs(ang.theta) >= M_PI / 2.0 - kSingularityEps)
        throw SingularityError(i, ang.theta);

    const PendFrames f = pend_frames(state, pend, i);
    PendulumBlocks blk;
    blk.r_refP = r_refQ + f.R_BP * f.r_QP_P;
    blk.R_IP = f.R_IP;
    blk.zP_I = f.R_IP.col(2);
    blk.zP_B = f.R_BP.col(2);
    blk.m_P = pend.m_P;

    const Vec3 xP_I = f.R_IP.col(0), yP_I = f.R_IP.col(1);
    const Vec3 xP_B = f.R_BP.col(0), yP_B = f.R_BP.col(1);
    const Vec3 om_B = state.omega;
    const Vec3 om_P = f.R_BP.transpose() * om_B;  // hub rate seen in P axes
    const PendRates rates = pend_rates(ang);
    const Vec3& oqp = rates.omega_qp;
    const double m = pend.m_P, l = pend.l;

    // Rate-quadratic kinematic term of the pendulum equations, P frame.
    blk.v = l * ang.theta_dot * ang.phi_dot * std::sin(ang.theta) *
                Vec3::UnitY()
            - f.R_BP.transpose() * (skew(om_B) * skew(om_B) * blk.r_refP)
            - (2.0 * skew(om_P) * skew(oqp) + skew(oqp) * skew(oqp)) *
                  f.r_QP_P;
    blk.g_P = f.R_IP.transpose() * inputs.g_I;

    const Mat3 rx = skew(blk.r_refP);
    blk.A.setZero();
    blk.A.block<3, 3>(0, 0) = m * dyad(blk.zP_I, blk.zP_I);
    blk.A.block<3, 3>(0, 3) = -m * dyad(blk.zP_I, blk.zP_B) * rx;
    blk.A.block<3, 3>(3, 0) = m * rx * dyad(blk.zP_B, blk.zP_I);
    blk.A.block<3, 3>(3, 3) = -m * rx * dyad(blk.zP_B, blk.zP_B) * rx;

    blk.B.block<1, 3>(0, 0) = m * xP_I.transpose();
    blk.B.block<1, 3>(0, 3) = -m * xP_B.transpose() * rx;
    blk.B.block<1, 3>(1, 0) = m * yP_I.transpose();
    blk.B.block<1, 3>(1, 3) = -m * yP_B.transpose() * rx;

    blk.C = Eigen::Vector2d(m * l, m * l * std::cos(ang.theta)).asDiagonal();

    const double fz = m * (blk.g_P.z() + blk.v.z());
    blk.a.head<3>() = fz * blk.zP_I;
    blk.a.tail<3>() = fz * blk.r_refP.cross(blk.zP_B);

    blk.b = Eigen::Vector2d(m * (blk.g_P.x() + blk.v.x()),
                            m * (blk.g_P.y() + blk.v.y()))
            - pend.q * Eigen::Vector2d(ang.theta_dot, ang.phi_dot);
    return blk;
}

AssembledSystem assemble(const SystemState& state, const RigParams& params,
                         const ExternalInputs& inputs) {
    check_state_size(state, params);
    const Mat3 R_IB = quat_to_dcm(state.q);
    const Vec3 F_I = resolve_force_I(inputs, R_IB);
    const Mat3& J = params.body.J_B;

    Mat6 M_R = Mat6::Zero();
    M_R.topLeftCorner<3, 3>() = params.body.m_B * Mat3::Identity();
    M_R.bottomRightCorner<3, 3>() = J;
    Vec6 u_R;
    u_R.head<3>() = F_I + params.body.m_B * inputs.g_I;
    u_R.tail<3>() = inputs.tau_B - state.omega.cross(J * state.omega);

    return assemble_with(state, params, inputs, M_R, u_R, Vec3::Zero());
}

Vec3 com_shift(const RigParams& params) {
    Vec3 s = Vec3::Zero();
    for (const auto& p : params.pendulums)
        s += p.m_P * (p.r_BQ + p.R_BQ * Vec3(0, 0, -p.l));
    return s / params.total_mass();
}

AssembledSystem assemble_comG(const SystemState& state, const RigParams& params,
                              const ExternalInputs& inputs) {
    check_state_size(state, params);
    const Mat3 R_IB = quat_to_dcm(state.q);
    const Vec3 F_I = resolve_force_I(inputs, R_IB);
    const Vec3 r_BG = com_shift(params);
    const Mat3& J = params.body.J_Gbar;
    const Vec3& om = state.omega;
    const Vec3 g_B = R_IB.transpose() * inputs.g_I;
    const double m_B = params.body.m_B;

    Mat6 M_R = Mat6::Zero();
    M_R.topLeftCorner<3, 3>() = m_B * Mat3::Identity();
    M_R.block<3, 3>(0, 3) = m_B * R_IB * skew(r_BG);
    M_R.block<3, 3>(3, 0) = -m_B * skew(r_BG) * R_IB.transpose();
    M_R.bottomRightCorner<3, 3>() = J;
    Vec6 u_R;
    u_R.head<3>() =
        m_B * R_IB * skew(om) * skew(om) * r_BG + F_I + m_B * inputs.g_I;
    u_R.tail<3>() = inputs.tau_B - m_B * r_BG.cross(g_B) - om.cross(J * om);

    return assemble_with(state, params, inputs, M_R, u_R, r_BG);
}

Accelerations solve_accel(const AssembledSystem& sys, const RigParams& params) {
    Eigen::PartialPivLU<Mat6> lu(sys.M66);
    const double rc = lu.rcond();
    if (!(rc > 1e-14)) {
        std::ostringstream os;
        os << "rigid 6x6 block is numerically singular (reciprocal condition "
           << rc << ")";
        throw NumericalError(os.str());
    }
    Accelerations acc;
    const Vec6 acc6 = lu.solve(sys.u6);
    acc.rdd = acc6.head<3>();
    acc.omega_dot = acc6.tail<3>();
    acc.pend_acc.reserve(sys.blocks.size());
    for (const auto& blk : sys.blocks) {
        const Eigen::Vector2d rhs = blk.b - blk.B * acc6;
        // C is diagonal with positive entries inside the singularity guard.
        acc.pend_acc.push_back({rhs(0) / blk.C(0, 0), rhs(1) / blk.C(1, 1)});
    }
    (void)params;
    return acc;
}

double tension(const AssembledSystem& sys, const Accelerations& acc,
               std::size_t i) {
    const PendulumBlocks& blk = sys.blocks.at(i);
    const double m = blk.m_P;
    return m * blk.zP_I.dot(acc.rdd) -
           m * blk.zP_B.dot(skew(blk.r_refP) * acc.omega_dot) -
           m * blk.g_P.z() - m * blk.v.z();
}

PendulumWrench pendulum_wrench(const AssembledSystem& sys,
                               const Accelerations& acc, std::size_t i) {
    const PendulumBlocks& blk = sys.blocks.at(i);
    const Vec6 w = blk.a - blk.A * acc.acc6();
    PendulumWrench out;
    out.force_I = w.head<3>();
    out.torque_B = w.tail<3>();
    out.tension = tension(sys, acc, i);
    return out;
}

StateDerivative state_derivative(const SystemState& state,
                                 const RigParams& params,
                                 const ExternalInputs& inputs, double t) {
    StateDerivative d;
    try {
        const AssembledSystem sys = assemble(state, params, inputs);
        const Accelerations acc = solve_accel(sys, params);
        d.r_dot = state.v;
        d.v_dot = acc.rdd;
        d.q_dot = quat_deriv(state.q, state.omega);
        d.omega_dot = acc.omega_dot;
        d.pend.reserve(state.pend.size());
        for (std::size_t i = 0; i < state.pend.size(); ++i)
            d.pend.push_back({state.pend[i].theta_dot, state.pend[i].phi_dot,
                              acc.pend_acc[i][0], acc.pend_acc[i][1]});
    } catch (const SingularityError& e) {
        throw SingularityError(e.pendulum_index, e.theta, t);
    }
    return d;
}

Vec3 pend_point_position(const SystemState& state, const RigParams& params,
                         std::size_t i) {
    const PendulumDef& p = params.pendulums.at(i);
    const PendFrames f = pend_frames(state, p, i);
    return state.r + f.R_IB * p.r_BQ + f.R_IP * f.r_QP_P;
}

Vec3 pend_point_velocity(const SystemState& state, const RigParams& params,
                         std::size_t i) {
    const PendulumDef& p = params.pendulums.at(i);
    const PendFrames f = pend_frames(state, p, i);
    const Vec3 r_BP = p.r_BQ + f.R_BP * f.r_QP_P;
    const Vec3 oqp = pend_rates(state.pend[i]).omega_qp;
    return state.v + f.R_IB * state.omega.cross(r_BP) +
           f.R_IP * oqp.cross(f.r_QP_P);
}

Vec3 pend_point_accel(const SystemState& state, const RigParams& params,
                      const Accelerations& acc, std::size_t i,
                      const Vec3& r_refQ) {
    const PendulumDef& p = params.pendulums.at(i);
    const PendulumAngles& a = state.pend.at(i);
    const PendFrames f = pend_frames(state, p, i);
    const Vec3 r_refP = r_refQ + f.R_BP * f.r_QP_P;
    const Vec3& om = state.omega;
    const PendRates rates = pend_rates(a);
    const double thdd = acc.pend_acc.at(i)[0], phdd = acc.pend_acc.at(i)[1];
    const double c = std::cos(a.theta), s = std::sin(a.theta);
    const Vec3 oqp_dot =
        rates.omega_dot_partial + Vec3(phdd * c, -thdd, -phdd * s);
    return acc.rdd +
           f.R_IB * (skew(om) * skew(om) + skew(acc.omega_dot)) * r_refP +
           2.0 * f.R_IB * skew(om) * f.R_BP *
               rates.omega_qp.cross(f.r_QP_P) +
           f.R_IP * (skew(rates.omega_qp) * skew(rates.omega_qp) +
                     skew(oqp_dot)) *
               f.r_QP_P;
}

Vec3 damping_force_I(const SystemState& state, const RigParams& params,
                     std::size_t i) {
    const PendulumDef& p = params.pendulums.at(i);
    const PendulumAngles& a = state.pend.at(i);
    const PendFrames f = pend_frames(state, p, i);
    return f.R_IP * Vec3(-p.q * a.theta_dot, -p.q * a.phi_dot, 0.0);
}

}  // namespace sloshsim
