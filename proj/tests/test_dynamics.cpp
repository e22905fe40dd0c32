// Tests for assembly and solution of the coupled equations of motion
#include <doctest.h>

#include <sloshsim/dynamics.hpp>

#include <cmath>
#include <random>

using namespace sloshsim;

namespace {

// =============================================================================
// Reference rigs and states
// =============================================================================

/// m_B=9, m_P=1, l=1, fulcrum on the z-axis so the rest mass position sits
/// 0.5 m below the composite CoM; J about the composite CoM is diag(5,5,5).
RigParams unit_rig() {
    RigParams rig;
    rig.body.m_B = 9.0;
    rig.body.J_Gbar = 5.0 * Mat3::Identity();
    PendulumDef p;
    p.m_P = 1.0;
    p.l = 1.0;
    p.r_BQ = Vec3(0, 0, 4.0 / 9.0);
    rig.pendulums.push_back(p);
    const Vec3 r_BG = com_shift(rig);
    rig.body.J_B =
        rig.body.J_Gbar + rig.body.m_B * skew(r_BG) * skew(r_BG);
    return rig;
}

SystemState excited_state() {
    SystemState st;
    st.r = Vec3(0.4, -0.7, 1.1);
    st.v = Vec3(0.3, 0.2, -0.5);
    st.q = quat_normalized(Quat(0.9, 0.2, -0.3, 0.1));
    st.omega = Vec3(0.4, -0.2, 0.3);
    st.pend.resize(1);
    st.pend[0] = PendulumAngles{0.35, -0.6, 0.8, -1.2};
    return st;
}

struct Rng {
    std::mt19937 gen;
    explicit Rng(unsigned seed) : gen(seed) {}
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen);
    }
    Vec3 vec3(double lo, double hi) {
        return Vec3(uniform(lo, hi), uniform(lo, hi), uniform(lo, hi));
    }
    Quat unit_quat() {
        Quat q;
        for (int k = 0; k < 4; ++k) q(k) = uniform(-1.0, 1.0);
        return quat_normalized(q);
    }
};

RigParams random_rig(Rng& rng, std::size_t n, bool damped) {
    RigParams rig;
    rig.body.m_B = rng.uniform(5.0, 60.0);
    const Mat3 G = Mat3::NullaryExpr(
        [&](Eigen::Index, Eigen::Index) { return rng.uniform(-1.0, 1.0); });
    rig.body.J_B = G * G.transpose() + 5.0 * Mat3::Identity();
    for (std::size_t i = 0; i < n; ++i) {
        PendulumDef p;
        p.m_P = rng.uniform(0.5, 8.0);
        p.l = rng.uniform(0.2, 2.0);
        p.r_BQ = rng.vec3(-1.0, 1.0);
        p.R_BQ = quat_to_dcm(rng.unit_quat());
        p.q = damped ? rng.uniform(0.0, 2.0) : 0.0;
        rig.pendulums.push_back(p);
    }
    const Vec3 r_BG = com_shift(rig);
    rig.body.J_Gbar =
        rig.body.J_B - rig.body.m_B * skew(r_BG) * skew(r_BG);
    return rig;
}

SystemState random_state(Rng& rng, std::size_t n) {
    SystemState st;
    st.r = rng.vec3(-5.0, 5.0);
    st.v = rng.vec3(-3.0, 3.0);
    st.q = rng.unit_quat();
    st.omega = rng.vec3(-1.0, 1.0);
    st.pend.resize(n);
    for (auto& a : st.pend) {
        a.theta = rng.uniform(-1.0, 1.0);
        a.phi = rng.uniform(-1.0, 1.0);
        a.theta_dot = rng.uniform(-2.0, 2.0);
        a.phi_dot = rng.uniform(-2.0, 2.0);
    }
    return st;
}

ExternalInputs random_inputs(Rng& rng) {
    ExternalInputs in;
    in.F = rng.vec3(-50.0, 50.0);
    in.frame = rng.uniform(0.0, 1.0) < 0.5 ? ForceFrame::Inertial
                                           : ForceFrame::Body;
    in.tau_B = rng.vec3(-20.0, 20.0);
    in.g_I = rng.vec3(-10.0, 10.0);
    return in;
}

double max_rel(const MatX& got, const MatX& expect) {
    const double scale = std::max(1.0, expect.cwiseAbs().maxCoeff());
    return (got - expect).cwiseAbs().maxCoeff() / scale;
}

// Frozen oracle values for the unit rig: body-frame force F=(5,-3,2),
// torque (0.4,-0.2,0.6), g=(0,0,-9.81), at excited_state().
const double kM[] = {9.71615269697398, -0.093221423625352018, -0.44112104661661455, 0.19949489270583745, 0.12896890305278469, -4.4957811317018523e-19, 0, 0, -0.093221423625352018, 9.0121346102017856, 0.057420620114204755, -0.025968202008601417, -0.016787850966394426, 2.1599280770795753e-18, 0, 0, -0.44112104661661455, 0.057420620114204755, 9.2717126928242344, -0.12288077142892563, -0.079439619142714926, -1.4034608323459296e-17, 0, 0, 0.19949489270583745, -0.025968202008601417, -0.12288077142892563, 5.0277944659404632, 0.035926189464367327, -2.4244612565539555e-18, 0, 0, 0.12896890305278469, -0.016787850966394426, -0.079439619142714926, 0.035926189464367327, 4.9954476852064706, 2.4016122784503319e-18, 0, 0, -4.4957811317018523e-19, 2.1599280770795753e-18, -1.4034608323459296e-17, 6.5579251677096842e-18, 5.1497940457704577e-18, 5, 0, 0, 0.53151815622611287, 0.10744463622462912, 0.8402047963137026, -0.086050962721502477, -0.40783663142195431, 0.56464247339503537, 1, 0, 0.036547949710120174, 0.98808959105172789, -0.14947644438912727, 0.57255688399863303, 0.19361466612338066, 0.28300577276742539, 0, 0.93937271284737889};
const double kU[] = {9.5938626000434049, -4.0013364425297118, -88.274954751894683, 2.0039034768335338, 0.83914292743011099, 0.59999999999999998, -8.7065065100019563, 0.80042400555980042};
const double kAcc[] = {0.54997652466245195, -0.37742427414350671, -9.490488155145151, 0.1428391962531822, 0.00056541145087910514, 0.11999999999999997, -1.0395581881631148, -0.40580875050921728};
const double kTension = 1.308919248966095;
const double kWrench6[] = {1.107683458804174, -0.14418688834419202, -0.68228813314845693, 0.30856155914776684, 0.19947801804742649, -1.3289734605130954e-16};

// Frozen oracle values for the unit rig hanging at rest, no inputs,
// g=(0,0,-9.81).
const double kM0[] = {9, 0, 0, 0, 0, 0, 0, 0, 0, 9, 0, 0, 0, 0, 0, 0, 0, 0, 10, 0, 0, 0, 0, 0, 0, 0, 0, 4.9722222222222223, 0, 0, 0, 0, 0, 0, 0, 0, 4.9722222222222223, 0, 0, 0, 0, 0, 0, 0, 0, 5, 0, 0, 1, 0, 0, 0, -0.55555555555555558, 0, 1, 0, 0, 1, 0, 0.55555555555555558, 0, 0, 0, 1};
const double kU0[] = {0, 0, -98.100000000000009, 0, 0, 0, 0, 0};

MatX mat_from(const double* data, int rows, int cols) {
    MatX m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = data[r * cols + c];
    return m;
}

VecX vec_from(const double* data, int n) {
    VecX v(n);
    for (int k = 0; k < n; ++k) v(k) = data[k];
    return v;
}

}  // namespace

// =============================================================================
// aux_terms
// =============================================================================

TEST_CASE("aux_terms at static hanging has no rate terms") {
    RigParams rig = unit_rig();
    SystemState st;
    st.pend.resize(1);
    ExternalInputs in;
    in.g_I = Vec3(0, 0, -9.81);

    const PendulumBlocks blk =
        aux_terms(st, rig.pendulums[0], in, 0, rig.pendulums[0].r_BQ);
    CHECK(blk.v.norm() == 0.0);
    CHECK(max_rel(blk.C, Eigen::Matrix2d::Identity()) <= 1e-15);  // m·l = 1
    // Gravity is along the rod: no lateral forcing on the pendulum rows.
    CHECK(std::abs(blk.b(0)) <= 1e-15);
    CHECK(std::abs(blk.b(1)) <= 1e-15);
}

TEST_CASE("aux_terms pendulum-row mass block is diag(ml, ml cos theta)") {
    RigParams rig = unit_rig();
    rig.pendulums[0].m_P = 2.0;
    rig.pendulums[0].l = 0.7;
    SystemState st;
    st.pend.resize(1);
    st.pend[0].theta = 0.5;
    st.pend[0].phi = -0.3;
    ExternalInputs in;

    const PendulumBlocks blk =
        aux_terms(st, rig.pendulums[0], in, 0, rig.pendulums[0].r_BQ);
    CHECK(blk.C(0, 0) == doctest::Approx(2.0 * 0.7).epsilon(1e-15));
    CHECK(blk.C(1, 1) ==
          doctest::Approx(2.0 * 0.7 * std::cos(0.5)).epsilon(1e-15));
    CHECK(blk.C(0, 1) == 0.0);
    CHECK(blk.C(1, 0) == 0.0);
}

TEST_CASE("aux_terms translational mass block is the rod-axis dyad") {
    // Fulcrum at the reference point, rod hanging: r_refP = (0,0,-1).
    PendulumDef p;
    p.m_P = 1.0;
    p.l = 1.0;
    SystemState st;
    st.pend.resize(1);
    ExternalInputs in;

    const PendulumBlocks blk = aux_terms(st, p, in, 0, Vec3::Zero());
    const Mat3 expect = dyad(Vec3(0, 0, 1), Vec3(0, 0, 1));
    CHECK(max_rel(blk.A.topLeftCorner<3, 3>(), expect) <= 1e-15);
    CHECK((blk.r_refP - Vec3(0, 0, -1)).norm() == 0.0);
}

// =============================================================================
// assemble
// =============================================================================

TEST_CASE("assemble with zero pendulums reduces to the rigid body") {
    RigParams rig;
    rig.body.m_B = 7.0;
    rig.body.J_B = Vec3(2.0, 3.0, 4.0).asDiagonal();
    rig.body.J_Gbar = rig.body.J_B;

    SystemState st;
    st.q = quat_from_rotvec(Vec3(0, 0, M_PI / 2));
    st.omega = Vec3(0.5, -0.2, 0.1);

    ExternalInputs in;
    in.F = Vec3(1, 2, 3);
    in.frame = ForceFrame::Body;
    in.tau_B = Vec3(0.3, 0.1, -0.4);
    in.g_I = Vec3(0, 0, -9.81);

    const AssembledSystem sys = assemble(st, rig, in);
    REQUIRE(sys.M.rows() == 6);

    MatX expectM = MatX::Zero(6, 6);
    expectM.topLeftCorner<3, 3>() = 7.0 * Mat3::Identity();
    expectM.bottomRightCorner<3, 3>() = rig.body.J_B;
    CHECK(max_rel(sys.M, expectM) <= 1e-15);

    const Vec3 F_I = quat_to_dcm(st.q) * in.F;
    VecX expectU(6);
    expectU << F_I + 7.0 * in.g_I,
        in.tau_B - st.omega.cross(rig.body.J_B * st.omega);
    CHECK((sys.u - expectU).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("assemble matches the frozen values at static hanging") {
    RigParams rig = unit_rig();
    SystemState st;
    st.pend.resize(1);
    ExternalInputs in;
    in.g_I = Vec3(0, 0, -9.81);

    const AssembledSystem sys = assemble(st, rig, in);
    CHECK(max_rel(sys.M, mat_from(kM0, 8, 8)) <= 1e-14);
    CHECK((sys.u - vec_from(kU0, 8)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("assemble and solve match the frozen values on an excited state") {
    RigParams rig = unit_rig();
    const SystemState st = excited_state();
    ExternalInputs in;
    in.F = Vec3(5, -3, 2);
    in.frame = ForceFrame::Body;
    in.tau_B = Vec3(0.4, -0.2, 0.6);
    in.g_I = Vec3(0, 0, -9.81);

    const AssembledSystem sys = assemble(st, rig, in);
    CHECK(max_rel(sys.M, mat_from(kM, 8, 8)) <= 1e-13);
    CHECK(max_rel(sys.u, vec_from(kU, 8)) <= 1e-13);

    const Accelerations acc = solve_accel(sys, rig);
    CHECK(max_rel(acc.stacked(), vec_from(kAcc, 8)) <= 1e-12);

    CHECK(tension(sys, acc, 0) == doctest::Approx(kTension).epsilon(1e-12));

    const PendulumWrench w = pendulum_wrench(sys, acc, 0);
    VecX w6(6);
    w6 << w.force_I, w.torque_B;
    CHECK((w6 - vec_from(kWrench6, 6)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("staged solve agrees with a dense full-pivot solve") {
    Rng rng(314159u);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 1 + trial % 4;
        const RigParams rig = random_rig(rng, n, trial % 2 == 1);
        const SystemState st = random_state(rng, n);
        const ExternalInputs in = random_inputs(rng);

        const AssembledSystem sys = assemble(st, rig, in);
        const Accelerations acc = solve_accel(sys, rig);
        const VecX x = acc.stacked();

        const double ures = (sys.M * x - sys.u).norm() /
                            std::max(1.0, sys.u.norm());
        CHECK(ures <= 1e-12);

        const VecX dense = sys.M.fullPivLu().solve(sys.u);
        CHECK((x - dense).norm() <= 1e-9 * std::max(1.0, dense.norm()));
    }
}

// =============================================================================
// solve_accel reference cases
// =============================================================================

TEST_CASE("free fall accelerates every coordinate by gravity alone") {
    Rng rng(99u);
    RigParams rig = random_rig(rng, 3, false);
    SystemState st;
    st.v = Vec3(3, -1, 2);
    st.q = rng.unit_quat();
    st.pend.resize(3);

    ExternalInputs in;
    in.g_I = Vec3(1.2, -0.4, -9.81);

    const AssembledSystem sys = assemble(st, rig, in);
    const Accelerations acc = solve_accel(sys, rig);
    CHECK((acc.rdd - in.g_I).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(acc.omega_dot.cwiseAbs().maxCoeff() <= 1e-12);
    for (const auto& pa : acc.pend_acc) {
        CHECK(std::abs(pa[0]) <= 1e-12);
        CHECK(std::abs(pa[1]) <= 1e-12);
    }
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(tension(sys, acc, i)) <= 1e-12);
        const PendulumWrench w = pendulum_wrench(sys, acc, i);
        CHECK(w.force_I.norm() <= 1e-11);
        CHECK(w.torque_B.norm() <= 1e-11);
    }
}

TEST_CASE("axial thrust through an aligned pendulum stays in equilibrium") {
    RigParams rig = unit_rig();
    SystemState st;
    st.pend.resize(1);

    const double Fz = 20.0;
    ExternalInputs in;
    in.F = Vec3(0, 0, Fz);

    const AssembledSystem sys = assemble(st, rig, in);
    const Accelerations acc = solve_accel(sys, rig);

    const double azz = Fz / rig.total_mass();
    CHECK((acc.rdd - Vec3(0, 0, azz)).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK(acc.omega_dot.cwiseAbs().maxCoeff() <= 1e-13);
    CHECK(std::abs(acc.pend_acc[0][0]) <= 1e-13);
    CHECK(std::abs(acc.pend_acc[0][1]) <= 1e-13);

    const double N_expect = rig.pendulums[0].m_P * azz;
    CHECK(tension(sys, acc, 0) == doctest::Approx(N_expect).epsilon(1e-13));

    const PendulumWrench w = pendulum_wrench(sys, acc, 0);
    CHECK((w.force_I - Vec3(0, 0, -N_expect)).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK(w.torque_B.norm() <= 1e-13);
}

// =============================================================================
// Newton residual, wrench two-path check, damping
// =============================================================================

TEST_CASE("pendulum point masses obey Newton's law at solved accelerations") {
    Rng rng(2718u);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + trial % 3;
        const RigParams rig = random_rig(rng, n, true);
        const SystemState st = random_state(rng, n);
        const ExternalInputs in = random_inputs(rng);

        const AssembledSystem sys = assemble(st, rig, in);
        const Accelerations acc = solve_accel(sys, rig);
        for (std::size_t i = 0; i < n; ++i) {
            const double m = rig.pendulums[i].m_P;
            const Vec3 aP =
                pend_point_accel(st, rig, acc, i, rig.pendulums[i].r_BQ);
            const double N = tension(sys, acc, i);
            const Vec3 resid = m * aP - m * in.g_I -
                               N * sys.blocks[i].zP_I -
                               damping_force_I(st, rig, i);
            CHECK(resid.norm() <= 1e-9 * m * std::max(aP.norm(), 1.0));
        }
    }
}

TEST_CASE("the two wrench computation paths agree") {
    Rng rng(1618u);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + trial % 3;
        const RigParams rig = random_rig(rng, n, trial % 2 == 0);
        const SystemState st = random_state(rng, n);
        const ExternalInputs in = random_inputs(rng);

        const AssembledSystem sys = assemble(st, rig, in);
        const Accelerations acc = solve_accel(sys, rig);
        for (std::size_t i = 0; i < n; ++i) {
            const PendulumWrench w = pendulum_wrench(sys, acc, i);
            const double N = tension(sys, acc, i);
            const Vec3 f2 = -N * sys.blocks[i].zP_I;
            const Vec3 t2 =
                -N * sys.blocks[i].r_refP.cross(sys.blocks[i].zP_B);
            const double scale =
                w.force_I.norm() + w.torque_B.norm() + 1e-30;
            CHECK((w.force_I - f2).norm() + (w.torque_B - t2).norm() <=
                  1e-9 * scale);
            CHECK(w.tension == doctest::Approx(N).epsilon(1e-12));
        }
    }
}

TEST_CASE("tension takes no damping input") {
    Rng rng(555u);
    RigParams rig = random_rig(rng, 2, false);
    RigParams damped = rig;
    damped.pendulums[0].q = 1.5;
    damped.pendulums[1].q = 0.3;

    const SystemState st = random_state(rng, 2);
    const ExternalInputs in = random_inputs(rng);

    const AssembledSystem sys_u = assemble(st, rig, in);
    const AssembledSystem sys_d = assemble(st, damped, in);
    const Accelerations acc = solve_accel(sys_u, rig);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(tension(sys_u, acc, i) == tension(sys_d, acc, i));
}

// =============================================================================
// Nominal-CoM formulation
// =============================================================================

TEST_CASE("com_shift reference values") {
    RigParams rig = unit_rig();
    const Vec3 s = com_shift(rig);
    CHECK((s - Vec3(0, 0, -1.0 / 18.0)).cwiseAbs().maxCoeff() <= 1e-16);

    // Rest mass position at the reference point: zero shift.
    rig.pendulums[0].r_BQ = Vec3(0, 0, 1.0);
    CHECK(com_shift(rig).norm() == 0.0);

    // Two pendulums with mirrored rest mass positions: zero shift.
    RigParams sym;
    sym.body.m_B = 10.0;
    PendulumDef p;
    p.m_P = 2.0;
    p.l = 0.5;
    p.r_BQ = Vec3(0.8, 0.1, 0.3);    // rest mass at (0.8, 0.1, -0.2)
    sym.pendulums.push_back(p);
    p.r_BQ = Vec3(-0.8, -0.1, 0.7);  // rest mass at (-0.8, -0.1, 0.2)
    sym.pendulums.push_back(p);
    CHECK(com_shift(sym).norm() <= 1e-16);
}

TEST_CASE("nominal-CoM assembly coincides with the body form when the CoM "
          "shift vanishes") {
    RigParams rig;
    rig.body.m_B = 6.0;
    rig.body.J_B = Vec3(3.0, 4.0, 5.0).asDiagonal();
    rig.body.J_Gbar = rig.body.J_B;
    PendulumDef p;
    p.m_P = 2.0;
    p.l = 0.8;
    p.r_BQ = Vec3(0, 0, 0.8);  // rest mass position exactly at B
    rig.pendulums.push_back(p);
    REQUIRE(com_shift(rig).norm() == 0.0);

    Rng rng(77u);
    const SystemState st = random_state(rng, 1);
    const ExternalInputs in = random_inputs(rng);

    const AssembledSystem a = assemble(st, rig, in);
    const AssembledSystem b = assemble_comG(st, rig, in);
    CHECK(max_rel(b.M, a.M) <= 1e-14);
    CHECK(max_rel(b.u, a.u) <= 1e-13);
}

TEST_CASE("nominal-CoM assembly free fall") {
    RigParams rig = unit_rig();
    SystemState st;
    st.q = quat_normalized(Quat(0.8, -0.1, 0.4, 0.2));
    st.pend.resize(1);
    ExternalInputs in;
    in.g_I = Vec3(0, 0, -9.81);

    const Accelerations acc = solve_accel(assemble_comG(st, rig, in), rig);
    CHECK((acc.rdd - in.g_I).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(acc.omega_dot.cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::abs(acc.pend_acc[0][0]) <= 1e-12);
    CHECK(std::abs(acc.pend_acc[0][1]) <= 1e-12);
}

TEST_CASE("nominal-CoM assembly satisfies the aggregate CoM law") {
    Rng rng(31415u);
    for (int trial = 0; trial < 15; ++trial) {
        const std::size_t n = 1 + trial % 3;
        const RigParams rig = random_rig(rng, n, trial % 2 == 1);
        const SystemState st = random_state(rng, n);
        const ExternalInputs in = random_inputs(rng);

        const AssembledSystem sys = assemble_comG(st, rig, in);
        const Accelerations acc = solve_accel(sys, rig);

        const Vec3 r_BG = com_shift(rig);
        const Mat3 R = quat_to_dcm(st.q);
        // Hub CoM acceleration reconstructed from the reference point Gbar.
        const Vec3 rdd_B =
            acc.rdd - R * (skew(acc.omega_dot) +
                           skew(st.omega) * skew(st.omega)) *
                          r_BG;

        Vec3 lhs = rig.body.m_B * rdd_B;
        Vec3 fdamp_sum = Vec3::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            lhs += rig.pendulums[i].m_P *
                   pend_point_accel(st, rig, acc, i,
                                    rig.pendulums[i].r_BQ - r_BG);
            fdamp_sum += damping_force_I(st, rig, i);
        }
        const Vec3 F_I = in.frame == ForceFrame::Inertial ? in.F : R * in.F;
        const Vec3 rhs = F_I + rig.total_mass() * in.g_I + fdamp_sum;
        const double scale = F_I.norm() +
                             rig.total_mass() * in.g_I.norm() +
                             rig.total_mass() * acc.rdd.norm() + 1.0;
        CHECK((lhs - rhs).norm() <= 1e-9 * scale);
    }
}

// =============================================================================
// state_derivative
// =============================================================================

TEST_CASE("state derivative slots in free fall at zero rates") {
    RigParams rig = unit_rig();
    SystemState st;
    st.v = Vec3(1.5, -0.5, 0.25);
    st.pend.resize(1);
    ExternalInputs in;
    in.g_I = Vec3(0, 0, -9.81);

    const StateDerivative d = state_derivative(st, rig, in);
    CHECK((d.r_dot - st.v).norm() == 0.0);
    CHECK((d.v_dot - in.g_I).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(d.q_dot.norm() == 0.0);
    CHECK(d.omega_dot.cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::abs(d.pend[0][0]) == 0.0);
    CHECK(std::abs(d.pend[0][1]) == 0.0);
    CHECK(std::abs(d.pend[0][2]) <= 1e-12);
    CHECK(std::abs(d.pend[0][3]) <= 1e-12);
}

TEST_CASE("pure spin gives a quaternion derivative of magnitude one half") {
    RigParams rig;
    rig.body.m_B = 4.0;
    rig.body.J_B = 2.0 * Mat3::Identity();
    rig.body.J_Gbar = rig.body.J_B;
    SystemState st;
    st.omega = Vec3(0, 0, 1);
    ExternalInputs in;

    const StateDerivative d = state_derivative(st, rig, in);
    CHECK(d.q_dot.norm() == doctest::Approx(0.5).epsilon(1e-15));
    // Isotropic inertia: no gyroscopic torque.
    CHECK(d.omega_dot.norm() <= 1e-14);
}

TEST_CASE("position-slot derivative always equals the stored velocity") {
    Rng rng(12u);
    for (int trial = 0; trial < 5; ++trial) {
        const RigParams rig = random_rig(rng, 2, true);
        const SystemState st = random_state(rng, 2);
        const StateDerivative d =
            state_derivative(st, rig, random_inputs(rng));
        CHECK((d.r_dot - st.v).norm() == 0.0);
        CHECK(std::abs(d.pend[0][0] - st.pend[0].theta_dot) == 0.0);
        CHECK(std::abs(d.pend[1][1] - st.pend[1].phi_dot) == 0.0);
    }
}

// =============================================================================
// Singularity guard
// =============================================================================

TEST_CASE("assembly raises the singularity error exactly at the guard") {
    RigParams rig = unit_rig();
    PendulumDef extra = rig.pendulums[0];
    rig.pendulums.push_back(extra);

    SystemState st;
    st.pend.resize(2);
    ExternalInputs in;

    const double guard = M_PI / 2 - kSingularityEps;

    st.pend[1].theta = guard + 1e-9;
    CHECK_THROWS_AS(assemble(st, rig, in), SingularityError);
    try {
        assemble(st, rig, in);
    } catch (const SingularityError& e) {
        CHECK(e.pendulum_index == 1);
        CHECK(e.theta == doctest::Approx(guard + 1e-9).epsilon(1e-15));
        CHECK(std::isnan(e.time));
        CHECK(std::string(e.what()).find("pendulum 1") != std::string::npos);
    }

    // Negative tilt triggers the same guard.
    st.pend[1].theta = -(guard + 1e-9);
    CHECK_THROWS_AS(assemble(st, rig, in), SingularityError);

    // Just below the guard: assembly succeeds.
    st.pend[1].theta = guard - 1e-9;
    CHECK_NOTHROW(assemble(st, rig, in));
    CHECK_NOTHROW(assemble_comG(st, rig, in));
}

TEST_CASE("state derivative stamps the simulation time on the error") {
    RigParams rig = unit_rig();
    SystemState st;
    st.pend.resize(1);
    st.pend[0].theta = M_PI / 2;
    try {
        state_derivative(st, rig, ExternalInputs{}, 2.5);
        CHECK(false);
    } catch (const SingularityError& e) {
        CHECK(e.pendulum_index == 0);
        CHECK(e.time == 2.5);
        CHECK(std::string(e.what()).find("t = 2.5") != std::string::npos);
    }
}
