#include <sloshsim/linmodel.hpp>

#include <sloshsim/dynamics.hpp>
#include <sloshsim/frames.hpp>

#include <cmath>
#include <sstream>

namespace sloshsim {

namespace {

void require_aligned_fulcrums(const RigParams& params, const char* who) {
    for (std::size_t i = 0; i < params.pendulums.size(); ++i) {
        if (!params.pendulums[i].R_BQ.isApprox(Mat3::Identity(), 1e-12)) {
            std::ostringstream os;
            os << who << ": pendulum " << i
               << " fulcrum frame must be aligned with the body frame";
            throw ConfigError(os.str());
        }
    }
}

void require_positive_force(const NominalConfig& cfg, const char* who) {
    if (!(cfg.Fz_bar > 0.0)) {
        std::ostringstream os;
        os << who << ": Fz_bar must be positive";
        throw ConfigError(os.str());
    }
}

std::vector<std::string> rigid_labels() {
    return {"dx", "dy", "dz", "dthx", "dthy", "dthz"};
}

MatX input_map(std::size_t dim) {
    MatX B = MatX::Zero(dim, 6);
    B.topLeftCorner(6, 6).setIdentity();
    return B;
}

/// Rest position of pendulum mass i from Gbar, body frame (aligned fulcrum).
Vec3 rest_offset_from_Gbar(const RigParams& params, std::size_t i) {
    const PendulumDef& p = params.pendulums[i];
    return (p.r_BQ - com_shift(params)) + p.R_BQ * Vec3(0, 0, -p.l);
}

ModalConstants make_constants(const RigParams& params,
                              const NominalConfig& cfg) {
    ModalConstants mc;
    mc.m_Gbar = params.total_mass();
    mc.I_B = params.body.J_Gbar;
    for (const auto& p : params.pendulums) {
        mc.omega0_sq.push_back(cfg.Fz_bar / (mc.m_Gbar * p.l));
        mc.tau0.push_back((p.m_P / mc.m_Gbar) * cfg.Fz_bar * p.l);
        const Vec3 r_GQ = p.r_BQ - com_shift(params);
        mc.I_B -= p.m_P * skew(r_GQ) * skew(r_GQ);
    }
    return mc;
}

}  // namespace

Vec3 nominal_accel(const NominalConfig& cfg, const RigParams& params,
                   const Vec3& g_I) {
    return g_I + (cfg.Fz_bar / params.total_mass()) * Vec3::UnitZ();
}

LinearModel build_physical_single(const RigParams& params,
                                  const NominalConfig& cfg) {
    if (params.pendulums.size() != 1)
        throw ConfigError(
            "build_physical_single: exactly one pendulum required");
    require_aligned_fulcrums(params, "build_physical_single");
    require_positive_force(cfg, "build_physical_single");

    const PendulumDef& p = params.pendulums[0];
    const double mB = params.body.m_B, mP = p.m_P, l = p.l;
    const Vec3 r_GQ = p.r_BQ - com_shift(params);
    const double xq = r_GQ.x(), yq = r_GQ.y(), zq = r_GQ.z();
    const double zbar = zq - l;  // rest height of the mass below Gbar
    const Mat3& J = params.body.J_Gbar;

    LinearModel m;
    m.M = MatX::Zero(8, 8);
    m.D = MatX::Zero(8, 8);
    m.K = MatX::Zero(8, 8);

    MatX& M = m.M;
    M(0, 0) = mB; M(0, 4) = -mP * zbar; M(0, 5) = mP * yq;
    M(1, 1) = mB; M(1, 3) = mP * zbar; M(1, 5) = -mP * xq;
    M(2, 2) = mB + mP;
    M(3, 1) = mP * zbar;
    M(3, 3) = J(0, 0) + mP * yq * yq;
    M(3, 4) = J(0, 1) - mP * xq * yq;
    M(3, 5) = J(0, 2);
    M(4, 0) = -mP * zbar;
    M(4, 3) = J(0, 1) - mP * xq * yq;
    M(4, 4) = J(1, 1) + mP * xq * xq;
    M(4, 5) = J(1, 2);
    M(5, 0) = mP * yq; M(5, 1) = -mP * xq;
    M(5, 3) = J(0, 2); M(5, 4) = J(1, 2); M(5, 5) = J(2, 2);
    M(6, 0) = mP; M(6, 4) = mP * zbar; M(6, 5) = -mP * yq; M(6, 6) = mP * l;
    M(7, 1) = mP; M(7, 3) = -mP * zbar; M(7, 5) = mP * xq; M(7, 7) = mP * l;

    const double c = cfg.Fz_bar / (mB + mP);
    MatX& K = m.K;
    K(0, 4) = mP; K(0, 6) = -mP;
    K(1, 3) = -mP; K(1, 7) = -mP;
    K(3, 3) = mP * zbar; K(3, 7) = mP * zq;
    K(4, 4) = mP * zbar; K(4, 6) = -mP * zq;
    K(5, 3) = -mP * xq; K(5, 4) = -mP * yq;
    K(5, 6) = mP * yq; K(5, 7) = -mP * xq;
    K(6, 4) = -mP; K(6, 6) = mP;
    K(7, 3) = mP; K(7, 7) = mP;
    K *= c;
    if (cfg.force_frame == ForceFrame::Body)
        K.block<3, 3>(0, 3) += cfg.Fz_bar * skew(Vec3::UnitZ());

    m.D(6, 6) = p.q;
    m.D(7, 7) = p.q;

    m.labels = rigid_labels();
    m.labels.push_back("theta_1");
    m.labels.push_back("phi_1");
    m.B_f = input_map(8);
    Eigen::Matrix<double, 2, 6> L;
    const double sm = std::sqrt(mP);
    L << 1, 0, 0, 0, zq, -yq,
         0, 1, 0, -zq, 0, xq;
    m.L.push_back(sm * L);
    return m;
}

std::pair<LinearModel, ModalConstants> build_modal(const RigParams& params,
                                                   const NominalConfig& cfg) {
    require_aligned_fulcrums(params, "build_modal");
    require_positive_force(cfg, "build_modal");

    const std::size_t n = params.pendulums.size();
    const std::size_t nd = 6 + 2 * n;
    const ModalConstants mc = make_constants(params, cfg);
    const Mat3 ez_x = skew(Vec3::UnitZ());

    LinearModel m;
    m.M = MatX::Zero(nd, nd);
    m.D = MatX::Zero(nd, nd);
    m.K = MatX::Zero(nd, nd);

    double sum_ml = 0.0;
    for (const auto& p : params.pendulums) sum_ml += p.m_P * p.l;
    m.M.block<3, 3>(0, 0) = mc.m_Gbar * Mat3::Identity();
    m.M.block<3, 3>(0, 3) = -sum_ml * ez_x;
    m.M.block<3, 3>(3, 0) = sum_ml * ez_x;
    m.M.block<3, 3>(3, 3) = mc.I_B;

    double sum_tau0 = 0.0;
    for (double t : mc.tau0) sum_tau0 += t;
    m.K.block<3, 3>(3, 3) = sum_tau0 * (ez_x * ez_x);
    if (cfg.force_frame == ForceFrame::Body)
        m.K.block<3, 3>(0, 3) += cfg.Fz_bar * ez_x;

    m.labels = rigid_labels();
    for (std::size_t i = 0; i < n; ++i) {
        const PendulumDef& p = params.pendulums[i];
        const Vec3 r_GQ = p.r_BQ - com_shift(params);
        const double xq = r_GQ.x(), yq = r_GQ.y(), zq = r_GQ.z();
        const double sm = std::sqrt(p.m_P);
        const std::size_t it = 6 + 2 * i, ip = 7 + 2 * i;

        Eigen::Matrix<double, 2, 6> L;
        L << 1, 0, 0, 0, zq, -yq,
             0, 1, 0, -zq, 0, xq;
        L *= sm;
        m.L.push_back(L);
        m.M.block<1, 6>(it, 0) = L.row(0);
        m.M.block<1, 6>(ip, 0) = L.row(1);
        m.M.block<6, 1>(0, it) = L.row(0).transpose();
        m.M.block<6, 1>(0, ip) = L.row(1).transpose();
        m.M(it, it) = 1.0;
        m.M(ip, ip) = 1.0;

        m.K(it, it) = mc.omega0_sq[i];
        m.K(ip, ip) = mc.omega0_sq[i];

        const double omega0 = std::sqrt(mc.omega0_sq[i]);
        const double xi = damping_xi_from_q(params, cfg, i, p.q);
        m.D(it, it) = 2.0 * xi * omega0;
        m.D(ip, ip) = 2.0 * xi * omega0;

        m.labels.push_back("eta_theta_" + std::to_string(i + 1));
        m.labels.push_back("eta_phi_" + std::to_string(i + 1));
    }
    m.B_f = input_map(nd);
    return {std::move(m), mc};
}

std::pair<MatX, MatX> modal_transform_matrices(const RigParams& params) {
    const std::size_t n = params.pendulums.size();
    const std::size_t nd = 6 + 2 * n;
    MatX S = MatX::Identity(nd, nd);
    MatX T = MatX::Identity(nd, nd);
    for (std::size_t i = 0; i < n; ++i) {
        const PendulumDef& p = params.pendulums[i];
        const Vec3 r_GQ = p.r_BQ - com_shift(params);
        const double xq = r_GQ.x(), yq = r_GQ.y(), zq = r_GQ.z();
        const double sm = std::sqrt(p.m_P);
        const std::size_t it = 6 + 2 * i, ip = 7 + 2 * i;
        // Coordinate change: theta = eta_theta/(sqrt(m)·l) + dthy,
        //                    phi   = eta_phi/(sqrt(m)·l) - dthx.
        T(it, it) = 1.0 / (sm * p.l);
        T(it, 4) = 1.0;
        T(ip, ip) = 1.0 / (sm * p.l);
        T(ip, 3) = -1.0;
        // Row additions into the rigid equations, then row scaling of the
        // pendulum equations.
        S(0, it) = 1.0;
        S(1, ip) = 1.0;
        S(3, ip) = -zq;
        S(4, it) = zq;
        S(5, it) = -yq;
        S(5, ip) = xq;
        S(it, it) = 1.0 / sm;
        S(ip, ip) = 1.0 / sm;
    }
    return {std::move(S), std::move(T)};
}

double modal_transform_check(const LinearModel& physical,
                             const LinearModel& modal,
                             const RigParams& params) {
    if (physical.dim() != modal.dim())
        throw std::invalid_argument(
            "modal_transform_check: dimension mismatch");
    const auto [S, T] = modal_transform_matrices(params);
    if (static_cast<std::size_t>(S.rows()) != physical.dim())
        throw std::invalid_argument(
            "modal_transform_check: rig does not match the models");
    const double dM = (S * physical.M * T - modal.M).cwiseAbs().maxCoeff();
    const double dK = (S * physical.K * T - modal.K).cwiseAbs().maxCoeff();
    return std::max(dM, dK);
}

double damping_q_from_xi(const RigParams& params, const NominalConfig& cfg,
                         std::size_t i, double xi) {
    require_positive_force(cfg, "damping_q_from_xi");
    if (xi < 0.0) throw ConfigError("damping ratio must be non-negative");
    const PendulumDef& p = params.pendulums.at(i);
    return 2.0 * xi * p.m_P *
           std::sqrt(cfg.Fz_bar * p.l / params.total_mass());
}

double damping_xi_from_q(const RigParams& params, const NominalConfig& cfg,
                         std::size_t i, double q) {
    require_positive_force(cfg, "damping_xi_from_q");
    if (q < 0.0) throw ConfigError("damping coefficient must be non-negative");
    const PendulumDef& p = params.pendulums.at(i);
    return q / (2.0 * p.m_P *
                std::sqrt(cfg.Fz_bar * p.l / params.total_mass()));
}

MsdParams msd_params(const RigParams& params, const NominalConfig& cfg,
                     std::size_t i, double k) {
    const PendulumDef& p = params.pendulums.at(i);
    MsdParams out;
    out.m_P = p.m_P;
    out.k = k;
    out.r_GbarP_bar = rest_offset_from_Gbar(params, i);
    out.N_z_bar = (p.m_P / params.total_mass()) * cfg.Fz_bar;
    out.x0 = out.r_GbarP_bar.x();
    out.y0 = out.r_GbarP_bar.y();
    return out;
}

LinearModel build_msd_modal(const RigParams& params, const NominalConfig& cfg,
                            const std::vector<double>& k) {
    require_aligned_fulcrums(params, "build_msd_modal");
    if (cfg.Fz_bar < 0.0)
        throw ConfigError("build_msd_modal: Fz_bar must be non-negative");
    const std::size_t n = params.pendulums.size();
    if (k.size() != n)
        throw ConfigError("build_msd_modal: one spring constant per pendulum");
    for (double ki : k)
        if (!(ki > 0.0))
            throw ConfigError("build_msd_modal: spring constants must be positive");

    const std::size_t nd = 6 + 2 * n;
    const double mG = params.total_mass();

    // Physical coordinates (dr_OGbar, dth_IB, dx_GbarP_i, dy_GbarP_i): the
    // slosh masses ride on lateral springs at their rest offsets.
    MatX M = MatX::Zero(nd, nd), K = MatX::Zero(nd, nd);
    M.block<3, 3>(0, 0) = mG * Mat3::Identity();
    Mat3 Jp = params.body.J_Gbar;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 rb = rest_offset_from_Gbar(params, i);
        Jp -= params.pendulums[i].m_P * skew(rb) * skew(rb);
    }
    M.block<3, 3>(3, 3) = Jp;
    for (std::size_t i = 0; i < n; ++i) {
        const PendulumDef& p = params.pendulums[i];
        const Vec3 rb = rest_offset_from_Gbar(params, i);
        const double xb = rb.x(), yb = rb.y(), zb = rb.z();
        const double Nz = (p.m_P / mG) * cfg.Fz_bar;
        const std::size_t it = 6 + 2 * i, ip = 7 + 2 * i;
        M(0, it) = p.m_P; M(1, ip) = p.m_P;
        M(3, ip) = -p.m_P * zb; M(5, it) = -p.m_P * yb;
        M(4, it) = p.m_P * zb; M(5, ip) = p.m_P * xb;
        M(it, 0) = p.m_P; M(ip, 1) = p.m_P;
        M(it, 4) = p.m_P * zb; M(it, 5) = -p.m_P * yb;
        M(ip, 3) = -p.m_P * zb; M(ip, 5) = p.m_P * xb;
        M(it, it) = p.m_P; M(ip, ip) = p.m_P;
        K(3, ip) = Nz; K(4, it) = -Nz;
        K(it, 4) = -Nz; K(it, it) = k[i];
        K(ip, 3) = Nz; K(ip, ip) = k[i];
    }
    if (cfg.force_frame == ForceFrame::Body)
        K.block<3, 3>(0, 3) += cfg.Fz_bar * skew(Vec3::UnitZ());

    // Modal change of coordinates: eta_x = sqrt(m)·(dx - s·dthy),
    // eta_y = sqrt(m)·(dy + s·dthx) with shift s = N_z_bar/k, plus the
    // matching row operations and scaling.
    MatX Sm = MatX::Identity(nd, nd), Tm = MatX::Identity(nd, nd);
    for (std::size_t i = 0; i < n; ++i) {
        const PendulumDef& p = params.pendulums[i];
        const double Nz = (p.m_P / mG) * cfg.Fz_bar;
        const double s = Nz / k[i];
        const double sm = std::sqrt(p.m_P);
        const std::size_t it = 6 + 2 * i, ip = 7 + 2 * i;
        Tm(it, it) = 1.0 / sm; Tm(it, 4) = s;
        Tm(ip, ip) = 1.0 / sm; Tm(ip, 3) = -s;
        Sm(4, it) = s; Sm(3, ip) = -s;
        Sm(it, it) = 1.0 / sm; Sm(ip, ip) = 1.0 / sm;
    }

    LinearModel m;
    m.M = Sm * M * Tm;
    m.K = Sm * K * Tm;
    m.D = MatX::Zero(nd, nd);
    m.labels = rigid_labels();
    for (std::size_t i = 0; i < n; ++i) {
        m.labels.push_back("eta_x_" + std::to_string(i + 1));
        m.labels.push_back("eta_y_" + std::to_string(i + 1));
        m.L.push_back(m.M.block<2, 6>(6 + 2 * i, 0));
    }
    m.B_f = input_map(nd);
    return m;
}

std::vector<Eigen::Matrix<double, 3, 6>> zero_g_participation(
    const RigParams& params) {
    std::vector<Eigen::Matrix<double, 3, 6>> out;
    for (std::size_t i = 0; i < params.pendulums.size(); ++i) {
        const Vec3 rb = rest_offset_from_Gbar(params, i);
        Eigen::Matrix<double, 3, 6> L;
        L.leftCols<3>() = Mat3::Identity();
        L.rightCols<3>() = -skew(rb);
        out.push_back(std::sqrt(params.pendulums[i].m_P) * L);
    }
    return out;
}

}  // namespace sloshsim
