#include <sloshsim/freq.hpp>

#include <sloshsim/dynamics.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <sstream>

namespace sloshsim {

std::vector<double> FreqGrid::omegas() const {
    if (!(wmin > 0.0) || !(wmax > wmin))
        throw std::invalid_argument(
            "FreqGrid: need 0 < wmin < wmax");
    if (points < 2)
        throw std::invalid_argument("FreqGrid: need at least 2 points");
    std::vector<double> w(points);
    const double lmin = std::log10(wmin), lmax = std::log10(wmax);
    for (int k = 0; k < points; ++k)
        w[k] = std::pow(10.0, lmin + (lmax - lmin) * k / (points - 1));
    return w;
}

double BodeData::mag_db(std::size_t k, std::size_t row, std::size_t col) const {
    return 20.0 * std::log10(std::abs(gain.at(k)(row, col)));
}

Eigen::MatrixXcd second_order_gain(const LinearModel& model, double omega,
                                   double* cond_out) {
    const std::complex<double> jw(0.0, omega);
    const Eigen::MatrixXcd A =
        (-omega * omega) * model.M + jw * model.D + model.K;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinU |
                                                  Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    const double cond = smin > 0.0 ? smax / smin
                                   : std::numeric_limits<double>::infinity();
    if (cond_out) *cond_out = cond;
    if (!(cond < kResonanceCondLimit)) {
        std::ostringstream os;
        os << "dynamic stiffness near-singular at omega = " << omega
           << " rad/s (condition " << cond << ")";
        throw NumericalError(os.str());
    }
    return svd.solve(model.B_f.cast<std::complex<double>>());
}

BodeData bode_sweep(const LinearModel& model, const std::vector<int>& inputs,
                    const std::vector<int>& outputs, const FreqGrid& grid) {
    if (inputs.empty() || outputs.empty())
        throw std::invalid_argument("bode_sweep: empty channel selection");
    const int dim = static_cast<int>(model.dim());
    for (int j : inputs)
        if (j < 0 || j >= 6)
            throw std::invalid_argument("bode_sweep: input index out of range");
    for (int j : outputs)
        if (j < 0 || j >= dim)
            throw std::invalid_argument("bode_sweep: output index out of range");

    BodeData data;
    data.omega = grid.omegas();
    data.inputs = inputs;
    data.outputs = outputs;
    data.gain.reserve(data.omega.size());
    data.flagged.reserve(data.omega.size());
    for (double w : data.omega) {
        Eigen::MatrixXcd sel(outputs.size(), inputs.size());
        bool flag = false;
        try {
            const Eigen::MatrixXcd G = second_order_gain(model, w);
            for (std::size_t r = 0; r < outputs.size(); ++r)
                for (std::size_t c = 0; c < inputs.size(); ++c)
                    sel(r, c) = G(outputs[r], inputs[c]);
        } catch (const NumericalError&) {
            sel.setZero();
            flag = true;
        }
        data.gain.push_back(std::move(sel));
        data.flagged.push_back(flag);
    }
    return data;
}

Eigenmodes eigenmodes(const LinearModel& model) {
    const auto nd = model.M.rows();
    Eigen::PartialPivLU<MatX> lu(model.M);
    if (!(lu.rcond() > 1e-14))
        throw NumericalError("eigenmodes: singular mass matrix");
    MatX A = MatX::Zero(2 * nd, 2 * nd);
    A.topRightCorner(nd, nd).setIdentity();
    A.bottomLeftCorner(nd, nd) = -lu.solve(model.K);
    A.bottomRightCorner(nd, nd) = -lu.solve(model.D);
    Eigen::EigenSolver<MatX> es(A);
    Eigenmodes out;
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors();
    return out;
}

namespace {

/// Residual F(x, xd, xdd_bar) = M(x)·xdd_bar - u(x, xd) of the nominal-CoM
/// model, in the physical linear coordinates.
VecX fd_residual(const RigParams& params, const NominalConfig& cfg,
                 const Vec3& g_I, const VecX& dx, const VecX& dxd,
                 const VecX& xdd_bar) {
    const std::size_t n = params.pendulums.size();
    SystemState st;
    st.r = dx.head<3>();
    st.v = dxd.head<3>();
    st.q = quat_from_rotvec(dx.segment<3>(3));
    st.omega = dxd.segment<3>(3);
    st.pend.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        st.pend[i].theta = dx(6 + 2 * i);
        st.pend[i].phi = dx(7 + 2 * i);
        st.pend[i].theta_dot = dxd(6 + 2 * i);
        st.pend[i].phi_dot = dxd(7 + 2 * i);
    }
    ExternalInputs in;
    in.F = Vec3(0, 0, cfg.Fz_bar);
    in.frame = cfg.force_frame;
    in.tau_B = Vec3::Zero();
    in.g_I = g_I;
    const AssembledSystem sys = assemble_comG(st, params, in);
    return sys.M * xdd_bar - sys.u;
}

struct FdMatrices {
    MatX D, K;
};

FdMatrices fd_differentiate(const RigParams& params, const NominalConfig& cfg,
                            const Vec3& g_I, const FdSettings& s,
                            double step_scale) {
    const std::size_t n = params.pendulums.size();
    const std::size_t nd = 6 + 2 * n;
    VecX xdd_bar = VecX::Zero(nd);
    xdd_bar.head<3>() = nominal_accel(cfg, params, g_I);
    const VecX zero = VecX::Zero(nd);

    FdMatrices out{MatX::Zero(nd, nd), MatX::Zero(nd, nd)};
    for (std::size_t j = 0; j < nd; ++j) {
        const double h = (j < 3 ? s.h_pos : s.h_ang) * step_scale;
        VecX e = VecX::Zero(nd);
        e(j) = h;
        out.K.col(j) = (fd_residual(params, cfg, g_I, e, zero, xdd_bar) -
                        fd_residual(params, cfg, g_I, -e, zero, xdd_bar)) /
                       (2.0 * h);
        const double hr = s.h_rate * step_scale;
        e(j) = hr;
        out.D.col(j) = (fd_residual(params, cfg, g_I, zero, e, xdd_bar) -
                        fd_residual(params, cfg, g_I, zero, -e, xdd_bar)) /
                       (2.0 * hr);
    }
    return out;
}

}  // namespace

LinearModel fd_linearize(const RigParams& params, const NominalConfig& cfg,
                         const Vec3& g_I, const FdSettings& settings) {
    const std::size_t n = params.pendulums.size();
    const std::size_t nd = 6 + 2 * n;

    FdMatrices fd = fd_differentiate(params, cfg, g_I, settings, 1.0);
    if (settings.verify_steps) {
        const FdMatrices half = fd_differentiate(params, cfg, g_I, settings, 0.5);
        const double scale = std::max(1.0, fd.K.cwiseAbs().maxCoeff());
        const double dK = (fd.K - half.K).cwiseAbs().maxCoeff() / scale;
        const double scaleD = std::max(1.0, fd.D.cwiseAbs().maxCoeff());
        const double dD = (fd.D - half.D).cwiseAbs().maxCoeff() / scaleD;
        if (dK > 1e-5 || dD > 1e-5) {
            std::ostringstream os;
            os << "fd_linearize: step-halving disagreement (K " << dK
               << ", D " << dD << "); differentiation step unresolved";
            throw NumericalError(os.str());
        }
    }

    // The residual is linear in accelerations, so the mass matrix is exact:
    // read it off the assembly at the nominal state.
    SystemState st0;
    st0.pend.resize(n);
    ExternalInputs in;
    in.F = Vec3(0, 0, cfg.Fz_bar);
    in.frame = cfg.force_frame;
    in.g_I = g_I;
    const AssembledSystem sys0 = assemble_comG(st0, params, in);

    LinearModel m;
    m.M = sys0.M;
    m.D = std::move(fd.D);
    m.K = std::move(fd.K);
    m.labels = {"dx", "dy", "dz", "dthx", "dthy", "dthz"};
    for (std::size_t i = 0; i < n; ++i) {
        m.labels.push_back("theta_" + std::to_string(i + 1));
        m.labels.push_back("phi_" + std::to_string(i + 1));
    }
    m.B_f = MatX::Zero(nd, 6);
    m.B_f.topLeftCorner(6, 6).setIdentity();
    return m;
}

}  // namespace sloshsim
