#include "sloshsim/csvio.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <vector>

namespace sloshsim {

std::string format_full(double x) {
    if (x == 0.0) x = 0.0;  // Canonicalize -0 so equal values print equally
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

/// Write one CSV row of full-precision numbers.
void write_row(std::ostream& os, const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) os << ',';
        os << format_full(values[i]);
    }
    os << '\n';
}

void write_matrix_block(std::ostream& os, const std::string& name,
                        const MatX& m) {
    os << name << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c > 0) os << ',';
            os << format_full(m(r, c));
        }
        os << '\n';
    }
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    const std::size_t n =
        traj.steps.empty() ? 0 : traj.steps.front().state.pend.size();

    os << "t,rx,ry,rz,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz";
    for (std::size_t i = 1; i <= n; ++i) {
        os << ",theta_" << i << ",phi_" << i << ",thetadot_" << i << ",phidot_"
           << i << ",N_" << i;
    }
    os << ",E,px,py,pz,Lx,Ly,Lz\n";

    std::vector<double> row;
    row.reserve(21 + 5 * n);
    for (const TrajectoryStep& step : traj.steps) {
        row.clear();
        row.push_back(step.t);
        for (int k = 0; k < 3; ++k) row.push_back(step.state.r(k));
        for (int k = 0; k < 3; ++k) row.push_back(step.state.v(k));
        for (int k = 0; k < 4; ++k) row.push_back(step.state.q(k));
        for (int k = 0; k < 3; ++k) row.push_back(step.state.omega(k));
        for (std::size_t i = 0; i < n; ++i) {
            row.push_back(step.state.pend[i].theta);
            row.push_back(step.state.pend[i].phi);
            row.push_back(step.state.pend[i].theta_dot);
            row.push_back(step.state.pend[i].phi_dot);
            row.push_back(step.tensions[i]);
        }
        row.push_back(step.diag.E);
        for (int k = 0; k < 3; ++k) row.push_back(step.diag.p(k));
        for (int k = 0; k < 3; ++k) row.push_back(step.diag.L_O(k));
        write_row(os, row);
    }
}

void write_linear_model(std::ostream& os, const LinearModel& model) {
    for (std::size_t i = 0; i < model.labels.size(); ++i) {
        if (i > 0) os << ',';
        os << model.labels[i];
    }
    os << '\n';
    write_matrix_block(os, "M", model.M);
    write_matrix_block(os, "D", model.D);
    write_matrix_block(os, "K", model.K);
    for (std::size_t i = 0; i < model.L.size(); ++i) {
        write_matrix_block(os, "L_" + std::to_string(i + 1), model.L[i]);
    }
}

void write_bode_csv(std::ostream& os, const BodeData& data,
                    const LinearModel& model) {
    static const char* kInputNames[6] = {"Fx", "Fy", "Fz", "Tx", "Ty", "Tz"};

    os << "omega_rad_s";
    for (int out : data.outputs) {
        for (int in : data.inputs) {
            os << ",mag_db_" << model.labels[static_cast<std::size_t>(out)] << '_'
               << kInputNames[in];
        }
    }
    os << '\n';

    for (std::size_t k = 0; k < data.omega.size(); ++k) {
        os << format_full(data.omega[k]);
        for (std::size_t r = 0; r < data.outputs.size(); ++r) {
            for (std::size_t c = 0; c < data.inputs.size(); ++c) {
                os << ',';
                if (!data.flagged[k]) os << format_full(data.mag_db(k, r, c));
            }
        }
        os << '\n';
    }
}

void write_modes_csv(std::ostream& os, const Eigenmodes& modes) {
    std::vector<std::pair<double, double>> vals;
    vals.reserve(static_cast<std::size_t>(modes.values.size()));
    for (Eigen::Index i = 0; i < modes.values.size(); ++i) {
        vals.emplace_back(modes.values(i).real(), modes.values(i).imag());
    }
    std::sort(vals.begin(), vals.end());

    os << "re,im\n";
    for (const auto& [re, im] : vals) {
        os << format_full(re) << ',' << format_full(im) << '\n';
    }
}

}  // namespace sloshsim
