// Command-line interface: simulate, linearize, bode, modes, check
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "sloshsim/checks.hpp"
#include "sloshsim/csvio.hpp"
#include "sloshsim/dynamics.hpp"
#include "sloshsim/freq.hpp"
#include "sloshsim/linmodel.hpp"
#include "sloshsim/propagate.hpp"
#include "sloshsim/scenario.hpp"

namespace {

using namespace sloshsim;

std::ofstream open_output(const std::string& path) {
    std::ofstream os(path);
    if (!os) {
        throw ConfigError("cannot open output file '" + path + "'");
    }
    return os;
}

/// Nominal point from the scenario, overridden by --fz / --frame when given.
NominalConfig resolve_nominal(const Scenario& sc, bool fz_given, double fz,
                              const std::string& frame) {
    NominalConfig cfg;
    if (sc.nominal) {
        cfg = *sc.nominal;
    } else if (!fz_given) {
        sc.require_nominal();  // Throws with a pointer at the missing section.
    }
    if (fz_given) cfg.Fz_bar = fz;
    if (!frame.empty()) {
        cfg.force_frame =
            frame == "body" ? ForceFrame::Body : ForceFrame::Inertial;
    }
    return cfg;
}

/// Modal coordinate labels without going through the modal builder, so the
/// FD route stays available for rigs the analytic builder rejects.
std::vector<std::string> modal_labels(std::size_t n) {
    std::vector<std::string> labels = {"dx", "dy", "dz", "dthx", "dthy", "dthz"};
    for (std::size_t i = 1; i <= n; ++i) {
        labels.push_back("eta_theta_" + std::to_string(i));
        labels.push_back("eta_phi_" + std::to_string(i));
    }
    return labels;
}

/// The second-order model a frequency command operates on: the analytic
/// modal builder, or the finite-difference linearization carried into the
/// same modal coordinates so both sources are channel-for-channel
/// comparable.
LinearModel freq_model(const Scenario& sc, const NominalConfig& cfg,
                       const std::string& source) {
    if (source == "analytic") {
        return build_modal(sc.rig, cfg).first;
    }
    const LinearModel fd = fd_linearize(sc.rig, cfg, sc.inputs.g_I);
    const auto [S, T] = modal_transform_matrices(sc.rig);
    LinearModel model;
    model.M = S * fd.M * T;
    model.D = S * fd.D * T;
    model.K = S * fd.K * T;
    model.B_f = fd.B_f;  // Row operations leave the input map [I6; 0] intact.
    model.labels = modal_labels(sc.rig.n_pend());
    return model;
}

int run_simulate(const std::string& config, const std::string& out) {
    const Scenario sc = parse_scenario(config);
    const Trajectory traj = propagate(sc.rig, sc.inputs, sc.initial, sc.sim);
    std::ofstream os = open_output(out);
    write_trajectory_csv(os, traj);
    return 0;
}

int run_linearize(const std::string& config, const std::string& out,
                  const std::string& form, const std::string& frame,
                  bool fz_given, double fz) {
    const Scenario sc = parse_scenario(config);
    const NominalConfig cfg = resolve_nominal(sc, fz_given, fz, frame);
    const LinearModel model = form == "physical"
                                  ? build_physical_single(sc.rig, cfg)
                                  : build_modal(sc.rig, cfg).first;
    std::ofstream os = open_output(out);
    write_linear_model(os, model);
    return 0;
}

int run_bode(const std::string& config, const std::string& out,
             const std::string& source, const std::string& frame,
             bool fz_given, double fz, const FreqGrid& grid) {
    const Scenario sc = parse_scenario(config);
    const NominalConfig cfg = resolve_nominal(sc, fz_given, fz, frame);
    const LinearModel model = freq_model(sc, cfg, source);

    std::vector<int> inputs = {0, 1, 2, 3, 4, 5};
    std::vector<int> outputs;
    for (std::size_t i = 0; i < model.dim(); ++i) {
        outputs.push_back(static_cast<int>(i));
    }
    const BodeData data = bode_sweep(model, inputs, outputs, grid);
    std::ofstream os = open_output(out);
    write_bode_csv(os, data, model);
    return 0;
}

int run_modes(const std::string& config, const std::string& out,
              const std::string& frame, bool fz_given, double fz) {
    const Scenario sc = parse_scenario(config);
    const NominalConfig cfg = resolve_nominal(sc, fz_given, fz, frame);
    const LinearModel model = build_modal(sc.rig, cfg).first;
    const Eigenmodes modes = eigenmodes(model);
    std::ofstream os = open_output(out);
    write_modes_csv(os, modes);
    return 0;
}

int run_check(const std::string& config) {
    const Scenario sc = parse_scenario(config);
    const RunReport report = run_checks(sc);
    print_report(std::cout, report);
    if (!report.all_passed()) {
        std::cout << "result: FAIL\n";
        return 3;
    }
    std::cout << "result: PASS\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Propellant-slosh dynamics: rigid hub with spherical-pendulum tanks"};
    app.require_subcommand(1);

    std::string config, out;
    std::string frame, form = "modal", source = "analytic";
    double fz = 0.0;
    FreqGrid grid;

    CLI::App* sim = app.add_subcommand(
        "simulate", "Propagate a scenario and write the trajectory CSV");
    sim->add_option("config", config, "Scenario JSON file")->required();
    sim->add_option("-o,--output", out, "Output CSV path")->required();

    CLI::App* lin = app.add_subcommand(
        "linearize", "Write the linearized M/D/K/L matrices about the nominal");
    lin->add_option("config", config, "Scenario JSON file")->required();
    lin->add_option("-o,--output", out, "Output matrix file path")->required();
    lin->add_option("--frame", frame, "Nominal force frame")
        ->check(CLI::IsMember({"inertial", "body"}));
    CLI::Option* lin_fz =
        lin->add_option("--fz", fz, "Nominal longitudinal force [N]");
    lin->add_option("--form", form, "Coordinate form")
        ->check(CLI::IsMember({"modal", "physical"}));

    CLI::App* bode = app.add_subcommand(
        "bode", "Sweep the frequency response and write magnitudes in dB");
    bode->add_option("config", config, "Scenario JSON file")->required();
    bode->add_option("-o,--output", out, "Output CSV path")->required();
    bode->add_option("--wmin", grid.wmin, "Lower frequency bound [rad/s]");
    bode->add_option("--wmax", grid.wmax, "Upper frequency bound [rad/s]");
    bode->add_option("--points", grid.points, "Grid point count");
    bode->add_option("--source", source, "Matrix source")
        ->check(CLI::IsMember({"analytic", "fd"}));
    bode->add_option("--frame", frame, "Nominal force frame")
        ->check(CLI::IsMember({"inertial", "body"}));
    CLI::Option* bode_fz =
        bode->add_option("--fz", fz, "Nominal longitudinal force [N]");

    CLI::App* modes = app.add_subcommand(
        "modes", "Write companion-form eigenvalues of the modal model");
    modes->add_option("config", config, "Scenario JSON file")->required();
    modes->add_option("-o,--output", out, "Output CSV path")->required();
    modes->add_option("--frame", frame, "Nominal force frame")
        ->check(CLI::IsMember({"inertial", "body"}));
    CLI::Option* modes_fz =
        modes->add_option("--fz", fz, "Nominal longitudinal force [N]");

    CLI::App* check = app.add_subcommand(
        "check", "Run the self-validation suite against a scenario");
    check->add_option("config", config, "Scenario JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) return run_simulate(config, out);
        if (lin->parsed()) {
            return run_linearize(config, out, form, frame,
                                 lin_fz->count() > 0, fz);
        }
        if (bode->parsed()) {
            return run_bode(config, out, source, frame, bode_fz->count() > 0,
                            fz, grid);
        }
        if (modes->parsed()) {
            return run_modes(config, out, frame, modes_fz->count() > 0, fz);
        }
        if (check->parsed()) return run_check(config);
    } catch (const SingularityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const ModelError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
