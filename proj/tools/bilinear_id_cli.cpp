// Command-line front end for the bilinear identification library.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bilinear_id/bilinear_id.hpp"

namespace bid = bilinear_id;

namespace {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw bid::Error("cannot open '" + path + "' for reading");
    return in;
}

/// Writes to `path`, or to stdout when the path is empty or "-".
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw bid::Error("cannot open '" + path + "' for writing");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

bid::BilinearSystem load_system(const std::string& path) {
    auto in = open_input(path);
    return bid::read_system(in);
}

bid::ExperimentConfig load_config(const std::string& path) {
    if (path.empty()) return bid::ExperimentConfig{};
    auto in = open_input(path);
    return bid::parse_config(in);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Least-squares identification of bilinear dynamical systems"};
    app.require_subcommand(1);

    // generate-system
    auto* gen = app.add_subcommand("generate-system", "Random system with prescribed spectral radii");
    long long gen_n = 8, gen_m = 4;
    double gen_rho0 = 0.6, gen_rhok = 0.25;
    std::uint64_t gen_seed = 1;
    std::string gen_out;
    gen->add_option("-n", gen_n, "State dimension")->capture_default_str();
    gen->add_option("-m", gen_m, "Input dimension")->capture_default_str();
    gen->add_option("--rho0", gen_rho0, "Spectral radius of A_0")->capture_default_str();
    gen->add_option("--rhok", gen_rhok, "Spectral radius of each A_k")->capture_default_str();
    gen->add_option("--seed", gen_seed, "Seed")->capture_default_str();
    gen->add_option("-o,--output", gen_out, "System file (default stdout)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Simulate one trajectory to CSV");
    std::string sim_system, sim_out;
    long long sim_T = 1000;
    double sim_su = 1.0, sim_sw = 0.3;
    std::uint64_t sim_seed = 1;
    sim->add_option("-s,--system", sim_system, "System file")->required();
    sim->add_option("-T", sim_T, "Number of regression rows T")->capture_default_str();
    sim->add_option("--sigma-u", sim_su, "Input standard deviation")->capture_default_str();
    sim->add_option("--sigma-w", sim_sw, "Noise standard deviation")->capture_default_str();
    sim->add_option("--seed", sim_seed, "Seed")->capture_default_str();
    sim->add_option("-o,--output", sim_out, "Trajectory CSV (default stdout)");

    // identify
    auto* ident = app.add_subcommand("identify", "Estimate {A_k} from a trajectory CSV");
    std::string id_traj, id_out, id_truth;
    double id_su = 1.0, id_delta = bid::kDefaultDelta;
    std::optional<double> id_sw;
    int id_horizon = 200;
    ident->add_option("-t,--trajectory", id_traj, "Trajectory CSV")->required();
    ident->add_option("--sigma-u", id_su, "Input standard deviation used to simulate")->required();
    ident->add_option("-o,--output", id_out, "Write the estimate as a system file");
    ident->add_option("--truth", id_truth, "True system file, enables error metrics");
    ident->add_option("--sigma-w", id_sw, "Noise std, enables the sample-complexity report (needs --truth)");
    ident->add_option("--delta", id_delta, "Failure probability for the report")->capture_default_str();
    ident->add_option("--horizon", id_horizon, "Horizon for the transient constant")->capture_default_str();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run a (sigma, T, trial) sweep to rows CSV");
    std::string sw_config, sw_out, sw_summary, sw_system;
    unsigned sw_workers = 0;
    sweep->add_option("-c,--config", sw_config, "Config file (defaults when omitted)");
    sweep->add_option("-o,--output", sw_out, "Rows CSV (default stdout)");
    sweep->add_option("--summary", sw_summary, "Per-group mean/sd/median CSV of the composite error");
    sweep->add_option("--system", sw_system, "Use this system instead of generating one");
    sweep->add_option("--workers", sw_workers, "Worker threads (0 = hardware concurrency)");

    // stability
    auto* stab = app.add_subcommand("stability", "rho(At) per sigma_u as CSV");
    std::string st_system, st_out;
    std::vector<double> st_sigmas{0.3, 0.6, 1.0, 1.2, 1.5};
    stab->add_option("-s,--system", st_system, "System file")->required();
    stab->add_option("--sigma-u", st_sigmas, "Input standard deviations")->delimiter(',')->capture_default_str();
    stab->add_option("-o,--output", st_out, "CSV (default stdout)");

    // bmsb
    auto* bmsb = app.add_subcommand("bmsb", "Monte-Carlo small-ball checks to report CSV");
    std::string bm_config, bm_out;
    long long bm_configs = 20;
    std::size_t bm_samples = 100000;
    unsigned bm_workers = 0;
    bmsb->add_option("-c,--config", bm_config, "Config file (defaults when omitted)");
    bmsb->add_option("--configurations", bm_configs, "Random configurations per sweep value")->capture_default_str();
    bmsb->add_option("--samples", bm_samples, "Samples per check")->capture_default_str();
    bmsb->add_option("--workers", bm_workers, "Worker threads (0 = hardware concurrency)");
    bmsb->add_option("-o,--output", bm_out, "Report CSV (default stdout)");

    // sigma-u-max
    auto* smax = app.add_subcommand("sigma-u-max", "Largest sigma_u keeping rho(At) <= 1");
    std::string sm_system;
    double sm_tol = 1e-8;
    smax->add_option("-s,--system", sm_system, "System file")->required();
    smax->add_option("--tol", sm_tol, "Bisection tolerance")->capture_default_str();

    // default-config
    auto* defcfg = app.add_subcommand("default-config", "Print the default experiment config");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            Output out(gen_out);
            bid::write_system(out.stream(), bid::generate_system(gen_n, gen_m, gen_rho0, gen_rhok, gen_seed));
        } else if (*sim) {
            const auto sys = load_system(sim_system);
            const auto traj = bid::simulate(sys, bid::NoiseParams(sim_su, sim_sw), sim_T, sim_seed);
            Output out(sim_out);
            bid::write_trajectory_csv(out.stream(), traj);
        } else if (*ident) {
            auto in = open_input(id_traj);
            const auto traj = bid::read_trajectory_csv(in, bid::NoiseParams(id_su, 0.0));
            auto est = bid::estimate(traj);
            std::cout << "T = " << traj.horizon() << '\n'
                      << "n = " << traj.n() << '\n'
                      << "m = " << traj.m() << '\n'
                      << "design_condition = " << bid::format_double(est.design_condition) << '\n'
                      << "residual_norm = " << bid::format_double(est.residual_norm) << '\n';
            if (!id_truth.empty()) {
                const auto truth = load_system(id_truth);
                est = bid::error_metrics(std::move(est), truth);
                for (std::size_t k = 0; k < est.A_hat.size(); ++k) {
                    std::cout << "spectral_error_" << k << " = "
                              << bid::format_double((*est.spectral_errors)[k]) << '\n';
                }
                std::cout << "err0_normalized = " << bid::format_double(est.err0_normalized()) << '\n'
                          << "errk_avg_normalized = " << bid::format_double(est.errk_avg_normalized()) << '\n'
                          << "composite_error = " << bid::format_double(*est.composite_error) << '\n';
                if (id_sw) {
                    const auto profile = bid::stability_profile(truth, id_su, id_horizon);
                    const double ex0 = traj.states.col(0).squaredNorm();
                    const auto report =
                        bid::bound_report(profile, ex0, *id_sw, traj.n(), traj.m(), traj.horizon(), id_delta);
                    std::cout << "rho_atilde = " << bid::format_double(profile.rho_tilde) << '\n'
                              << "c_atilde_hat = " << bid::format_double(profile.c_tilde_hat) << '\n'
                              << "gamma_bar = " << bid::format_double(report.gamma_bar) << '\n'
                              << "T_delta = " << bid::format_double(report.T_delta) << '\n'
                              << "predicted_error = " << bid::format_double(report.predicted_error) << '\n'
                              << "feasible = " << (report.feasible ? "true" : "false") << '\n';
                }
            } else if (id_sw) {
                throw bid::ParameterError("--sigma-w requires --truth");
            }
            if (!id_out.empty()) {
                Output out(id_out);
                bid::write_system(out.stream(), bid::BilinearSystem(est.A_hat));
            }
        } else if (*sweep) {
            const auto cfg = load_config(sw_config);
            const auto sys = sw_system.empty() ? bid::generate_system(cfg) : load_system(sw_system);
            const auto rows = bid::run_sweep(cfg, sys, sw_workers);
            {
                Output out(sw_out);
                bid::write_rows_csv(out.stream(), rows);
            }
            if (!sw_summary.empty()) {
                Output out(sw_summary);
                bid::write_summary_csv(out.stream(), bid::summarize(rows, bid::ErrorMetric::composite));
            }
            try {
                for (const auto& f : bid::fit_rate(rows)) {
                    std::cerr << "rate sigma_u=" << bid::format_double(f.sigma_u)
                              << " sigma_w=" << bid::format_double(f.sigma_w)
                              << " slope=" << bid::format_double(f.slope) << '\n';
                }
            } catch (const bid::InsufficientDataError& e) {
                std::cerr << "rate fit skipped: " << e.what() << '\n';
            }
        } else if (*stab) {
            const auto sys = load_system(st_system);
            Output out(st_out);
            bid::write_table1_csv(out.stream(), bid::table1_report(sys, st_sigmas));
        } else if (*bmsb) {
            const auto cfg = load_config(bm_config);
            const auto rows = bid::bmsb_suite(cfg, {bm_configs, bm_samples, bm_workers});
            {
                Output out(bm_out);
                bid::write_bmsb_csv(out.stream(), rows);
            }
            std::size_t failed = 0;
            for (const auto& r : rows) failed += r.status == "fail" ? 1 : 0;
            std::cerr << rows.size() << " checks, " << failed << " failed\n";
            return failed == 0 ? 0 : 2;
        } else if (*smax) {
            const auto sys = load_system(sm_system);
            const auto value = bid::sigma_u_max(sys, {sm_tol});
            std::cout << (value ? bid::format_double(*value) : std::string("unbounded")) << '\n';
        } else if (*defcfg) {
            bid::write_config(std::cout, bid::ExperimentConfig{});
        }
    } catch (const bid::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
