#ifndef BILINEAR_ID_EXPERIMENT_HPP
#define BILINEAR_ID_EXPERIMENT_HPP

// Sweep harness: random system generation, (sigma, T, trial) sweeps,
// power-law rate fits and the small-ball check suite.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "bilinear_id/bmsb.hpp"
#include "bilinear_id/errors.hpp"
#include "bilinear_id/identification.hpp"
#include "bilinear_id/linalg.hpp"
#include "bilinear_id/model.hpp"
#include "bilinear_id/random.hpp"
#include "bilinear_id/stability.hpp"

namespace bilinear_id {

enum class SweepVariable { sigma_u, sigma_w };

inline std::vector<long long> log_spaced_horizons(long long first, long long last, int count) {
    std::vector<long long> out;
    for (int i = 0; i < count; ++i) {
        const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        const auto t = static_cast<long long>(
            std::llround(static_cast<double>(first) *
                         std::pow(static_cast<double>(last) / static_cast<double>(first), f)));
        if (out.empty() || t > out.back()) out.push_back(t);
    }
    return out;
}

struct ExperimentConfig {
    long long n = 8;
    long long m = 4;
    double rho0 = 0.6;
    double rhok = 0.25;
    SweepVariable sweep_variable = SweepVariable::sigma_u;
    std::vector<double> sweep_values{0.3, 0.6, 1.0, 1.2, 1.5};
    double fixed_sigma = 0.3;
    std::vector<long long> T_values = log_spaced_horizons(50, 5000, 10);
    long long repetitions = 20;
    std::uint64_t base_seed = 20230;
    double delta = kDefaultDelta;

    /// (sigma_u, sigma_w) for one entry of the sweep grid.
    std::pair<double, double> sigmas(double sweep_value) const {
        return sweep_variable == SweepVariable::sigma_u ? std::pair{sweep_value, fixed_sigma}
                                                        : std::pair{fixed_sigma, sweep_value};
    }

    void validate() const {
        if (n < 1 || m < 1) throw ParameterError("config: n and m must be positive");
        if (!(rho0 > 0.0) || !(rhok > 0.0)) throw ParameterError("config: rho0 and rhok must be positive");
        if (repetitions < 1) throw ParameterError("config: repetitions must be at least 1");
        if (sweep_values.empty()) throw ParameterError("config: sweep_values must be nonempty");
        for (double s : sweep_values) {
            const bool ok = sweep_variable == SweepVariable::sigma_u ? s > 0.0 : s >= 0.0;
            if (!ok || !std::isfinite(s)) {
                throw ParameterError("config: sweep_values must be positive (nonnegative for sigma_w)");
            }
        }
        if (T_values.empty()) throw ParameterError("config: T_values must be nonempty");
        for (std::size_t i = 0; i < T_values.size(); ++i) {
            if (T_values[i] < 1 || (i > 0 && T_values[i] <= T_values[i - 1])) {
                throw ParameterError("config: T_values must be positive and increasing");
            }
        }
        if (sweep_variable == SweepVariable::sigma_w) {
            if (!(fixed_sigma > 0.0)) throw ParameterError("config: fixed sigma_u must be positive");
        } else if (!(fixed_sigma >= 0.0)) {
            throw ParameterError("config: fixed sigma_w must be nonnegative");
        }
        if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("config: delta must lie in (0, 1)");
    }
};

enum class RowStatus { ok, rank_error, unstable_config };

inline const char* to_string(RowStatus s) {
    switch (s) {
        case RowStatus::ok: return "ok";
        case RowStatus::rank_error: return "rank_error";
        case RowStatus::unstable_config: return "unstable_config";
    }
    return "?";
}

struct ExperimentRow {
    long long trial = 0;
    long long T = 0;
    double sigma_u = 0.0;
    double sigma_w = 0.0;
    std::optional<double> err0_normalized;
    std::optional<double> errk_avg_normalized;
    std::optional<double> composite_error;
    std::optional<double> cond_xtilde;
    double rho_atilde = 0.0;
    std::optional<double> max_state_norm;
    std::uint64_t seed = 0;
    RowStatus status = RowStatus::ok;
};

/// Matrices with N(0,1) entries rescaled to spectral radius rho0 (k = 0) or rhok (k >= 1).
inline BilinearSystem generate_system(long long n, long long m, double rho0, double rhok,
                                      std::uint64_t seed) {
    if (n < 1 || m < 1) throw ParameterError("generate_system: n and m must be positive");
    if (!(rho0 > 0.0) || !(rhok > 0.0)) {
        throw ParameterError("generate_system: target spectral radii must be positive");
    }
    std::vector<Matrix> mats;
    for (long long k = 0; k <= m; ++k) {
        const double target = k == 0 ? rho0 : rhok;
        for (std::uint64_t attempt = 0;; ++attempt) {
            GaussianStream g(derive_key(seed, StreamRole::system,
                                        {static_cast<std::uint64_t>(k), attempt}));
            Matrix a = g.normals(n, n);
            const double rho = spectral_radius(a).value;
            if (rho >= 1e-12) {
                mats.push_back(a * (target / rho));
                break;
            }
        }
    }
    return BilinearSystem(std::move(mats));
}

inline BilinearSystem generate_system(const ExperimentConfig& cfg) {
    return generate_system(cfg.n, cfg.m, cfg.rho0, cfg.rhok,
                           derive_key(cfg.base_seed, StreamRole::system));
}

/// Seed of repetition `trial`; shared across sweep values and horizons.
inline std::uint64_t trial_seed(std::uint64_t base_seed, long long trial) {
    return derive_key(base_seed, StreamRole::trial, {static_cast<std::uint64_t>(trial)});
}

namespace detail {

/// Run job(i) for i in [0, count) on up to `workers` threads.
template <typename Job>
void parallel_for(std::size_t count, unsigned workers, Job&& job) {
    if (workers == 0) {
        workers = std::max(1u, std::thread::hardware_concurrency());
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) job(i);
        });
    }
}

}  // namespace detail

/// One row: simulate, estimate and score a single (sigma_u, sigma_w, T, trial).
inline ExperimentRow run_trial(const BilinearSystem& sys, double sigma_u, double sigma_w, long long T,
                               long long trial, std::uint64_t seed, double rho_atilde) {
    ExperimentRow row;
    row.trial = trial;
    row.T = T;
    row.sigma_u = sigma_u;
    row.sigma_w = sigma_w;
    row.seed = seed;
    row.rho_atilde = rho_atilde;
    if (rho_atilde > 1.0) {
        row.status = RowStatus::unstable_config;
        return row;
    }
    const Trajectory traj = simulate(sys, NoiseParams(sigma_u, sigma_w), T, seed, false);
    row.max_state_norm = traj.max_state_norm();
    try {
        const EstimationResult est = error_metrics(estimate(traj), sys);
        row.err0_normalized = est.err0_normalized();
        row.errk_avg_normalized = est.errk_avg_normalized();
        row.composite_error = est.composite_error;
        row.cond_xtilde = est.design_condition;
        row.status = RowStatus::ok;
    } catch (const RankError&) {
        row.status = RowStatus::rank_error;
    }
    return row;
}

/// Rows in (sweep value, T, trial) order, one fixed system per sweep.
inline std::vector<ExperimentRow> run_sweep(const ExperimentConfig& cfg, const BilinearSystem& sys,
                                            unsigned workers = 0) {
    cfg.validate();
    if (sys.n() != cfg.n || sys.m() != cfg.m) {
        throw SizeError("run_sweep: system dimensions do not match the config");
    }
    std::vector<double> rhos;
    for (double s : cfg.sweep_values) {
        rhos.push_back(augmented_spectral_radius(sys, cfg.sigmas(s).first));
    }
    const std::size_t nT = cfg.T_values.size();
    const auto reps = static_cast<std::size_t>(cfg.repetitions);
    const std::size_t total = cfg.sweep_values.size() * nT * reps;
    std::vector<ExperimentRow> rows(total);
    detail::parallel_for(total, workers, [&](std::size_t idx) {
        const std::size_t a = idx / (nT * reps);
        const std::size_t b = (idx / reps) % nT;
        const std::size_t r = idx % reps;
        const auto [su, sw] = cfg.sigmas(cfg.sweep_values[a]);
        const auto trial = static_cast<long long>(r);
        rows[idx] = run_trial(sys, su, sw, cfg.T_values[b], trial, trial_seed(cfg.base_seed, trial),
                              rhos[a]);
    });
    return rows;
}

inline std::vector<ExperimentRow> run_sweep(const ExperimentConfig& cfg, unsigned workers = 0) {
    cfg.validate();
    return run_sweep(cfg, generate_system(cfg), workers);
}

enum class ErrorMetric { composite, err0_normalized, errk_avg_normalized };

inline std::optional<double> metric_of(const ExperimentRow& row, ErrorMetric metric) {
    switch (metric) {
        case ErrorMetric::composite: return row.composite_error;
        case ErrorMetric::err0_normalized: return row.err0_normalized;
        case ErrorMetric::errk_avg_normalized: return row.errk_avg_normalized;
    }
    return std::nullopt;
}

inline double median(std::vector<double> xs) {
    if (xs.empty()) throw InsufficientDataError("median of empty sample");
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
    const double upper = xs[mid];
    if (xs.size() % 2 == 1) return upper;
    const double lower = *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

struct GroupSummary {
    double sigma_u = 0.0;
    double sigma_w = 0.0;
    long long T = 0;
    std::size_t ok = 0;
    std::size_t failed = 0;
    double mean = 0.0;
    double sd = 0.0;
    double median = 0.0;
};

/// Mean, sample SD and median of a metric per (sigma_u, sigma_w, T), over ok rows.
inline std::vector<GroupSummary> summarize(const std::vector<ExperimentRow>& rows, ErrorMetric metric) {
    std::map<std::tuple<double, double, long long>, std::pair<std::vector<double>, std::size_t>> groups;
    for (const ExperimentRow& row : rows) {
        auto& g = groups[{row.sigma_u, row.sigma_w, row.T}];
        const auto value = metric_of(row, metric);
        if (row.status == RowStatus::ok && value) {
            g.first.push_back(*value);
        } else {
            ++g.second;
        }
    }
    std::vector<GroupSummary> out;
    for (const auto& [key, data] : groups) {
        GroupSummary s;
        std::tie(s.sigma_u, s.sigma_w, s.T) = key;
        const auto& xs = data.first;
        s.ok = xs.size();
        s.failed = data.second;
        if (!xs.empty()) {
            double sum = 0.0;
            for (double x : xs) sum += x;
            s.mean = sum / static_cast<double>(xs.size());
            double ss = 0.0;
            for (double x : xs) ss += (x - s.mean) * (x - s.mean);
            s.sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
            s.median = median(xs);
        }
        out.push_back(s);
    }
    return out;
}

struct RateFit {
    double sigma_u = 0.0;
    double sigma_w = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t points = 0;
};

/// OLS slope of log(median error) against log T, per (sigma_u, sigma_w) group.
inline std::vector<RateFit> fit_rate(const std::vector<ExperimentRow>& rows,
                                     ErrorMetric metric = ErrorMetric::composite) {
    std::map<std::pair<double, double>, std::vector<std::pair<double, double>>> groups;
    for (const GroupSummary& s : summarize(rows, metric)) {
        if (s.ok == 0) continue;
        groups[{s.sigma_u, s.sigma_w}].emplace_back(std::log(static_cast<double>(s.T)),
                                                    std::log(s.median));
    }
    if (groups.empty()) {
        throw InsufficientDataError("fit_rate: no successful rows");
    }
    std::vector<RateFit> out;
    for (const auto& [key, pts] : groups) {
        if (pts.size() < 3) {
            throw InsufficientDataError("fit_rate: group needs at least 3 distinct T values, has " +
                                        std::to_string(pts.size()));
        }
        double mx = 0.0, my = 0.0;
        for (const auto& [x, y] : pts) {
            mx += x;
            my += y;
        }
        mx /= static_cast<double>(pts.size());
        my /= static_cast<double>(pts.size());
        double sxy = 0.0, sxx = 0.0;
        for (const auto& [x, y] : pts) {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
        RateFit f;
        f.sigma_u = key.first;
        f.sigma_w = key.second;
        f.slope = sxy / sxx;
        f.intercept = my - f.slope * mx;
        f.points = pts.size();
        out.push_back(f);
    }
    return out;
}

/// rho(At(sigma_u)) for each requested sigma_u.
inline std::vector<std::pair<double, double>> table1_report(const BilinearSystem& sys,
                                                            const std::vector<double>& sigma_u_values) {
    if (sigma_u_values.empty()) {
        throw ParameterError("table1_report: need at least one sigma_u");
    }
    std::vector<std::pair<double, double>> out;
    for (double s : sigma_u_values) {
        out.emplace_back(s, augmented_spectral_radius(sys, s));
    }
    return out;
}

struct BmsbReportRow {
    long long config = 0;
    double sigma_u = 0.0;
    double sigma_w = 0.0;
    std::string check;
    double estimate = 0.0;
    double std_error = 0.0;
    double threshold = 0.0;
    double lower_bound = 0.0;
    std::size_t samples = 0;
    std::string status;  // pass, fail or an error tag
};

/// A random (system, direction, filtration state) for the small-ball checks.
struct BmsbConfiguration {
    BilinearSystem sys;
    Vector v;
    Vector x_j;
    Vector u_j;
    long long j = 0;
    std::uint64_t seed = 0;
};

inline BmsbConfiguration make_bmsb_configuration(const ExperimentConfig& cfg, double sigma_u,
                                                 double sigma_w, std::uint64_t seed) {
    BilinearSystem sys = generate_system(cfg.n, cfg.m, cfg.rho0, cfg.rhok,
                                         derive_key(seed, StreamRole::system));
    GaussianStream dir(derive_key(seed, StreamRole::direction));
    Vector v = unit_sphere_sample(dir, cfg.n * (cfg.m + 1));
    GaussianStream pick(derive_key(seed, StreamRole::filtration));
    const auto j = static_cast<long long>(pick.uniform() * 20.0);  // j in [0, 20]
    const Trajectory traj = simulate(sys, NoiseParams(sigma_u, sigma_w), std::max(j, 1LL),
                                     derive_key(seed, StreamRole::trial), false);
    return BmsbConfiguration{std::move(sys), std::move(v), traj.states.col(j), traj.inputs.col(j), j, seed};
}

struct BmsbSuiteOptions {
    long long configurations = 20;
    std::size_t samples = 100000;
    unsigned workers = 0;
};

/// Small-ball checks on random configurations for every sweep value.
///
/// Each configuration yields rows for the small-ball probability, E_u,
/// E_w | E_u, the Paley-Zygmund event and the two moment identities.
inline std::vector<BmsbReportRow> bmsb_suite(const ExperimentConfig& cfg, BmsbSuiteOptions opts = {}) {
    cfg.validate();
    if (opts.configurations < 1 || opts.samples == 0) {
        throw ParameterError("bmsb_suite: configurations and samples must be positive");
    }
    const auto per_value = static_cast<std::size_t>(opts.configurations);
    const std::size_t total = cfg.sweep_values.size() * per_value;
    std::vector<std::vector<BmsbReportRow>> blocks(total);

    detail::parallel_for(total, opts.workers, [&](std::size_t idx) {
        const std::size_t a = idx / per_value;
        const std::size_t c = idx % per_value;
        const auto [su, sw] = cfg.sigmas(cfg.sweep_values[a]);
        const std::uint64_t seed =
            derive_key(cfg.base_seed, StreamRole::config, {static_cast<std::uint64_t>(a), c});
        const BmsbConfiguration conf = make_bmsb_configuration(cfg, su, sw, seed);
        const DirectionBlocks vb = split_direction(conf.v, conf.sys.n());
        const std::uint64_t sample_seed = derive_key(seed, StreamRole::sample);

        auto& out = blocks[idx];
        auto emit = [&](const std::string& check, const BmsbEstimate& e) {
            out.push_back({static_cast<long long>(idx), su, sw, check, e.probability, e.std_error,
                           e.threshold, e.lower_bound, e.samples, e.passed ? "pass" : "fail"});
        };
        auto emit_error = [&](const std::string& check, double threshold, const std::string& tag) {
            out.push_back({static_cast<long long>(idx), su, sw, check, 0.0, 0.0, threshold, 0.0, 0, tag});
        };

        if (sw > 0.0) {
            const NoiseParams noise(su, sw);
            emit("small_ball", bmsb_check(conf.sys, noise, conf.x_j, conf.u_j, conf.v, opts.samples,
                                          sample_seed));
        } else {
            emit_error("small_ball", kSmallBallProbability, "vacuous_bound");
        }
        emit("event_u", event_u_check(conf.v, conf.sys.n(), opts.samples, sample_seed));
        if (sw > 0.0) {
            const NoiseParams noise(su, sw);
            try {
                emit("event_w_given_u", event_w_given_u_check(conf.sys, noise, conf.x_j, conf.u_j,
                                                              conf.v, opts.samples, sample_seed));
            } catch (const InsufficientDataError&) {
                emit_error("event_w_given_u", kEventWProbability, "insufficient_conditioning");
            }
        } else {
            emit_error("event_w_given_u", kEventWProbability, "vacuous_bound");
        }
        emit("paley_zygmund", paley_zygmund_check(vb.V, opts.samples, sample_seed));

        const MomentReport mr = moment_identities_check(vb.V, opts.samples, sample_seed);
        out.push_back({static_cast<long long>(idx), su, sw, "second_moment", mr.second_moment,
                       mr.second_se, mr.second_target, 0.0, mr.samples,
                       mr.second_passed ? "pass" : "fail"});
        out.push_back({static_cast<long long>(idx), su, sw, "fourth_moment", mr.fourth_moment,
                       mr.fourth_se, mr.fourth_bound, 0.0, mr.samples,
                       mr.fourth_passed ? "pass" : "fail"});
    });

    std::vector<BmsbReportRow> rows;
    for (auto& b : blocks) {
        for (auto& r : b) rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace bilinear_id

#endif  // BILINEAR_ID_EXPERIMENT_HPP
