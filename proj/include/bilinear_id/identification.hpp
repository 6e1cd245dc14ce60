#ifndef BILINEAR_ID_IDENTIFICATION_HPP
#define BILINEAR_ID_IDENTIFICATION_HPP

// Least-squares identification of {A_k} from one trajectory, error
// metrics, and the sample-complexity / error-rate calculator.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "bilinear_id/errors.hpp"
#include "bilinear_id/linalg.hpp"
#include "bilinear_id/model.hpp"
#include "bilinear_id/stability.hpp"

namespace bilinear_id {

struct EstimationResult {
    std::vector<Matrix> A_hat;  // m+1 matrices, n x n
    Matrix a_star_hat;          // n x n(m+1), the raw regression coefficients transposed
    double sigma_u = 1.0;
    double design_condition = 0.0;
    double residual_norm = 0.0;

    // Filled by error_metrics().
    std::optional<std::vector<double>> spectral_errors;
    std::optional<std::vector<double>> normalized_errors;
    /// normalized_errors[k] holds the absolute error because ||A_k|| == 0.
    std::vector<bool> normalization_skipped;
    std::optional<double> composite_error;

    Eigen::Index n() const { return A_hat.front().rows(); }
    Eigen::Index m() const { return static_cast<Eigen::Index>(A_hat.size()) - 1; }

    /// ||Ah_0 - A_0|| / ||A_0||.
    double err0_normalized() const { return normalized_errors.value().front(); }

    /// (1/m) sum_{k>=1} ||Ah_k - A_k|| / ||A_k||.
    double errk_avg_normalized() const {
        const auto& e = normalized_errors.value();
        double sum = 0.0;
        for (std::size_t k = 1; k < e.size(); ++k) {
            sum += e[k];
        }
        return sum / static_cast<double>(e.size() - 1);
    }
};

/// Split [M_0, M_1, ..., M_m] into {M_0, M_1 / sigma_u, ..., M_m / sigma_u}.
inline std::vector<Matrix> unpack(const Matrix& concat, double sigma_u) {
    if (!(sigma_u > 0.0)) {
        throw ParameterError("unpack: sigma_u must be positive");
    }
    const Eigen::Index n = concat.rows();
    if (n < 1 || concat.cols() % n != 0 || concat.cols() / n < 2) {
        throw SizeError("unpack: " + std::to_string(concat.rows()) + "x" +
                        std::to_string(concat.cols()) + " is not n x n(m+1) with m >= 1");
    }
    const Eigen::Index blocks = concat.cols() / n;
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(blocks));
    out.emplace_back(concat.leftCols(n));
    for (Eigen::Index k = 1; k < blocks; ++k) {
        out.emplace_back(concat.middleCols(k * n, n) / sigma_u);
    }
    return out;
}

/// Least-squares estimate of {A_k} from a trajectory with known sigma_u.
///
/// Requires T >= n(m+1) regression rows and a full-rank lifted design.
inline EstimationResult estimate(const Trajectory& traj) {
    const Eigen::Index n = traj.n();
    const Eigen::Index m = traj.m();
    const Eigen::Index unknowns = n * (m + 1);
    const Eigen::Index T = traj.horizon();
    if (T < unknowns) {
        throw UnderdeterminedError("estimate: T = " + std::to_string(T) + " < n(m+1) = " +
                                       std::to_string(unknowns),
                                   static_cast<std::size_t>(std::max<Eigen::Index>(T, 0)),
                                   static_cast<std::size_t>(unknowns));
    }
    const RegressionBlocks blocks = regression_blocks(traj);
    const LeastSquaresSolution sol = lstsq_detailed(blocks.design, blocks.targets);

    EstimationResult out;
    out.sigma_u = traj.params.sigma_u();
    out.a_star_hat = sol.coefficients.transpose();
    out.A_hat = unpack(out.a_star_hat, out.sigma_u);
    out.design_condition = sol.condition();
    out.residual_norm = (blocks.targets - blocks.design * sol.coefficients).norm();
    return out;
}

/// Spectral, normalized and composite errors against the true system.
///
/// The composite error is max{||Ah_0 - A_0||, sigma_u ||Ah_k - A_k||}.
inline EstimationResult error_metrics(EstimationResult result, const BilinearSystem& truth) {
    if (static_cast<Eigen::Index>(result.A_hat.size()) != truth.m() + 1 ||
        result.A_hat.front().rows() != truth.n()) {
        throw SizeError("error_metrics: estimate and truth dimensions differ");
    }
    std::vector<double> spectral;
    std::vector<double> normalized;
    std::vector<bool> skipped;
    double composite = 0.0;
    for (std::size_t k = 0; k < result.A_hat.size(); ++k) {
        const double err = spectral_norm(result.A_hat[k] - truth.A(k));
        const double scale = spectral_norm(truth.A(k));
        spectral.push_back(err);
        if (scale > 0.0) {
            normalized.push_back(err / scale);
            skipped.push_back(false);
        } else {
            normalized.push_back(err);
            skipped.push_back(true);
        }
        composite = std::max(composite, k == 0 ? err : result.sigma_u * err);
    }
    result.spectral_errors = std::move(spectral);
    result.normalized_errors = std::move(normalized);
    result.normalization_skipped = std::move(skipped);
    result.composite_error = composite;
    return result;
}

struct BoundReport {
    double T_delta = 0.0;
    double gamma_bar = 0.0;
    Eigen::Index T = 0;
    double delta = 0.05;
    /// sqrt(T_delta / T); the absolute constant of the bound is not included.
    double predicted_error = 0.0;
    bool feasible = false;
};

inline constexpr double kDefaultDelta = 0.05;

/// T_delta = n(m+1) + log(12 gamma_bar / (sigma_w^2 delta)) + log(3 / delta).
inline double sample_complexity(Eigen::Index n, Eigen::Index m, double delta, double gamma_bar,
                                double sigma_w) {
    if (n < 1 || m < 1) {
        throw ParameterError("sample_complexity: n and m must be positive");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw ParameterError("sample_complexity: delta must lie in (0, 1)");
    }
    if (!(gamma_bar > 0.0) || !(sigma_w > 0.0)) {
        throw ParameterError("sample_complexity: gamma_bar and sigma_w must be positive");
    }
    const double dof = static_cast<double>(n * (m + 1));
    return dof + std::log(12.0 * gamma_bar / (sigma_w * sigma_w * delta)) + std::log(3.0 / delta);
}

/// C (sqrt(n) E||x_0||^2 + sigma_w^2 n T)(m+1), with C the profile's transient constant.
inline double gamma_bar(const StabilityProfile& profile, double expected_x0_sq, double sigma_w,
                        Eigen::Index n, Eigen::Index m, Eigen::Index T) {
    if (T < 1) {
        throw ParameterError("gamma_bar: T must be at least 1");
    }
    const double dn = static_cast<double>(n);
    return profile.c_tilde_hat *
           (std::sqrt(dn) * expected_x0_sq + sigma_w * sigma_w * dn * static_cast<double>(T)) *
           static_cast<double>(m + 1);
}

inline double predicted_rate(double T_delta, double T) {
    if (!(T > 0.0)) {
        throw ParameterError("predicted_rate: T must be positive");
    }
    return std::sqrt(T_delta / T);
}

inline BoundReport bound_report(const StabilityProfile& profile, double expected_x0_sq,
                                double sigma_w, Eigen::Index n, Eigen::Index m, Eigen::Index T,
                                double delta = kDefaultDelta) {
    BoundReport r;
    r.T = T;
    r.delta = delta;
    r.gamma_bar = gamma_bar(profile, expected_x0_sq, sigma_w, n, m, T);
    r.T_delta = sample_complexity(n, m, delta, r.gamma_bar, sigma_w);
    r.predicted_error = predicted_rate(r.T_delta, static_cast<double>(T));
    r.feasible = static_cast<double>(T) >= r.T_delta;
    return r;
}

}  // namespace bilinear_id

#endif  // BILINEAR_ID_IDENTIFICATION_HPP
