#ifndef BILINEAR_ID_STABILITY_HPP
#define BILINEAR_ID_STABILITY_HPP

// Mean-square stability of a bilinear system under Gaussian inputs.
//
// With u_t ~ N(0, sigma_u^2 I) the second moment evolves as
//   vec(E[x_{t+1} x_{t+1}^T]) = At vec(E[x_t x_t^T]) + sigma_w^2 vec(I),
//   At = A_0 kron A_0 + sigma_u^2 sum_k A_k kron A_k,
// and the system is mean-square stable iff rho(At) < 1.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "bilinear_id/errors.hpp"
#include "bilinear_id/linalg.hpp"
#include "bilinear_id/model.hpp"

namespace bilinear_id {

/// The n^2 x n^2 augmented state matrix for Gaussian inputs.
inline Matrix augmented_matrix(const BilinearSystem& sys, double sigma_u) {
    if (!(sigma_u > 0.0)) {
        throw ParameterError("augmented_matrix: sigma_u must be positive");
    }
    Matrix out = kron(sys.A(0), sys.A(0));
    const double s2 = sigma_u * sigma_u;
    for (Eigen::Index k = 1; k <= sys.m(); ++k) {
        const Matrix& a = sys.A(static_cast<std::size_t>(k));
        out += s2 * kron(a, a);
    }
    return out;
}

inline double augmented_spectral_radius(const BilinearSystem& sys, double sigma_u) {
    return spectral_radius(augmented_matrix(sys, sigma_u)).value;
}

struct StabilityProfile {
    double rho_tilde = 0.0;
    /// Empirical transient constant max_{t <= horizon} ||At^t|| / rho^t, at least 1.
    double c_tilde_hat = 1.0;
    int horizon_used = 0;
    /// False when the Gelfand iteration did not settle.
    bool converged = true;
};

inline constexpr double kRhoFloor = 1e-12;

/// rho(At) and the empirical transient constant of At over 0..horizon.
///
/// Powers are accumulated as (At / rho)^t so no overflow or underflow occurs
/// for rho far from one.
inline StabilityProfile stability_profile_of(const Matrix& atilde, int horizon) {
    if (horizon < 1) {
        throw ParameterError("stability_profile: horizon must be at least 1");
    }
    const SpectralRadius sr = spectral_radius(atilde);
    StabilityProfile out;
    out.rho_tilde = sr.value;
    out.converged = sr.converged;
    out.horizon_used = horizon;

    const double rho = std::max(sr.value, kRhoFloor);
    const Matrix scaled = atilde / rho;
    Matrix power = Matrix::Identity(atilde.rows(), atilde.cols());
    double best = 1.0;  // t = 0
    for (int t = 1; t <= horizon; ++t) {
        power = scaled * power;
        const double norm = spectral_norm(power);
        if (!std::isfinite(norm)) {
            best = norm;
            break;
        }
        best = std::max(best, norm);
    }
    out.c_tilde_hat = std::max(best, 1.0);
    return out;
}

inline StabilityProfile stability_profile(const BilinearSystem& sys, double sigma_u, int horizon) {
    return stability_profile_of(augmented_matrix(sys, sigma_u), horizon);
}

struct SigmaUMaxOptions {
    double tolerance = 1e-8;
    /// Above this the bound is reported as unbounded.
    double cap = 1e6;
};

/// Largest sigma_u with rho(At(sigma_u)) <= 1; nullopt when unbounded up to the cap.
///
/// rho(At(sigma_u)) is nondecreasing in sigma_u, so the boundary is bracketed
/// by doubling and then bisected. Throws InfeasibleError if rho(A_0 kron A_0) > 1.
inline std::optional<double> sigma_u_max(const BilinearSystem& sys, SigmaUMaxOptions opts = {}) {
    if (!(opts.tolerance > 0.0)) {
        throw ParameterError("sigma_u_max: tolerance must be positive");
    }
    const double base = spectral_radius(kron(sys.A(0), sys.A(0))).value;
    if (base > 1.0) {
        throw InfeasibleError("sigma_u_max: rho(A_0 kron A_0) = " + std::to_string(base) +
                              " > 1, no admissible sigma_u");
    }
    auto stable = [&](double s) { return augmented_spectral_radius(sys, s) <= 1.0; };

    double lo = 0.0;
    double hi = 1.0;
    while (stable(hi)) {
        lo = hi;
        hi *= 2.0;
        if (lo >= opts.cap) {
            return std::nullopt;
        }
    }
    while (hi - lo >= opts.tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (stable(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// E[x_t x_t^T] from E[x_0 x_0^T] by t applications of the moment recursion.
inline Matrix covariance_recursion(const BilinearSystem& sys, double sigma_u, double sigma_w,
                                   const Matrix& sigma0, int t) {
    const Eigen::Index n = sys.n();
    if (sigma0.rows() != n || sigma0.cols() != n) {
        throw SizeError("covariance_recursion: Sigma0 must be " + std::to_string(n) + "x" +
                        std::to_string(n));
    }
    if (t < 0) {
        throw ParameterError("covariance_recursion: t must be nonnegative");
    }
    if (!(sigma_w >= 0.0)) {
        throw ParameterError("covariance_recursion: sigma_w must be nonnegative");
    }
    const Matrix atilde = augmented_matrix(sys, sigma_u);
    const Vector drive = (sigma_w * sigma_w) * vec(Matrix::Identity(n, n));
    Vector v = vec(sigma0);
    for (int i = 0; i < t; ++i) {
        v = atilde * v + drive;
    }
    Matrix out = mtx(v, n, n);
    return 0.5 * (out + out.transpose());
}

/// Upper bound on E||x_t||^2:
///   C rho^t sqrt(n) E||x_0||^2 + sigma_w^2 n sum_{i<t} C rho^i.
inline double second_moment_bound(const StabilityProfile& profile, double expected_x0_sq,
                                  double sigma_w, Eigen::Index n, int t) {
    if (t < 0) {
        throw ParameterError("second_moment_bound: t must be nonnegative");
    }
    const double c = profile.c_tilde_hat;
    const double rho = profile.rho_tilde;
    double geometric = 0.0;
    if (rho == 1.0) {
        geometric = static_cast<double>(t);
    } else {
        geometric = (1.0 - std::pow(rho, t)) / (1.0 - rho);
    }
    const double dn = static_cast<double>(n);
    return c * std::pow(rho, t) * std::sqrt(dn) * expected_x0_sq +
           sigma_w * sigma_w * dn * c * geometric;
}

}  // namespace bilinear_id

#endif  // BILINEAR_ID_STABILITY_HPP
