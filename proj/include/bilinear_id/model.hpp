#ifndef BILINEAR_ID_MODEL_HPP
#define BILINEAR_ID_MODEL_HPP

// Bilinear state equation
//   x_{t+1} = A_0 x_t + sum_k u_t[k] A_k x_t + w_{t+1}
// together with its lifted linear-regression form
//   x_{t+1} = A_star xt_t + w_{t+1},  xt_t = [1; u_t / sigma_u] kron x_t,
//   A_star  = [A_0, sigma_u A_1, ..., sigma_u A_m].

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bilinear_id/errors.hpp"
#include "bilinear_id/linalg.hpp"
#include "bilinear_id/random.hpp"

namespace bilinear_id {

/// The matrices {A_0, ..., A_m}, each n x n.
class BilinearSystem {
public:
    explicit BilinearSystem(std::vector<Matrix> matrices) : matrices_(std::move(matrices)) {
        if (matrices_.size() < 2) {
            throw SizeError("BilinearSystem: need A_0 and at least one input matrix, got " +
                            std::to_string(matrices_.size()) + " matrices");
        }
        const Eigen::Index n = matrices_.front().rows();
        if (n < 1) {
            throw SizeError("BilinearSystem: state dimension must be positive");
        }
        for (std::size_t k = 0; k < matrices_.size(); ++k) {
            const Matrix& a = matrices_[k];
            if (a.rows() != n || a.cols() != n) {
                throw SizeError("BilinearSystem: A_" + std::to_string(k) + " is " +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                ", expected " + std::to_string(n) + "x" + std::to_string(n));
            }
            require_finite(a, "BilinearSystem: A_" + std::to_string(k));
        }
    }

    Eigen::Index n() const noexcept { return matrices_.front().rows(); }
    Eigen::Index m() const noexcept { return static_cast<Eigen::Index>(matrices_.size()) - 1; }

    const Matrix& A(std::size_t k) const { return matrices_.at(k); }
    const std::vector<Matrix>& matrices() const noexcept { return matrices_; }

    friend bool operator==(const BilinearSystem&, const BilinearSystem&) = default;

private:
    std::vector<Matrix> matrices_;
};

/// Input std sigma_u > 0 and process-noise std sigma_w >= 0.
///
/// sigma_w = 0 is admitted for noise-free diagnostics.
class NoiseParams {
public:
    NoiseParams(double sigma_u, double sigma_w) : sigma_u_(sigma_u), sigma_w_(sigma_w) {
        if (!(sigma_u > 0.0) || !std::isfinite(sigma_u)) {
            throw ParameterError("NoiseParams: sigma_u must be positive and finite");
        }
        if (!(sigma_w >= 0.0) || !std::isfinite(sigma_w)) {
            throw ParameterError("NoiseParams: sigma_w must be nonnegative and finite");
        }
    }

    double sigma_u() const noexcept { return sigma_u_; }
    double sigma_w() const noexcept { return sigma_w_; }

private:
    double sigma_u_;
    double sigma_w_;
};

/// A single trajectory x_0..x_{T+1}, u_0..u_T and optionally w_1..w_{T+1}.
struct Trajectory {
    Matrix states;                 // n x (T+2), column t is x_t
    Matrix inputs;                 // m x (T+1), column t is u_t
    std::optional<Matrix> noises;  // n x (T+1), column t is w_{t+1}
    std::uint64_t seed = 0;
    NoiseParams params{1.0, 0.0};

    /// Number of regression rows T.
    Eigen::Index horizon() const noexcept { return inputs.cols() - 1; }
    Eigen::Index n() const noexcept { return states.rows(); }
    Eigen::Index m() const noexcept { return inputs.rows(); }

    /// max_t ||x_t|| over t in [first, last] (inclusive, clamped to the record).
    double max_state_norm(Eigen::Index first = 0, Eigen::Index last = -1) const {
        if (last < 0 || last >= states.cols()) {
            last = states.cols() - 1;
        }
        double best = 0.0;
        for (Eigen::Index t = std::max<Eigen::Index>(first, 0); t <= last; ++t) {
            best = std::max(best, states.col(t).norm());
        }
        return best;
    }
};

/// One application of the state equation.
inline Vector step(const BilinearSystem& sys, const Vector& x, const Vector& u, const Vector& w) {
    if (x.size() != sys.n() || w.size() != sys.n() || u.size() != sys.m()) {
        throw SizeError("step: expected x, w of size " + std::to_string(sys.n()) +
                        " and u of size " + std::to_string(sys.m()));
    }
    Vector next = sys.A(0) * x;
    for (Eigen::Index k = 0; k < sys.m(); ++k) {
        next.noalias() += u(k) * (sys.A(static_cast<std::size_t>(k) + 1) * x);
    }
    next += w;
    return next;
}

/// Key of the stream that draws u_t for a trajectory seed.
inline std::uint64_t input_stream_key(std::uint64_t seed, std::uint64_t t) {
    return derive_key(seed, StreamRole::input, {t});
}

/// Key of the stream that draws w_t for a trajectory seed.
inline std::uint64_t noise_stream_key(std::uint64_t seed, std::uint64_t t) {
    return derive_key(seed, StreamRole::noise, {t});
}

/// Simulate T+1 steps from x0 with u_t ~ N(0, sigma_u^2 I), w_t ~ N(0, sigma_w^2 I).
inline Trajectory simulate(const BilinearSystem& sys, const NoiseParams& noise, const Vector& x0,
                           Eigen::Index T, std::uint64_t seed, bool record_noise = true) {
    if (T < 1) {
        throw ParameterError("simulate: T must be at least 1");
    }
    if (x0.size() != sys.n()) {
        throw SizeError("simulate: x0 has size " + std::to_string(x0.size()) + ", expected " +
                        std::to_string(sys.n()));
    }
    const Eigen::Index n = sys.n();
    const Eigen::Index m = sys.m();
    Trajectory traj{Matrix(n, T + 2), Matrix(m, T + 1), std::nullopt, seed, noise};
    Matrix noises(n, T + 1);
    traj.states.col(0) = x0;
    for (Eigen::Index t = 0; t <= T; ++t) {
        const auto tt = static_cast<std::uint64_t>(t);
        GaussianStream input_stream(input_stream_key(seed, tt));
        Vector u = noise.sigma_u() * input_stream.normals(m);
        Vector w = Vector::Zero(n);
        if (noise.sigma_w() > 0.0) {
            GaussianStream noise_stream(noise_stream_key(seed, tt + 1));
            w = noise.sigma_w() * noise_stream.normals(n);
        }
        traj.states.col(t + 1) = step(sys, traj.states.col(t), u, w);
        traj.inputs.col(t) = u;
        noises.col(t) = w;
    }
    if (record_noise) {
        traj.noises = std::move(noises);
    }
    return traj;
}

/// Default initial state x_0 ~ N(0, I_n) drawn from the seed's own substream.
inline Vector default_initial_state(Eigen::Index n, std::uint64_t seed) {
    GaussianStream g(derive_key(seed, StreamRole::initial_state));
    return g.normals(n);
}

inline Trajectory simulate(const BilinearSystem& sys, const NoiseParams& noise, Eigen::Index T,
                           std::uint64_t seed, bool record_noise = true) {
    return simulate(sys, noise, default_initial_state(sys.n(), seed), T, seed, record_noise);
}

/// xt = [1; u / sigma_u] kron x.
inline Vector lift_state(const Vector& x, const Vector& u, double sigma_u) {
    if (!(sigma_u > 0.0)) {
        throw ParameterError("lift_state: sigma_u must be positive");
    }
    const Eigen::Index n = x.size();
    Vector out(n * (u.size() + 1));
    out.head(n) = x;
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        out.segment((k + 1) * n, n) = (u(k) / sigma_u) * x;
    }
    return out;
}

/// [A_0, sigma_u A_1, ..., sigma_u A_m], n x n(m+1).
inline Matrix a_star(const BilinearSystem& sys, double sigma_u) {
    if (!(sigma_u > 0.0)) {
        throw ParameterError("a_star: sigma_u must be positive");
    }
    const Eigen::Index n = sys.n();
    Matrix out(n, n * (sys.m() + 1));
    out.leftCols(n) = sys.A(0);
    for (Eigen::Index k = 1; k <= sys.m(); ++k) {
        out.middleCols(k * n, n) = sigma_u * sys.A(static_cast<std::size_t>(k));
    }
    return out;
}

struct RegressionBlocks {
    Matrix design;   // T x n(m+1), row t-1 is xt_t^T for t = 1..T
    Matrix targets;  // T x n,      row t-1 is x_{t+1}^T
};

/// Stack the lifted states xt_1..xt_T and next states x_2..x_{T+1}.
inline RegressionBlocks regression_blocks(const Trajectory& traj) {
    const Eigen::Index T = traj.horizon();
    if (T < 1) {
        throw SizeError("regression_blocks: trajectory has no regression rows");
    }
    const Eigen::Index n = traj.n();
    const Eigen::Index m = traj.m();
    RegressionBlocks out{Matrix(T, n * (m + 1)), Matrix(T, n)};
    for (Eigen::Index t = 1; t <= T; ++t) {
        out.design.row(t - 1) =
            lift_state(traj.states.col(t), traj.inputs.col(t), traj.params.sigma_u()).transpose();
        out.targets.row(t - 1) = traj.states.col(t + 1).transpose();
    }
    return out;
}

/// Noise rows w_2..w_{T+1} matching regression_blocks; requires recorded noise.
inline Matrix regression_noise(const Trajectory& traj) {
    if (!traj.noises) {
        throw ParameterError("regression_noise: trajectory has no recorded noise");
    }
    const Eigen::Index T = traj.horizon();
    return traj.noises->middleCols(1, T).transpose();
}

}  // namespace bilinear_id

#endif  // BILINEAR_ID_MODEL_HPP
