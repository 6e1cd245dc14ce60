#ifndef BILINEAR_ID_BMSB_HPP
#define BILINEAR_ID_BMSB_HPP

// Monte-Carlo checks of the block martingale small-ball condition (k = 1)
// for the lifted process xt_t = [1; u_t / sigma_u] kron x_t.
//
// For a unit direction v = [v_0; v_1; ...; v_m] (blocks of length n) and a
// fixed filtration state (x_j, u_j), with ub = u_{j+1} / sigma_u and
// V = [v_1 ... v_m],
//   Z = <v, xt_{j+1}> = <v_0 + V ub, A_star xt_j + w_{j+1}>.
// The small-ball event is |Z| >= c sigma_w ||v|| with c = 1/2, bounded below
// through E_u = {||v_0 + V ub|| >= c ||v||} and
// E_w = {|<q, A_star xt_j + w>| >= sigma_w ||q||}, q = v_0 + V ub.
//
// Every sample i draws ub first and then w from its own keyed substream, so
// checks sharing a seed see identical draws.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>

#include "bilinear_id/errors.hpp"
#include "bilinear_id/linalg.hpp"
#include "bilinear_id/model.hpp"
#include "bilinear_id/random.hpp"

namespace bilinear_id {

inline constexpr double kSmallBallLevel = 0.5;
inline constexpr double kSmallBallProbability = 9.0 / 320.0;
inline constexpr double kEventUProbability = 3.0 / 32.0;
inline constexpr double kEventWProbability = 3.0 / 10.0;
inline constexpr double kPaleyZygmundProbability = 3.0 / 16.0;
inline constexpr double kPaleyZygmundFraction = 0.25;

/// z quantile of the one-sided 99% normal bound.
inline constexpr double kZ99 = 2.3263478740408408;

inline constexpr std::size_t kMinConditioningSamples = 100;

struct ProportionEstimate {
    double probability = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
    std::size_t hits = 0;
};

inline ProportionEstimate make_proportion(std::size_t hits, std::size_t samples) {
    ProportionEstimate p;
    p.samples = samples;
    p.hits = hits;
    if (samples > 0) {
        const double n = static_cast<double>(samples);
        p.probability = static_cast<double>(hits) / n;
        p.std_error = std::sqrt(p.probability * (1.0 - p.probability) / n);
    }
    return p;
}

/// One-sided Wilson score lower bound.
inline double wilson_lower_bound(const ProportionEstimate& p, double z = kZ99) {
    if (p.samples == 0) {
        return 0.0;
    }
    const double n = static_cast<double>(p.samples);
    const double ph = p.probability;
    const double z2 = z * z;
    const double centre = ph + z2 / (2.0 * n);
    const double spread = z * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n));
    return (centre - spread) / (1.0 + z2 / n);
}

struct BmsbEstimate : ProportionEstimate {
    double threshold = 0.0;
    double lower_bound = 0.0;  // one-sided 99% Wilson bound
    bool passed = false;
};

/// Pass when p - 3 SE or the 99% Wilson lower bound reaches the threshold.
inline BmsbEstimate judge(const ProportionEstimate& p, double threshold) {
    BmsbEstimate out;
    static_cast<ProportionEstimate&>(out) = p;
    out.threshold = threshold;
    out.lower_bound = wilson_lower_bound(p);
    out.passed = (p.probability - 3.0 * p.std_error >= threshold) || (out.lower_bound >= threshold);
    return out;
}

struct DirectionBlocks {
    Vector v0;  // n
    Matrix V;   // n x m, column k-1 is v_k
};

inline DirectionBlocks split_direction(const Vector& v, Eigen::Index n) {
    if (n < 1 || v.size() % n != 0 || v.size() / n < 2) {
        throw SizeError("split_direction: length " + std::to_string(v.size()) +
                        " is not n(m+1) with n = " + std::to_string(n) + ", m >= 1");
    }
    const Eigen::Index m = v.size() / n - 1;
    DirectionBlocks out{v.head(n), Matrix(n, m)};
    for (Eigen::Index k = 0; k < m; ++k) {
        out.V.col(k) = v.segment((k + 1) * n, n);
    }
    return out;
}

namespace detail {

inline void require_unit(const Vector& v, const char* who) {
    if (std::abs(v.norm() - 1.0) > 1e-10) {
        throw ParameterError(std::string(who) + ": direction must have unit norm");
    }
}

inline void require_samples(std::size_t samples, const char* who) {
    if (samples == 0) {
        throw ParameterError(std::string(who) + ": samples must be positive");
    }
}

inline GaussianStream sample_stream(std::uint64_t seed, std::size_t i) {
    return GaussianStream(derive_key(seed, StreamRole::sample, {static_cast<std::uint64_t>(i)}));
}

/// Conditional mean A_star xt_j of x_{j+1} given the filtration state.
inline Vector conditional_mean(const BilinearSystem& sys, const NoiseParams& noise, const Vector& x_j,
                               const Vector& u_j) {
    if (x_j.size() != sys.n() || u_j.size() != sys.m()) {
        throw SizeError("bmsb: filtration state dimensions do not match the system");
    }
    return a_star(sys, noise.sigma_u()) * lift_state(x_j, u_j, noise.sigma_u());
}

}  // namespace detail

/// P(|<v, xt_{j+1}>| >= sigma_w / 2 | F_j) against 9/320.
inline BmsbEstimate bmsb_check(const BilinearSystem& sys, const NoiseParams& noise, const Vector& x_j,
                               const Vector& u_j, const Vector& v, std::size_t samples,
                               std::uint64_t seed) {
    if (!(noise.sigma_w() > 0.0)) {
        throw ParameterError("bmsb_check: sigma_w = 0 makes the small-ball bound vacuous");
    }
    detail::require_samples(samples, "bmsb_check");
    detail::require_unit(v, "bmsb_check");
    if (v.size() != sys.n() * (sys.m() + 1)) {
        throw SizeError("bmsb_check: direction must have length n(m+1)");
    }
    const DirectionBlocks blocks = split_direction(v, sys.n());
    const Vector mean = detail::conditional_mean(sys, noise, x_j, u_j);
    const double level = kSmallBallLevel * noise.sigma_w() * v.norm();

    std::size_t hits = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        GaussianStream g = detail::sample_stream(seed, i);
        const Vector ub = g.normals(sys.m());
        const Vector next = mean + noise.sigma_w() * g.normals(sys.n());
        const double z = (blocks.v0 + blocks.V * ub).dot(next);
        hits += std::abs(z) >= level ? 1 : 0;
    }
    return judge(make_proportion(hits, samples), kSmallBallProbability);
}

/// P(||v_0 + V ub|| >= ||v|| / 2) over ub ~ N(0, I_m), against 3/32.
inline BmsbEstimate event_u_check(const Vector& v, Eigen::Index n, std::size_t samples,
                                  std::uint64_t seed) {
    detail::require_samples(samples, "event_u_check");
    detail::require_unit(v, "event_u_check");
    const DirectionBlocks blocks = split_direction(v, n);
    const double level = kSmallBallLevel * v.norm();
    std::size_t hits = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        GaussianStream g = detail::sample_stream(seed, i);
        const Vector ub = g.normals(blocks.V.cols());
        hits += (blocks.v0 + blocks.V * ub).norm() >= level ? 1 : 0;
    }
    return judge(make_proportion(hits, samples), kEventUProbability);
}

/// P(E_w | E_u) against 3/10, counting only draws where E_u holds.
inline BmsbEstimate event_w_given_u_check(const BilinearSystem& sys, const NoiseParams& noise,
                                          const Vector& x_j, const Vector& u_j, const Vector& v,
                                          std::size_t samples, std::uint64_t seed) {
    if (!(noise.sigma_w() > 0.0)) {
        throw ParameterError("event_w_given_u_check: sigma_w = 0 makes the bound vacuous");
    }
    detail::require_samples(samples, "event_w_given_u_check");
    detail::require_unit(v, "event_w_given_u_check");
    if (v.size() != sys.n() * (sys.m() + 1)) {
        throw SizeError("event_w_given_u_check: direction must have length n(m+1)");
    }
    const DirectionBlocks blocks = split_direction(v, sys.n());
    const Vector mean = detail::conditional_mean(sys, noise, x_j, u_j);
    const double u_level = kSmallBallLevel * v.norm();

    std::size_t conditioned = 0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        GaussianStream g = detail::sample_stream(seed, i);
        const Vector ub = g.normals(sys.m());
        const Vector q = blocks.v0 + blocks.V * ub;
        const double qn = q.norm();
        if (qn < u_level) {
            continue;
        }
        ++conditioned;
        const Vector next = mean + noise.sigma_w() * g.normals(sys.n());
        hits += std::abs(q.dot(next)) >= noise.sigma_w() * qn ? 1 : 0;
    }
    if (conditioned < kMinConditioningSamples) {
        throw InsufficientDataError("event_w_given_u_check: only " + std::to_string(conditioned) +
                                    " draws satisfy the conditioning event");
    }
    return judge(make_proportion(hits, conditioned), kEventWProbability);
}

/// P(||V ub||^2 >= ||V||_F^2 / 4) against 3/16.
inline BmsbEstimate paley_zygmund_check(const Matrix& V, std::size_t samples, std::uint64_t seed) {
    detail::require_samples(samples, "paley_zygmund_check");
    const double frob2 = V.squaredNorm();
    if (!(frob2 > 0.0)) {
        throw ParameterError("paley_zygmund_check: V must be nonzero");
    }
    const double level = kPaleyZygmundFraction * frob2;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        GaussianStream g = detail::sample_stream(seed, i);
        hits += (V * g.normals(V.cols())).squaredNorm() >= level ? 1 : 0;
    }
    return judge(make_proportion(hits, samples), kPaleyZygmundProbability);
}

struct MomentReport {
    double second_moment = 0.0;  // E||V ub||^2
    double second_se = 0.0;
    double second_target = 0.0;  // ||V||_F^2
    bool second_passed = false;  // within 4 SE of the target

    double fourth_moment = 0.0;  // E||V ub||^4
    double fourth_se = 0.0;
    double fourth_bound = 0.0;   // 3 ||V||_F^4
    bool fourth_passed = false;  // below the bound plus 4 SE

    std::size_t samples = 0;
    bool passed() const { return second_passed && fourth_passed; }
};

/// Monte-Carlo E||V ub||^2 = ||V||_F^2 and E||V ub||^4 <= 3 ||V||_F^4.
inline MomentReport moment_identities_check(const Matrix& V, std::size_t samples, std::uint64_t seed) {
    if (samples < 2) {
        throw ParameterError("moment_identities_check: need at least two samples");
    }
    const double frob2 = V.squaredNorm();
    if (!(frob2 > 0.0)) {
        throw ParameterError("moment_identities_check: V must be nonzero");
    }
    double s2 = 0.0, s2sq = 0.0, s4 = 0.0, s4sq = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        GaussianStream g = detail::sample_stream(seed, i);
        const double r2 = (V * g.normals(V.cols())).squaredNorm();
        const double r4 = r2 * r2;
        s2 += r2;
        s2sq += r2 * r2;
        s4 += r4;
        s4sq += r4 * r4;
    }
    const double n = static_cast<double>(samples);
    auto se = [n](double sum, double sumsq) {
        const double mean = sum / n;
        const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
        return std::sqrt(var / n);
    };
    MomentReport r;
    r.samples = samples;
    r.second_moment = s2 / n;
    r.second_se = se(s2, s2sq);
    r.second_target = frob2;
    r.second_passed = std::abs(r.second_moment - frob2) <= 4.0 * r.second_se;
    r.fourth_moment = s4 / n;
    r.fourth_se = se(s4, s4sq);
    r.fourth_bound = 3.0 * frob2 * frob2;
    r.fourth_passed = r.fourth_moment <= r.fourth_bound + 4.0 * r.fourth_se;
    return r;
}

/// P(<V^T v_0, ub> >= 0); one half by rotational invariance.
inline ProportionEstimate sign_symmetry_check(const Vector& v, Eigen::Index n, std::size_t samples,
                                              std::uint64_t seed) {
    detail::require_samples(samples, "sign_symmetry_check");
    const DirectionBlocks blocks = split_direction(v, n);
    const Vector g0 = blocks.V.transpose() * blocks.v0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        GaussianStream g = detail::sample_stream(seed, i);
        hits += g0.dot(g.normals(blocks.V.cols())) >= 0.0 ? 1 : 0;
    }
    return make_proportion(hits, samples);
}

}  // namespace bilinear_id

#endif  // BILINEAR_ID_BMSB_HPP
