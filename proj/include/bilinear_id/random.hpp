#ifndef BILINEAR_ID_RANDOM_HPP
#define BILINEAR_ID_RANDOM_HPP

// Counter-based Gaussian streams.
//
// A stream is identified by a 64-bit key derived from a seed and any
// number of integer labels (trial, time step, role, ...). Draw i of a
// stream depends only on (key, i), so trajectories do not change when the
// order in which streams are consumed changes.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

#include "bilinear_id/linalg.hpp"

namespace bilinear_id {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// Labels for the independent draws of one simulation step.
enum class StreamRole : std::uint64_t {
    initial_state = 1,
    input = 2,
    noise = 3,
    system = 4,
    trial = 5,
    config = 6,
    direction = 7,
    filtration = 8,
    sample = 9,
};

/// Hash a seed and a list of labels into a substream key.
inline std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> labels) noexcept {
    std::uint64_t h = mix64(seed + kGoldenGamma);
    for (std::uint64_t label : labels) {
        h = mix64(h ^ mix64(label + kGoldenGamma));
        h += kGoldenGamma;
    }
    return mix64(h);
}

inline std::uint64_t derive_key(std::uint64_t seed, StreamRole role,
                                std::initializer_list<std::uint64_t> labels = {}) noexcept {
    std::uint64_t h = derive_key(seed, {static_cast<std::uint64_t>(role)});
    return labels.size() == 0 ? h : derive_key(h, labels);
}

/// Standard normal draws via Box-Muller over SplitMix64 counters.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t key) noexcept : key_(key) {}

    std::uint64_t key() const noexcept { return key_; }

    /// Uniform in (0, 1], 53 bits.
    double uniform() noexcept {
        const std::uint64_t bits = mix64(key_ + (++counter_) * kGoldenGamma);
        return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
    }

    double operator()() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double theta = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    Vector normals(Eigen::Index dim) {
        Vector v(dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            v(i) = (*this)();
        }
        return v;
    }

    Matrix normals(Eigen::Index rows, Eigen::Index cols) {
        Matrix m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j) {
            for (Eigen::Index i = 0; i < rows; ++i) {
                m(i, j) = (*this)();
            }
        }
        return m;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Uniformly distributed point on the unit sphere in R^dim.
inline Vector unit_sphere_sample(GaussianStream& g, Eigen::Index dim) {
    Vector v = g.normals(dim);
    double norm = v.norm();
    while (norm == 0.0) {
        v = g.normals(dim);
        norm = v.norm();
    }
    return v / norm;
}

}  // namespace bilinear_id

#endif  // BILINEAR_ID_RANDOM_HPP
