#ifndef BILINEAR_ID_LINALG_HPP
#define BILINEAR_ID_LINALG_HPP

// Dense kernels shared by the model, estimator and stability code.
//
// Matrices are Eigen column-major doubles. vec() stacks columns, so that
//   vec(A X B^T) = (B kron A) vec(X)
// holds literally, which is the form the second-moment recursion uses.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bilinear_id/errors.hpp"

namespace bilinear_id {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Largest Kronecker product (in elements) kron() will materialize.
inline constexpr std::size_t kDefaultKronElementCap = std::size_t{1} << 26;

/// Relative singular-value cutoff used for numerical rank.
inline constexpr double kDefaultRankTolerance = 1e-10;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    return m.allFinite();
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const std::string& what) {
    if (!m.allFinite()) {
        throw ParameterError(what + ": non-finite entry");
    }
}

/// Kronecker product; block (i,j) of the result is a(i,j) * b.
inline Matrix kron(const Matrix& a, const Matrix& b,
                   std::size_t element_cap = kDefaultKronElementCap) {
    const auto rows = static_cast<std::size_t>(a.rows()) * static_cast<std::size_t>(b.rows());
    const auto cols = static_cast<std::size_t>(a.cols()) * static_cast<std::size_t>(b.cols());
    if (rows != 0 && cols > element_cap / rows) {
        throw SizeError("kron: result of " + std::to_string(rows) + "x" + std::to_string(cols) +
                        " exceeds element cap " + std::to_string(element_cap));
    }
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

/// Column-stacking vectorization.
inline Vector vec(const Matrix& x) {
    return x.reshaped();
}

/// Inverse of vec(): reshape a length rows*cols vector column by column.
inline Matrix mtx(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
    if (rows < 0 || cols < 0 || v.size() != rows * cols) {
        throw SizeError("mtx: vector of length " + std::to_string(v.size()) +
                        " cannot be reshaped to " + std::to_string(rows) + "x" +
                        std::to_string(cols));
    }
    return v.reshaped(rows, cols);
}

/// Descending singular values. A zero matrix yields zeros.
inline Vector singular_values(const Matrix& a) {
    if (a.size() == 0) {
        return Vector{};
    }
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues();
}

/// sigma_max / sigma_min, or +inf when sigma_min is zero.
inline double condition_number(const Vector& singular) {
    if (singular.size() == 0) {
        return std::numeric_limits<double>::infinity();
    }
    const double smax = singular(0);
    const double smin = singular(singular.size() - 1);
    if (smin <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return smax / smin;
}

inline double spectral_norm(const Matrix& a) {
    if (a.size() == 0) {
        return 0.0;
    }
    return singular_values(a)(0);
}

struct LeastSquaresSolution {
    Matrix coefficients;  // d x n
    Vector singular;      // singular values of the design, descending
    std::size_t rank = 0;

    double condition() const { return condition_number(singular); }
};

/// Minimizes ||targets - design * X||_F over X by Householder QR.
///
/// The design's singular values are taken from the triangular factor R,
/// which shares them with the design. Throws UnderdeterminedError when
/// rows < cols and RankError when sigma_min < rtol * sigma_max.
inline LeastSquaresSolution lstsq_detailed(const Matrix& design, const Matrix& targets,
                                           double rtol = kDefaultRankTolerance) {
    if (design.rows() != targets.rows()) {
        throw SizeError("lstsq: design has " + std::to_string(design.rows()) +
                        " rows but targets have " + std::to_string(targets.rows()));
    }
    const auto d = static_cast<std::size_t>(design.cols());
    if (design.rows() < design.cols()) {
        throw UnderdeterminedError("lstsq: " + std::to_string(design.rows()) + " rows for " +
                                       std::to_string(d) + " unknowns",
                                   static_cast<std::size_t>(design.rows()), d);
    }
    Eigen::HouseholderQR<Matrix> qr(design);
    const Matrix r = qr.matrixQR().topRows(design.cols()).triangularView<Eigen::Upper>();

    LeastSquaresSolution out;
    out.singular = singular_values(r);
    const double smax = out.singular.size() > 0 ? out.singular(0) : 0.0;
    out.rank = static_cast<std::size_t>(
        (out.singular.array() > rtol * smax).count());
    if (smax == 0.0) {
        out.rank = 0;
    }
    if (out.rank < d) {
        throw RankError("lstsq: design is rank deficient (numerical rank " +
                            std::to_string(out.rank) + " of " + std::to_string(d) + ")",
                        out.rank, d);
    }
    out.coefficients = qr.solve(targets);
    return out;
}

inline Matrix lstsq(const Matrix& design, const Matrix& targets,
                    double rtol = kDefaultRankTolerance) {
    return lstsq_detailed(design, targets, rtol).coefficients;
}

struct SpectralRadius {
    double value = 0.0;
    /// Estimates ||A^(2^k)||^(1/2^k) for k = 0, 1, ...; the last entry is value.
    std::vector<double> refinements;
    bool converged = true;
};

inline constexpr int kDefaultGelfandIterations = 64;

/// Gelfand-formula estimate of rho(A) by repeated squaring.
///
/// Each squared iterate is rescaled to unit Frobenius norm and the log of
/// the scale is accumulated, so A^(2^k) itself is never formed. Iteration
/// stops once two consecutive estimates agree to ~1e-14 relative; if the
/// cap is reached while they still differ by more than 1e-6 * max(rho, 1)
/// the result is flagged as not converged.
inline SpectralRadius spectral_radius(const Matrix& a, int max_iterations = kDefaultGelfandIterations) {
    if (a.rows() != a.cols()) {
        throw SizeError("spectral_radius: matrix is " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()));
    }
    if (max_iterations < 1) {
        throw ParameterError("spectral_radius: iterations must be positive");
    }
    SpectralRadius out;
    if (a.size() == 0) {
        return out;
    }
    double norm = a.norm();
    if (norm == 0.0) {
        out.refinements.push_back(0.0);
        return out;
    }
    Matrix b = a / norm;
    double log_scale = std::log(norm);  // log ||A^(2^k)||_F after the k-th squaring
    double exponent = 1.0;
    out.refinements.push_back(norm);

    for (int k = 1; k <= max_iterations; ++k) {
        Matrix sq = b * b;
        const double c = sq.norm();
        if (c == 0.0) {
            out.refinements.push_back(0.0);
            out.value = 0.0;
            out.converged = true;
            return out;
        }
        b = sq / c;
        log_scale = 2.0 * log_scale + std::log(c);
        exponent *= 2.0;
        const double estimate = std::exp(log_scale / exponent);
        const double previous = out.refinements.back();
        out.refinements.push_back(estimate);
        if (std::abs(estimate - previous) <= 1e-14 * std::max(estimate, 1.0)) {
            break;
        }
    }
    const std::size_t last = out.refinements.size() - 1;
    out.value = out.refinements[last];
    const double change = std::abs(out.refinements[last] - out.refinements[last - 1]);
    out.converged = change <= 1e-6 * std::max(out.value, 1.0);
    return out;
}

}  // namespace bilinear_id

#endif  // BILINEAR_ID_LINALG_HPP
