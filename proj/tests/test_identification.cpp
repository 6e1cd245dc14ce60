#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "bilinear_id/identification.hpp"
#include "bilinear_id/model.hpp"
#include "bilinear_id/random.hpp"

namespace bid = bilinear_id;
using bid::Matrix;
using bid::Vector;

namespace {

bid::BilinearSystem random_system(std::uint64_t seed, Eigen::Index n, Eigen::Index m, double scale = 0.4) {
    bid::GaussianStream g(seed);
    std::vector<Matrix> mats;
    for (Eigen::Index k = 0; k <= m; ++k) {
        mats.push_back(scale / std::sqrt(static_cast<double>(n)) * g.normals(n, n));
    }
    return bid::BilinearSystem(std::move(mats));
}

double norm2(const Matrix& a) {
    return bid::spectral_norm(a);
}

}  // namespace

TEST(Estimate, NoiseFreeRecoversExactly) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Eigen::Index n = 3 + static_cast<Eigen::Index>(seed % 3), m = 2;
        const auto sys = random_system(10 + seed, n, m);
        const auto traj = bid::simulate(sys, bid::NoiseParams(1.1, 0.0), 3 * n * (m + 1), 20 + seed);
        const auto est = bid::estimate(traj);
        for (std::size_t k = 0; k < est.A_hat.size(); ++k) {
            EXPECT_LT(norm2(est.A_hat[k] - sys.A(k)), 1e-8) << "seed " << seed << " k " << k;
        }
        EXPECT_LT(est.residual_norm, 1e-8);
    }
}

TEST(Estimate, UnderdeterminedIsError) {
    const auto sys = random_system(1, 3, 2);
    const auto traj = bid::simulate(sys, bid::NoiseParams(1.0, 0.1), 3 * 3 - 1, 2);
    EXPECT_THROW(bid::estimate(traj), bid::UnderdeterminedError);
    try {
        bid::estimate(traj);
    } catch (const bid::RankError& e) {
        EXPECT_EQ(e.cols(), 9u);
    }
}

TEST(Estimate, SquareSystemIsSolvable) {
    const auto sys = random_system(2, 2, 1);
    const auto traj = bid::simulate(sys, bid::NoiseParams(1.0, 0.1), 4, 3);
    const auto est = bid::estimate(traj);
    EXPECT_LT(est.residual_norm, 1e-8);
}

TEST(Estimate, ErrorIdentityMatchesNormalEquations) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto sys = random_system(30 + seed, 4, 2);
        const double su = 0.8;
        const auto traj = bid::simulate(sys, bid::NoiseParams(su, 0.5), 200, 40 + seed);
        const auto est = bid::estimate(traj);
        const auto blocks = bid::regression_blocks(traj);
        const Matrix w = bid::regression_noise(traj);
        const Matrix gram = blocks.design.transpose() * blocks.design;
        const Matrix rhs = gram.llt().solve(blocks.design.transpose() * w);
        const Matrix lhs = est.a_star_hat.transpose() - bid::a_star(sys, su).transpose();
        EXPECT_LT((lhs - rhs).norm(), 1e-8 * rhs.norm()) << "seed " << seed;
    }
}

TEST(Estimate, ResidualIsOrthogonalToDesign) {
    const auto sys = random_system(50, 4, 3);
    const auto traj = bid::simulate(sys, bid::NoiseParams(1.3, 0.7), 300, 51);
    const auto est = bid::estimate(traj);
    const auto blocks = bid::regression_blocks(traj);
    const Matrix resid = blocks.targets - blocks.design * est.a_star_hat.transpose();
    EXPECT_LT((blocks.design.transpose() * resid).norm(),
              1e-8 * norm2(blocks.design) * norm2(blocks.targets));
    EXPECT_NEAR(est.residual_norm, resid.norm(), 1e-10 * resid.norm());
}

TEST(Estimate, DesignConditionMatchesSvd) {
    const auto sys = random_system(52, 3, 2);
    const auto traj = bid::simulate(sys, bid::NoiseParams(1.0, 0.3), 100, 53);
    const auto est = bid::estimate(traj);
    Eigen::JacobiSVD<Matrix> svd(bid::regression_blocks(traj).design);
    const Vector s = svd.singularValues();
    EXPECT_NEAR(est.design_condition, s(0) / s(s.size() - 1), 1e-8 * est.design_condition);
}

TEST(Estimate, OrthogonalEquivariance) {
    const Eigen::Index n = 3, m = 2;
    const auto sys = random_system(60, n, m);
    const double su = 0.9;
    const auto traj = bid::simulate(sys, bid::NoiseParams(su, 0.4), 150, 61);
    bid::GaussianStream g(62);
    const Matrix u = Eigen::HouseholderQR<Matrix>(g.normals(n, n)).householderQ();

    bid::Trajectory rotated = traj;
    rotated.states = u * traj.states;
    rotated.noises.reset();
    const auto est = bid::error_metrics(bid::estimate(traj), sys);

    std::vector<Matrix> rotated_truth;
    for (std::size_t k = 0; k <= static_cast<std::size_t>(m); ++k) {
        rotated_truth.push_back(u * sys.A(k) * u.transpose());
    }
    const auto est_rot = bid::error_metrics(bid::estimate(rotated), bid::BilinearSystem(rotated_truth));
    for (std::size_t k = 0; k <= static_cast<std::size_t>(m); ++k) {
        const Matrix mapped = u * est.A_hat[k] * u.transpose();
        EXPECT_LT((est_rot.A_hat[k] - mapped).norm(), 1e-10 * std::max(1.0, mapped.norm()));
        EXPECT_NEAR((*est_rot.spectral_errors)[k], (*est.spectral_errors)[k], 1e-10);
    }
}

TEST(Estimate, CompositeErrorShrinksWithT) {
    // Median composite error at T is above that at 4T across seeds.
    const auto sys = random_system(70, 3, 2);
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const bid::NoiseParams noise(1.0, 0.3);
        const auto a = bid::error_metrics(bid::estimate(bid::simulate(sys, noise, 250, 80 + seed)), sys);
        const auto b = bid::error_metrics(bid::estimate(bid::simulate(sys, noise, 1000, 80 + seed)), sys);
        wins += *a.composite_error > *b.composite_error ? 1 : 0;
    }
    // One-sided binomial(20, 1/2): P(X >= 15) < 0.05.
    EXPECT_GE(wins, 15);
}

TEST(Unpack, RoundTripsAStar) {
    const auto sys = random_system(90, 3, 3);
    const auto mats = bid::unpack(bid::a_star(sys, 1.7), 1.7);
    ASSERT_EQ(mats.size(), 4u);
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_LT((mats[k] - sys.A(k)).norm(), 1e-15 * std::max(1.0, sys.A(k).norm()));
    }
}

TEST(Unpack, ScalesInputBlocks) {
    Matrix concat(2, 4);
    concat << 1, 2, 3, 4, 5, 6, 7, 8;
    const auto mats = bid::unpack(concat, 2.0);
    EXPECT_EQ(mats[0], concat.leftCols(2));
    EXPECT_EQ(mats[1], concat.rightCols(2) / 2.0);
    const auto plain = bid::unpack(concat, 1.0);
    EXPECT_EQ(plain[1], concat.rightCols(2));
}

TEST(Unpack, MismatchedSigmaScalesByRatio) {
    bid::GaussianStream g(91);
    const Matrix concat = g.normals(3, 9);
    const auto a = bid::unpack(concat, 1.5);
    const auto b = bid::unpack(concat, 0.5);
    EXPECT_EQ(a[0], b[0]);
    for (std::size_t k = 1; k < 3; ++k) {
        EXPECT_LT((b[k] - 3.0 * a[k]).norm(), 1e-14 * b[k].norm());
    }
}

TEST(Unpack, RejectsBadShapes) {
    EXPECT_THROW(bid::unpack(Matrix::Zero(2, 3), 1.0), bid::SizeError);
    EXPECT_THROW(bid::unpack(Matrix::Zero(2, 2), 1.0), bid::SizeError);
    EXPECT_THROW(bid::unpack(Matrix::Zero(2, 4), 0.0), bid::ParameterError);
}

TEST(ErrorMetrics, ExactEstimateHasZeroError) {
    const auto sys = random_system(100, 3, 2);
    bid::EstimationResult r;
    r.A_hat = sys.matrices();
    r.sigma_u = 1.2;
    r = bid::error_metrics(r, sys);
    for (double e : *r.spectral_errors) EXPECT_EQ(e, 0.0);
    EXPECT_EQ(*r.composite_error, 0.0);
    EXPECT_EQ(r.err0_normalized(), 0.0);
    EXPECT_EQ(r.errk_avg_normalized(), 0.0);
}

TEST(ErrorMetrics, RankOnePerturbation) {
    const auto sys = random_system(101, 4, 2);
    bid::GaussianStream g(102);
    const Vector u = bid::unit_sphere_sample(g, 4), v = bid::unit_sphere_sample(g, 4);
    bid::EstimationResult r;
    r.A_hat = sys.matrices();
    r.A_hat[0] += 0.37 * u * v.transpose();
    r = bid::error_metrics(r, sys);
    EXPECT_NEAR((*r.spectral_errors)[0], 0.37, 1e-12);
    EXPECT_NEAR(r.err0_normalized(), 0.37 / norm2(sys.A(0)), 1e-12);
}

TEST(ErrorMetrics, CompositeIsMaxOfWeightedErrors) {
    const auto sys = random_system(103, 3, 3);
    bid::GaussianStream g(104);
    bid::EstimationResult r;
    r.sigma_u = 1.4;
    for (std::size_t k = 0; k < 4; ++k) r.A_hat.push_back(sys.A(k) + 0.1 * g.normals(3, 3));
    r = bid::error_metrics(r, sys);
    double expected = norm2(r.A_hat[0] - sys.A(0));
    double avg = 0.0;
    for (std::size_t k = 1; k < 4; ++k) {
        expected = std::max(expected, 1.4 * norm2(r.A_hat[k] - sys.A(k)));
        avg += norm2(r.A_hat[k] - sys.A(k)) / norm2(sys.A(k));
    }
    EXPECT_NEAR(*r.composite_error, expected, 1e-12);
    EXPECT_NEAR(r.errk_avg_normalized(), avg / 3, 1e-12);
}

TEST(ErrorMetrics, ZeroTruthSkipsNormalization) {
    const bid::BilinearSystem sys({Matrix::Identity(2, 2), Matrix::Zero(2, 2)});
    bid::EstimationResult r;
    r.A_hat = {Matrix::Identity(2, 2), 0.5 * Matrix::Identity(2, 2)};
    r = bid::error_metrics(r, sys);
    EXPECT_FALSE(r.normalization_skipped[0]);
    EXPECT_TRUE(r.normalization_skipped[1]);
    EXPECT_NEAR((*r.normalized_errors)[1], 0.5, 1e-15);
}

TEST(ErrorMetrics, DimensionMismatch) {
    const auto sys = random_system(105, 3, 2);
    bid::EstimationResult r;
    r.A_hat = {Matrix::Zero(3, 3), Matrix::Zero(3, 3)};
    EXPECT_THROW(bid::error_metrics(r, sys), bid::SizeError);
}

TEST(SampleComplexity, ScalarArithmetic) {
    const double sw = 0.7;
    const double t = bid::sample_complexity(1, 1, 1.0 / 3.0, sw * sw / 4.0, sw);
    EXPECT_NEAR(t, 2.0 + 2.0 * std::log(9.0), 1e-12);
    EXPECT_NEAR(t, 6.394, 1e-3);
}

TEST(SampleComplexity, DoublingGammaAddsLogTwo) {
    const double a = bid::sample_complexity(8, 4, 0.05, 123.0, 0.3);
    const double b = bid::sample_complexity(8, 4, 0.05, 246.0, 0.3);
    EXPECT_NEAR(b - a, std::log(2.0), 1e-12);
}

TEST(SampleComplexity, LeadingTermIsParameterCount) {
    // Gamma chosen so both log terms cancel: 12 G / (sw^2 d) = d / 3.
    const double d = 0.05, sw = 0.3;
    const double g = d * d * sw * sw / 36.0;
    EXPECT_NEAR(bid::sample_complexity(8, 4, d, g, sw), 40.0, 1e-12);
}

TEST(SampleComplexity, RejectsBadArguments) {
    EXPECT_THROW(bid::sample_complexity(1, 1, 0.0, 1.0, 1.0), bid::ParameterError);
    EXPECT_THROW(bid::sample_complexity(1, 1, 1.0, 1.0, 1.0), bid::ParameterError);
    EXPECT_THROW(bid::sample_complexity(1, 1, 0.1, 1.0, 0.0), bid::ParameterError);
    EXPECT_THROW(bid::sample_complexity(0, 1, 0.1, 1.0, 1.0), bid::ParameterError);
}

TEST(GammaBar, Cases) {
    bid::StabilityProfile p;
    p.c_tilde_hat = 1.0;
    EXPECT_NEAR(bid::gamma_bar(p, 1.0, 1.0, 1, 1, 10), 22.0, 1e-12);
    EXPECT_NEAR(bid::gamma_bar(p, 0.0, 0.3, 8, 4, 100), 0.09 * 8 * 100 * 5, 1e-10);
    const double g1 = bid::gamma_bar(p, 2.0, 0.5, 3, 2, 100);
    const double g2 = bid::gamma_bar(p, 2.0, 0.5, 3, 2, 200);
    const double g3 = bid::gamma_bar(p, 2.0, 0.5, 3, 2, 300);
    EXPECT_NEAR(g3 - g2, g2 - g1, 1e-10);
}

TEST(PredictedRate, SquareRootLaw) {
    EXPECT_DOUBLE_EQ(bid::predicted_rate(50.0, 50.0), 1.0);
    EXPECT_DOUBLE_EQ(bid::predicted_rate(50.0, 200.0), 0.5);
    EXPECT_NEAR(bid::predicted_rate(17.3, 4 * 911.0), 0.5 * bid::predicted_rate(17.3, 911.0), 1e-15);
    EXPECT_THROW(bid::predicted_rate(1.0, 0.0), bid::ParameterError);
}

TEST(BoundReport, FieldsAreConsistent) {
    bid::StabilityProfile p;
    p.c_tilde_hat = 1.3;
    const auto r = bid::bound_report(p, 8.0, 0.3, 8, 4, 5000);
    EXPECT_DOUBLE_EQ(r.gamma_bar, bid::gamma_bar(p, 8.0, 0.3, 8, 4, 5000));
    EXPECT_DOUBLE_EQ(r.T_delta, bid::sample_complexity(8, 4, bid::kDefaultDelta, r.gamma_bar, 0.3));
    EXPECT_DOUBLE_EQ(r.predicted_error, std::sqrt(r.T_delta / 5000.0));
    EXPECT_TRUE(r.feasible);
    EXPECT_FALSE(bid::bound_report(p, 8.0, 0.3, 8, 4, 20).feasible);
}
