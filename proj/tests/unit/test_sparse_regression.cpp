#include "lasso_oracle.hpp"

#include <eqdisc/errors.hpp>
#include <eqdisc/sparse_regression.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace eqdisc;
using eqdisc::test::proximal_gradient_lasso;
using eqdisc::test::random_lasso_problem;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int n, int p) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd m(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j)
            m(i, j) = normal(rng);
    return m;
}

} // namespace

TEST(Lasso, LargeLambdaZeroesEverything) {
    std::mt19937_64 rng(3);
    const Eigen::MatrixXd f = random_matrix(rng, 30, 6);
    const Eigen::VectorXd y = random_matrix(rng, 30, 1).col(0);
    RegressionProblem p{f, y, 2.0 * (f.transpose() * y).cwiseAbs().maxCoeff()};
    const SparseSolution s = lasso_fit(p);
    EXPECT_TRUE(s.weights.isZero(0.0));
    EXPECT_TRUE(s.support.empty());
    EXPECT_TRUE(s.converged);
}

TEST(Lasso, ZeroLambdaOrthonormalIsProjection) {
    std::mt19937_64 rng(4);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(rng, 20, 4));
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(20, 4);
    const Eigen::VectorXd y = random_matrix(rng, 20, 1).col(0);
    const SparseSolution s = lasso_fit({q, y, 0.0});
    const Eigen::VectorXd expected = q.transpose() * y;
    EXPECT_LE((s.weights - expected).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Lasso, MatchesProximalGradientOnTwentyByFive) {
    std::mt19937_64 rng(20);
    const Eigen::MatrixXd f = random_matrix(rng, 20, 5);
    const Eigen::VectorXd y = random_matrix(rng, 20, 1).col(0);
    const RegressionProblem p{f, y, 0.1};
    const SparseSolution s = lasso_fit(p);
    const Eigen::VectorXd oracle = proximal_gradient_lasso(f, y, 0.1, Eigen::VectorXd::Ones(5), 100000);
    EXPECT_LE((s.weights - oracle).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Lasso, RandomProblemsAgainstOracleBothScalings) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        const auto prob = random_lasso_problem(rng);
        for (auto scaling : {PenaltyScaling::Plain, PenaltyScaling::Standardized}) {
            LassoOptions opt;
            opt.scaling = scaling;
            const RegressionProblem p{prob.features, prob.target, prob.lambda};
            const SparseSolution s = lasso_fit(p, opt);
            const Eigen::VectorXd pen = scaling == PenaltyScaling::Plain
                                            ? Eigen::VectorXd::Ones(prob.features.cols())
                                            : Eigen::VectorXd(prob.features.colwise().norm().transpose());
            const Eigen::VectorXd oracle = proximal_gradient_lasso(prob.features, prob.target, prob.lambda, pen);
            EXPECT_LE((s.weights - oracle).cwiseAbs().maxCoeff(), 1e-6) << "trial " << trial;
            EXPECT_LE(s.optimality_residual, 10 * opt.tol * std::max(1.0, prob.target.norm()))
                << "trial " << trial;
            EXPECT_TRUE(s.converged);
        }
    }
}

TEST(Lasso, SingleFeatureSoftThreshold) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXd f = random_matrix(rng, 15, 1);
        const Eigen::VectorXd y = random_matrix(rng, 15, 1).col(0);
        const double z = f.col(0).dot(y);
        const double lambda = std::abs(z) * (trial % 2 ? 0.5 : 2.5);
        const SparseSolution s = lasso_fit({f, y, lambda});
        const double expected =
            (z > 0 ? 1.0 : -1.0) * std::max(std::abs(z) - lambda / 2, 0.0) / f.col(0).squaredNorm();
        EXPECT_NEAR(s.weights[0], expected, 1e-10);
    }
}

TEST(Lasso, ObjectiveNonIncreasingPerSweep) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const auto prob = random_lasso_problem(rng);
        LassoOptions opt;
        opt.record_objective = true;
        const SparseSolution s = lasso_fit({prob.features, prob.target, prob.lambda}, opt);
        for (std::size_t i = 1; i < s.objective_history.size(); ++i)
            EXPECT_LE(s.objective_history[i], s.objective_history[i - 1] * (1 + 1e-12) + 1e-12);
    }
}

TEST(Lasso, SupportShrinksAlongLambdaLadder) {
    std::mt19937_64 rng(50);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::MatrixXd f = random_matrix(rng, 40, 8);
        Eigen::VectorXd truth = random_matrix(rng, 8, 1).col(0);
        const Eigen::VectorXd y = f * truth + 0.3 * random_matrix(rng, 40, 1).col(0);
        const double top = 2.0 * (f.transpose() * y).cwiseAbs().maxCoeff();
        std::size_t previous = 9;
        for (int i = 0; i < 10; ++i) {
            const double lambda = top * std::pow(10.0, -4.0 + 4.0 * i / 9.0);
            const std::size_t size = lasso_fit({f, y, lambda}).support.size();
            EXPECT_LE(size, previous) << "trial " << trial << " step " << i;
            previous = size;
        }
        EXPECT_EQ(previous, 0u);
    }
}

TEST(Lasso, ScaleEquivarianceStandardized) {
    std::mt19937_64 rng(31);
    const auto prob = random_lasso_problem(rng);
    LassoOptions opt;
    opt.scaling = PenaltyScaling::Standardized;
    const SparseSolution base = lasso_fit({prob.features, prob.target, prob.lambda}, opt);
    Eigen::MatrixXd scaled = prob.features;
    const double s = 7.5;
    scaled.col(0) *= s;
    const SparseSolution after = lasso_fit({scaled, prob.target, prob.lambda}, opt);
    EXPECT_NEAR(after.weights[0], base.weights[0] / s, 1e-8);
    for (Eigen::Index j = 1; j < base.weights.size(); ++j)
        EXPECT_NEAR(after.weights[j], base.weights[j], 1e-8);
}

TEST(Lasso, ZeroColumnsGetZeroWeight) {
    std::mt19937_64 rng(8);
    Eigen::MatrixXd f = random_matrix(rng, 20, 3);
    f.col(1).setZero();
    const Eigen::VectorXd y = f.col(0) * 2.0 + f.col(2);
    const SparseSolution s = lasso_fit({f, y, 1e-6});
    EXPECT_EQ(s.weights[1], 0.0);
    EXPECT_NEAR(s.weights[0], 2.0, 1e-5);
}

TEST(Lasso, RejectsBadInput) {
    Eigen::MatrixXd f(3, 1);
    f << 1, 2, std::nan("");
    EXPECT_THROW(lasso_fit({f, Eigen::VectorXd::Ones(3), 0.1}), NumericalError);
    EXPECT_THROW(lasso_fit({Eigen::MatrixXd::Ones(3, 1), Eigen::VectorXd::Ones(3), -1.0}), InputError);
    EXPECT_THROW(lasso_fit({Eigen::MatrixXd::Ones(3, 1), Eigen::VectorXd::Ones(2), 0.1}), InputError);
    LassoOptions bad;
    bad.tol = 0.0;
    EXPECT_THROW(lasso_fit({Eigen::MatrixXd::Ones(3, 1), Eigen::VectorXd::Ones(3), 0.1}, bad), InputError);
}

TEST(Lasso, MaxIterReportsNonConvergence) {
    std::mt19937_64 rng(77);
    const auto prob = random_lasso_problem(rng);
    LassoOptions opt;
    opt.max_iter = 1;
    opt.tol = 1e-300;
    const SparseSolution s = lasso_fit({prob.features, prob.target, prob.lambda * 1e-3}, opt);
    EXPECT_FALSE(s.converged);
    EXPECT_EQ(s.iterations, 1);
}

TEST(Refit, AllColumnsEqualsLeastSquares) {
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd f = random_matrix(rng, 25, 4);
    const Eigen::VectorXd y = random_matrix(rng, 25, 1).col(0);
    const std::size_t all[] = {0, 1, 2, 3};
    const Eigen::VectorXd w = refit_support({f, y, 0.0}, all);
    const Eigen::VectorXd ls = f.colPivHouseholderQr().solve(y);
    EXPECT_LE((w - ls).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Refit, SingleColumnRecoversScale) {
    std::mt19937_64 rng(6);
    const Eigen::MatrixXd f = random_matrix(rng, 10, 3);
    const std::size_t s[] = {0};
    const Eigen::VectorXd w = refit_support({f, 2.0 * f.col(0), 5.0}, s);
    EXPECT_NEAR(w[0], 2.0, 1e-10);
    EXPECT_EQ(w[1], 0.0);
    EXPECT_EQ(w[2], 0.0);
    EXPECT_THROW(refit_support({f, f.col(0), 0.0}, {}), InputError);
}

TEST(Refit, DuplicateColumnsMatchPseudoInverseResidual) {
    std::mt19937_64 rng(7);
    Eigen::MatrixXd f = random_matrix(rng, 30, 3);
    f.col(2) = f.col(0);
    const Eigen::VectorXd y = random_matrix(rng, 30, 1).col(0);
    const std::size_t all[] = {0, 1, 2};
    const Eigen::VectorXd w = refit_support({f, y, 0.0}, all);
    ASSERT_TRUE(w.allFinite());
    const Eigen::VectorXd pinv = f.completeOrthogonalDecomposition().solve(y);
    EXPECT_NEAR((f * w - y).norm(), (f * pinv - y).norm(), 1e-8);
}

TEST(Support, RelativeThreshold) {
    Eigen::VectorXd w(4);
    w << 1.0, 1e-7, -0.5, 0.0;
    EXPECT_EQ(extract_support(w), (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(extract_support(w, 0.0), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(LambdaGrid, LogSpacing) {
    const auto g = log_lambda_grid(10, 1e-6, 1e2);
    ASSERT_EQ(g.size(), 10u);
    EXPECT_DOUBLE_EQ(g.front(), 1e-6);
    EXPECT_NEAR(g.back(), 1e2, 1e-10);
    for (std::size_t i = 1; i < g.size(); ++i)
        EXPECT_NEAR(std::log10(g[i]) - std::log10(g[i - 1]), 8.0 / 9.0, 1e-12);
    EXPECT_EQ(log_lambda_grid(1, 0.5, 2.0), (std::vector<double>{0.5}));
    EXPECT_THROW(log_lambda_grid(0), InputError);
}

TEST(LambdaScale, RelativeTwoZeroesEverything) {
    std::mt19937_64 rng(15);
    const auto prob = random_lasso_problem(rng);
    for (auto scaling : {PenaltyScaling::Plain, PenaltyScaling::Standardized}) {
        LassoOptions opt;
        opt.scaling = scaling;
        const double lambda = 2.0 * lambda_scale(prob.features, prob.target, scaling);
        EXPECT_TRUE(lasso_fit({prob.features, prob.target, lambda}, opt).weights.isZero(0.0));
        EXPECT_FALSE(lasso_fit({prob.features, prob.target, 0.9 * lambda}, opt).weights.isZero(0.0));
    }
}

TEST(LambdaSweep, SingleAndDuplicateEntries) {
    const std::function<double(double)> run = [](double l) { return -std::abs(l - 1.0); };
    const std::function<std::size_t(std::span<const double>)> pick = [](std::span<const double> r) {
        return argmax_first(r);
    };
    const double one[] = {3.0};
    EXPECT_EQ(lambda_sweep<double>(one, run, pick).lambda, 3.0);
    const double dup[] = {0.5, 2.0, 1.5, 0.5};
    const auto out = lambda_sweep<double>(dup, run, pick, 3);
    EXPECT_EQ(out.index, 0u);
    EXPECT_EQ(out.results.size(), 4u);
    EXPECT_THROW(lambda_sweep<double>(std::span<const double>{}, run, pick), std::invalid_argument);
}

TEST(LambdaSweep, NoiselessTwoTermModelPrefersZeroLambda) {
    // y = 2 f0 - f1 exactly, with an irrelevant third column. Enumerating the
    // two fits by hand: lambda = 0 reproduces y, lambda = 1e12 zeroes it.
    std::mt19937_64 rng(41);
    const Eigen::MatrixXd f = random_matrix(rng, 30, 3);
    const Eigen::VectorXd y = 2.0 * f.col(0) - f.col(1);
    const std::function<double(double)> fitness = [&](double lambda) {
        const SparseSolution s = lasso_fit({f, y, lambda});
        if (s.support.empty())
            return 1.0 / (y.norm() + 1e-9);
        const Eigen::VectorXd w = refit_support({f, y, lambda}, s.support);
        return 1.0 / ((f * w - y).norm() + 1e-9);
    };
    const std::function<std::size_t(std::span<const double>)> pick = [](std::span<const double> r) {
        return argmax_first(r);
    };
    const double grid[] = {0.0, 1e12};
    EXPECT_EQ(lambda_sweep<double>(grid, fitness, pick).lambda, 0.0);
    const double reversed[] = {1e12, 0.0};
    EXPECT_EQ(lambda_sweep<double>(reversed, fitness, pick).lambda, 0.0);
}

TEST(ArgmaxFirst, TiesGoFirst) {
    const double s[] = {1.0, 3.0, 3.0, 2.0};
    EXPECT_EQ(argmax_first(s), 1u);
}
