#pragma once

/// @file sparse_regression.hpp
/// @brief LASSO by cyclic coordinate descent, support refits and lambda sweeps.
///
/// The solved functional is
///
///     ||F a - y||^2 + lambda * sum_j p_j |a_j|
///
/// with p_j = 1 (PenaltyScaling::Plain, the textbook LASSO) or p_j = ||F_j||
/// (PenaltyScaling::Standardized, equivalent to the plain LASSO on unit-norm
/// columns, which makes the fit invariant to rescaling individual features).
/// Both variants run on internally standardized columns.

#include "eqdisc/parallel.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace eqdisc {

enum class PenaltyScaling { Plain, Standardized };

struct RegressionProblem {
    Eigen::MatrixXd features; ///< n_samples x n_features
    Eigen::VectorXd target;   ///< n_samples
    double lambda = 0.0;      ///< sparsity constant, >= 0
};

struct LassoOptions {
    double tol = 1e-10;
    int max_iter = 100000;
    PenaltyScaling scaling = PenaltyScaling::Plain;
    /// Weights with |w| <= zero_threshold * max|w| are set to exactly zero.
    double zero_threshold = 1e-6;
    bool record_objective = false;
};

struct SparseSolution {
    Eigen::VectorXd weights;
    std::vector<std::size_t> support;
    double objective = 0.0;
    double optimality_residual = 0.0; ///< max subgradient violation
    int iterations = 0;               ///< coordinate-descent sweeps
    bool converged = false;           ///< false when max_iter was hit
    std::vector<double> objective_history; ///< per sweep, when recorded
};

SparseSolution lasso_fit(const RegressionProblem& problem, const LassoOptions& options = {});

/// The penalized functional above at `weights`.
double lasso_objective(const RegressionProblem& problem, const Eigen::VectorXd& weights,
                       PenaltyScaling scaling = PenaltyScaling::Plain);

/// Largest violation of the subgradient optimality conditions at `weights`.
double optimality_residual(const RegressionProblem& problem, const Eigen::VectorXd& weights,
                           PenaltyScaling scaling = PenaltyScaling::Plain);

/// Indices with |w| > rel_threshold * max|w|.
std::vector<std::size_t> extract_support(const Eigen::VectorXd& weights, double rel_threshold = 1e-6);

/// Unpenalized least squares on the support columns (tiny ridge for rank
/// safety); zeros elsewhere.
Eigen::VectorXd refit_support(const RegressionProblem& problem, std::span<const std::size_t> support);

/// Scale used to turn a relative sparsity constant into an absolute one:
/// max_j |F_j^T y| (Plain) or max_j |F_j^T y| / ||F_j|| (Standardized).
/// A relative constant >= 2 zeroes every weight.
double lambda_scale(const Eigen::MatrixXd& features, const Eigen::VectorXd& target,
                    PenaltyScaling scaling);

/// `points` values log-spaced over [lo, hi] (relative sparsity constants).
std::vector<double> log_lambda_grid(int points = 10, double lo = 1e-6, double hi = 1e2);

/// Index of the largest score; ties go to the first occurrence.
std::size_t argmax_first(std::span<const double> scores);

template <class Result>
struct SweepOutcome {
    std::size_t index = 0;
    double lambda = 0.0;
    std::vector<Result> results; ///< one per lambda, in input order
};

/// Runs `run(lambda)` for every lambda (possibly concurrently) and lets
/// `select(results)` pick one. Results are stored by lambda position, so the
/// outcome does not depend on completion order.
template <class Result>
SweepOutcome<Result>
lambda_sweep(std::span<const double> lambdas, const std::function<Result(double)>& run,
             const std::function<std::size_t(std::span<const Result>)>& select,
             unsigned threads = 1) {
    if (lambdas.empty())
        throw std::invalid_argument("lambda sweep needs at least one lambda");
    SweepOutcome<Result> out;
    out.results.resize(lambdas.size());
    parallel_for(lambdas.size(), threads, [&](std::size_t i) { out.results[i] = run(lambdas[i]); });
    out.index = select(std::span<const Result>(out.results));
    out.lambda = lambdas[out.index];
    return out;
}

} // namespace eqdisc
