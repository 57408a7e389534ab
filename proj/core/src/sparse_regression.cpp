#include "eqdisc/sparse_regression.hpp"

#include "eqdisc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace eqdisc {

namespace {

double soft_threshold(double z, double t) {
    if (z > t)
        return z - t;
    if (z < -t)
        return z + t;
    return 0.0;
}

void check_problem(const RegressionProblem& p) {
    if (p.features.rows() < 1 || p.features.cols() < 1)
        throw InputError("regression problem needs at least one sample and one feature");
    if (p.target.size() != p.features.rows())
        throw InputError("target length does not match feature rows");
    if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda))
        throw InputError("lambda must be a finite non-negative number");
    if (!p.features.allFinite() || !p.target.allFinite())
        throw NumericalError("non-finite values in regression problem");
}

Eigen::VectorXd penalty_weights(const Eigen::MatrixXd& features, PenaltyScaling scaling) {
    if (scaling == PenaltyScaling::Plain)
        return Eigen::VectorXd::Ones(features.cols());
    return features.colwise().norm().transpose();
}

// Subgradient violation for gradient g (of the smooth part) and penalties pen.
double kkt_violation(const Eigen::VectorXd& g, const Eigen::VectorXd& w, const Eigen::VectorXd& pen) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        const double v = w[j] != 0.0 ? std::abs(g[j] + pen[j] * (w[j] > 0 ? 1.0 : -1.0))
                                     : std::max(std::abs(g[j]) - pen[j], 0.0);
        worst = std::max(worst, v);
    }
    return worst;
}

} // namespace

double lasso_objective(const RegressionProblem& problem, const Eigen::VectorXd& weights,
                       PenaltyScaling scaling) {
    const Eigen::VectorXd pen = penalty_weights(problem.features, scaling);
    const double rss = (problem.features * weights - problem.target).squaredNorm();
    return rss + problem.lambda * pen.cwiseProduct(weights.cwiseAbs()).sum();
}

double optimality_residual(const RegressionProblem& problem, const Eigen::VectorXd& weights,
                           PenaltyScaling scaling) {
    const Eigen::VectorXd pen = problem.lambda * penalty_weights(problem.features, scaling);
    const Eigen::VectorXd g =
        2.0 * problem.features.transpose() * (problem.features * weights - problem.target);
    return kkt_violation(g, weights, pen);
}

SparseSolution lasso_fit(const RegressionProblem& problem, const LassoOptions& options) {
    check_problem(problem);
    if (!(options.tol > 0.0) || options.max_iter < 1)
        throw InputError("lasso needs tol > 0 and max_iter >= 1");

    const Eigen::Index p = problem.features.cols();
    const Eigen::VectorXd norms = problem.features.colwise().norm().transpose();

    // Active columns: all-zero columns are dropped and get weight zero.
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < p; ++j)
        if (norms[j] > 0.0)
            active.push_back(j);

    SparseSolution sol;
    sol.weights = Eigen::VectorXd::Zero(p);
    const double yty = problem.target.squaredNorm();

    // At or beyond the critical constant the minimizer is exactly zero; the
    // coordinate sweep would only reach it up to rounding.
    const bool beyond_critical =
        problem.lambda > 0.0 &&
        problem.lambda >= 2.0 * lambda_scale(problem.features, problem.target, options.scaling) *
                              (1.0 - 1e-12);

    if (!active.empty() && !beyond_critical) {
        const Eigen::Index q = static_cast<Eigen::Index>(active.size());
        Eigen::MatrixXd x(problem.features.rows(), q);
        Eigen::VectorXd scale(q);
        for (Eigen::Index a = 0; a < q; ++a) {
            scale[a] = norms[active[static_cast<std::size_t>(a)]];
            x.col(a) = problem.features.col(active[static_cast<std::size_t>(a)]) / scale[a];
        }
        const Eigen::MatrixXd gram = x.transpose() * x;
        const Eigen::VectorXd corr = x.transpose() * problem.target;
        // Penalty per standardized coordinate beta = a * scale.
        Eigen::VectorXd pen(q);
        for (Eigen::Index a = 0; a < q; ++a)
            pen[a] = options.scaling == PenaltyScaling::Plain ? problem.lambda / scale[a]
                                                              : problem.lambda;

        Eigen::VectorXd beta = Eigen::VectorXd::Zero(q);
        // gradient of the quadratic part / 2, kept in sync: grad = G beta - c
        Eigen::VectorXd grad = -corr;

        auto objective = [&] {
            return beta.dot(gram * beta) - 2.0 * corr.dot(beta) + yty +
                   pen.cwiseProduct(beta.cwiseAbs()).sum();
        };

        for (int sweep = 1; sweep <= options.max_iter; ++sweep) {
            double max_update = 0.0;
            for (Eigen::Index j = 0; j < q; ++j) {
                const double gjj = gram(j, j);
                const double z = gjj * beta[j] - grad[j];
                const double updated = soft_threshold(z, 0.5 * pen[j]) / gjj;
                const double delta = updated - beta[j];
                if (delta != 0.0) {
                    grad += delta * gram.col(j);
                    beta[j] = updated;
                    max_update = std::max(max_update, std::abs(delta));
                }
            }
            sol.iterations = sweep;
            if (options.record_objective)
                sol.objective_history.push_back(objective());
            if (max_update < options.tol) {
                Eigen::VectorXd alpha(q);
                for (Eigen::Index a = 0; a < q; ++a)
                    alpha[a] = beta[a] / scale[a];
                // Optimality in the original coordinates: gradient 2 F^T (F a - y).
                const Eigen::VectorXd g = 2.0 * scale.cwiseProduct(grad);
                const Eigen::VectorXd pen_alpha = pen.cwiseProduct(scale);
                if (kkt_violation(g, alpha, pen_alpha) <= options.tol) {
                    sol.converged = true;
                    break;
                }
            }
        }
        for (Eigen::Index a = 0; a < q; ++a)
            sol.weights[active[static_cast<std::size_t>(a)]] = beta[a] / scale[a];
    } else {
        sol.converged = true;
    }

    const double wmax = sol.weights.cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < p; ++j)
        if (std::abs(sol.weights[j]) <= options.zero_threshold * wmax)
            sol.weights[j] = 0.0;
    sol.support = extract_support(sol.weights, 0.0);
    sol.objective = lasso_objective(problem, sol.weights, options.scaling);
    sol.optimality_residual = optimality_residual(problem, sol.weights, options.scaling);
    if (!std::isfinite(sol.objective))
        throw NumericalError("lasso objective is not finite");
    return sol;
}

std::vector<std::size_t> extract_support(const Eigen::VectorXd& weights, double rel_threshold) {
    std::vector<std::size_t> support;
    if (weights.size() == 0)
        return support;
    const double cut = rel_threshold * weights.cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < weights.size(); ++j)
        if (weights[j] != 0.0 && std::abs(weights[j]) > cut)
            support.push_back(static_cast<std::size_t>(j));
    return support;
}

Eigen::VectorXd refit_support(const RegressionProblem& problem, std::span<const std::size_t> support) {
    if (support.empty())
        throw InputError("refit needs a non-empty support");
    const Eigen::Index n = problem.features.rows();
    const Eigen::Index s = static_cast<Eigen::Index>(support.size());
    Eigen::MatrixXd x(n, s);
    for (Eigen::Index a = 0; a < s; ++a) {
        const auto j = static_cast<Eigen::Index>(support[static_cast<std::size_t>(a)]);
        if (j >= problem.features.cols())
            throw InputError("support index out of range");
        x.col(a) = problem.features.col(j);
    }
    Eigen::MatrixXd normal = x.transpose() * x;
    const double jitter = 1e-12 * std::max(normal.diagonal().maxCoeff(), 1e-300);
    normal.diagonal().array() += jitter;
    const Eigen::VectorXd coef = normal.ldlt().solve(x.transpose() * problem.target);
    if (!coef.allFinite())
        throw NumericalError("support refit produced non-finite weights");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(problem.features.cols());
    for (Eigen::Index a = 0; a < s; ++a)
        out[static_cast<Eigen::Index>(support[static_cast<std::size_t>(a)])] = coef[a];
    return out;
}

double lambda_scale(const Eigen::MatrixXd& features, const Eigen::VectorXd& target,
                    PenaltyScaling scaling) {
    double best = 0.0;
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
        const double norm = features.col(j).norm();
        if (norm == 0.0)
            continue;
        double c = std::abs(features.col(j).dot(target));
        if (scaling == PenaltyScaling::Standardized)
            c /= norm;
        best = std::max(best, c);
    }
    return best;
}

std::vector<double> log_lambda_grid(int points, double lo, double hi) {
    if (points < 1 || !(lo > 0.0) || !(hi >= lo))
        throw InputError("invalid lambda grid bounds");
    std::vector<double> grid(static_cast<std::size_t>(points));
    if (points == 1) {
        grid[0] = lo;
        return grid;
    }
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (int i = 0; i < points; ++i)
        grid[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (points - 1));
    return grid;
}

std::size_t argmax_first(std::span<const double> scores) {
    if (scores.empty())
        throw InputError("cannot select from an empty score list");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best])
            best = i;
    return best;
}

} // namespace eqdisc
