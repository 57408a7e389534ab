#pragma once

/// @file evolution.hpp
/// @brief Genetic search over candidate equations.
///
/// An individual holds M terms; one of them is the target (right part) and
/// the others are weighted by a LASSO fit against it. Fitness is the inverse
/// residual norm of that fit. Each epoch evaluates unset fitness values,
/// breeds offspring from tournament winners, lets them replace the worst
/// individuals and mutates everything outside the elite.

#include "eqdisc/rng.hpp"
#include "eqdisc/sparse_regression.hpp"
#include "eqdisc/tokens.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace eqdisc {

struct EvolutionConfig {
    int M = 8;            ///< terms per individual
    int k = 3;            ///< max tokens per term (derivative families)
    int n_pop = 10;
    int n_epochs = 150;
    double r_mutation = 0.4;
    double r_crossover = 0.4;
    double a_proc = 0.2;  ///< fraction of the population selected as parents
    double a_elite = 0.4; ///< top fraction exempt from mutation and replacement
    /// Sparsity constant relative to lambda_scale() of each individual's
    /// regression problem; 2 or more zeroes every weight.
    double lambda = 1e-3;
    std::uint64_t seed = 0;
    double fitness_epsilon = 1e-9;
    int tournament_size = 2;
    double token_change_probability = 0.5; ///< share of token-change mutations
    PenaltyScaling scaling = PenaltyScaling::Standardized;
    double lasso_tol = 1e-10;
    int lasso_max_iter = 10000;
    unsigned threads = 1; ///< fitness evaluation workers

    void validate() const;
};

struct Individual {
    std::vector<Term> terms;
    std::size_t target_index = 0;
    Eigen::VectorXd weights; ///< one per left term, in term order
    std::optional<double> fitness;
    bool trivial = false; ///< every left weight is zero

    std::vector<std::size_t> left_indices() const;
};

struct DiscoveredModel {
    Term target;
    std::string target_label;
    std::vector<Term> terms; ///< left terms with nonzero refit coefficient
    std::vector<std::string> labels;
    std::vector<double> coefficients;     ///< refit (unshrunk)
    std::vector<double> raw_coefficients; ///< LASSO weights of the same terms
    double lambda = 0.0;                  ///< relative sparsity constant
    double fitness = 0.0;                 ///< with LASSO weights
    double refit_fitness = 0.0;           ///< with refit coefficients
    double residual_norm = 0.0;           ///< ||F a - y|| with refit coefficients
    double relative_residual = 0.0;       ///< residual_norm / ||y||
    std::uint64_t seed = 0;
    int epochs = 0;
    std::vector<double> fitness_history; ///< best fitness per epoch, epoch 0 first
    int structure_epoch = 0; ///< first epoch whose best individual had the final structure
    bool degenerate = false; ///< no nonzero left coefficient survived

    /// Target followed by the left terms, sorted; equal for equivalent models.
    std::vector<Term> structure() const;
};

/// Ordering used everywhere a "best" is needed: higher fitness first, then
/// non-trivial before trivial.
bool ranks_higher(const Individual& a, const Individual& b);

std::vector<Individual> init_population(const EvolutionConfig& cfg, const FamilyConfig& family,
                                        Rng& rng);

/// Builds the regression problem of `ind` on `ws` (left terms vs. target).
RegressionProblem build_problem(const Individual& ind, const Workspace& ws, double lambda_abs = 0.0);

/// Fits the individual's weights and sets fitness and the trivial flag.
double compute_fitness(Individual& ind, const Workspace& ws, const EvolutionConfig& cfg);

/// Indices of ceil(a_proc * n_pop) tournament winners.
std::vector<std::size_t> tournament_select(std::span<const Individual> population, double a_proc,
                                           Rng& rng, int tournament_size = 2);

std::pair<Individual, Individual> crossover(const Individual& p1, const Individual& p2,
                                            double r_crossover, Rng& rng);

Individual mutate(const Individual& ind, double r_mutation, const FamilyConfig& family, Rng& rng,
                  double token_change_probability = 0.5);

/// Redraws repeated terms until all M genes are distinct.
void make_terms_distinct(Individual& ind, const FamilyConfig& family, Rng& rng);

struct EvolutionTrace {
    std::vector<std::vector<double>> fitness; ///< all fitness values per epoch
};

DiscoveredModel evolve(const EvolutionConfig& cfg, const Workspace& ws, const FamilyConfig& family,
                       EvolutionTrace* trace = nullptr);

/// Converts a fitted individual into a reported model (refit included).
DiscoveredModel make_model(const Individual& best, const Workspace& ws, const FamilyConfig& family,
                           const EvolutionConfig& cfg);

/// Number of M-term gene sets over the family: C(sum_l C(nt+l-1, l), M).
double search_space_size(std::size_t token_count, int k, int M);

/// One-line rendering such as "d2u/dt2 = 1.0000 * d2u/dx2"; a degenerate
/// model renders as "<target> = 0".
std::string equation_string(const DiscoveredModel& model, int precision = 4);

/// Selector: highest refit fitness, ties to the first.
std::size_t select_by_fitness(std::span<const DiscoveredModel> models);

/// Total tokens over the target and the left terms.
std::size_t token_count(const DiscoveredModel& model);

/// Selector: among non-degenerate models with relative_residual <=
/// tolerance, the fewest tokens; then the smallest relative residual; then
/// the first. Falls back to select_by_fitness when no model qualifies.
/// Identities such as a*b = (a^2 + b^2)/2 have residuals quadratic in the
/// data error, so raw fitness ranks them above the linear law they derive from.
std::size_t select_parsimonious(std::span<const DiscoveredModel> models, double tolerance = 0.1);

} // namespace eqdisc
