#include "eqdisc/evolution.hpp"

#include "eqdisc/errors.hpp"
#include "eqdisc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace eqdisc {

namespace {

// Draw budget for turning a gene set into M distinct terms; only reachable
// when the family barely admits M distinct terms.
constexpr int kRedrawLimit = 100000;

FamilyConfig with_term_length(const FamilyConfig& family, int k) {
    FamilyConfig out = family;
    if (auto* d = std::get_if<DerivativeFamily>(&out))
        d->max_tokens = k;
    return out;
}

bool is_duplicate(const std::vector<Term>& terms, std::size_t i) {
    for (std::size_t j = 0; j < terms.size(); ++j)
        if (j != i && terms[j] == terms[i])
            return true;
    return false;
}

std::vector<Term> lasso_structure(const Individual& ind) {
    std::vector<Term> s{ind.terms[ind.target_index]};
    const auto left = ind.left_indices();
    for (std::size_t a = 0; a < left.size(); ++a)
        if (ind.weights.size() > static_cast<Eigen::Index>(a) && ind.weights[static_cast<Eigen::Index>(a)] != 0.0)
            s.push_back(ind.terms[left[a]]);
    std::sort(s.begin(), s.end());
    return s;
}

std::vector<std::size_t> ranking(const std::vector<Individual>& pop) {
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ranks_higher(pop[a], pop[b]);
    });
    return order;
}

void evaluate_population(std::vector<Individual>& pop, const Workspace& ws, const EvolutionConfig& cfg) {
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < pop.size(); ++i)
        if (!pop[i].fitness)
            pending.push_back(i);
    parallel_for(pending.size(), cfg.threads,
                 [&](std::size_t j) { compute_fitness(pop[pending[j]], ws, cfg); });
}

std::string format_fixed(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

} // namespace

void EvolutionConfig::validate() const {
    auto rate = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0))
            throw InputError(std::string(name) + " must lie in [0, 1]");
    };
    if (M < 2)
        throw InputError("M must be at least 2 (one target and one left term)");
    if (k < 1)
        throw InputError("k must be at least 1");
    if (n_pop < 2)
        throw InputError("n_pop must be at least 2");
    if (n_epochs < 0)
        throw InputError("n_epochs must be non-negative");
    rate(r_mutation, "r_mutation");
    rate(r_crossover, "r_crossover");
    rate(a_proc, "a_proc");
    rate(a_elite, "a_elite");
    rate(token_change_probability, "token_change_probability");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw InputError("lambda must be finite and non-negative");
    if (!(fitness_epsilon > 0.0))
        throw InputError("fitness_epsilon must be positive");
    if (tournament_size < 1)
        throw InputError("tournament_size must be at least 1");
    if (!(lasso_tol > 0.0) || lasso_max_iter < 1)
        throw InputError("lasso_tol must be positive and lasso_max_iter at least 1");
}

std::vector<std::size_t> Individual::left_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < terms.size(); ++i)
        if (i != target_index)
            out.push_back(i);
    return out;
}

std::vector<Term> DiscoveredModel::structure() const {
    std::vector<Term> s{target};
    s.insert(s.end(), terms.begin(), terms.end());
    std::sort(s.begin(), s.end());
    return s;
}

bool ranks_higher(const Individual& a, const Individual& b) {
    const double fa = a.fitness.value_or(-1.0);
    const double fb = b.fitness.value_or(-1.0);
    if (fa != fb)
        return fa > fb;
    return !a.trivial && b.trivial;
}

std::vector<Individual> init_population(const EvolutionConfig& cfg, const FamilyConfig& family,
                                        Rng& rng) {
    cfg.validate();
    const FamilyConfig fam = with_term_length(family, cfg.k);
    const double distinct = count_terms(admissible_tokens(fam).size(), max_term_tokens(fam));
    if (distinct < cfg.M)
        throw InputError("token family admits only " + std::to_string(static_cast<long long>(distinct)) +
                         " distinct terms but M = " + std::to_string(cfg.M));
    std::vector<Individual> pop(static_cast<std::size_t>(cfg.n_pop));
    std::uniform_int_distribution<std::size_t> pick_target(0, static_cast<std::size_t>(cfg.M) - 1);
    for (auto& ind : pop) {
        ind.terms.reserve(static_cast<std::size_t>(cfg.M));
        for (int m = 0; m < cfg.M; ++m)
            ind.terms.push_back(sample_random_term(fam, rng));
        make_terms_distinct(ind, fam, rng);
        ind.target_index = pick_target(rng);
    }
    return pop;
}

void make_terms_distinct(Individual& ind, const FamilyConfig& family, Rng& rng) {
    for (std::size_t i = 0; i < ind.terms.size(); ++i) {
        int draws = 0;
        while (is_duplicate(ind.terms, i)) {
            if (++draws > kRedrawLimit)
                throw InputError("could not draw distinct terms; the family is too small");
            ind.terms[i] = sample_random_term(family, rng);
            ind.fitness.reset();
        }
    }
}

RegressionProblem build_problem(const Individual& ind, const Workspace& ws, double lambda_abs) {
    if (ind.terms.empty() || ind.target_index >= ind.terms.size())
        throw InputError("individual has no valid target term");
    const auto left = ind.left_indices();
    const auto n = static_cast<Eigen::Index>(ws.n_samples());
    RegressionProblem p;
    p.features.resize(n, static_cast<Eigen::Index>(left.size()));
    p.lambda = lambda_abs;
    const auto target = evaluate_term(ind.terms[ind.target_index], ws);
    p.target = Eigen::Map<const Eigen::VectorXd>(target.data(), n);
    for (std::size_t a = 0; a < left.size(); ++a) {
        const auto col = evaluate_term(ind.terms[left[a]], ws);
        p.features.col(static_cast<Eigen::Index>(a)) = Eigen::Map<const Eigen::VectorXd>(col.data(), n);
    }
    if (!p.features.allFinite() || !p.target.allFinite())
        throw NumericalError("non-finite term values");
    return p;
}

double compute_fitness(Individual& ind, const Workspace& ws, const EvolutionConfig& cfg) {
    RegressionProblem p = build_problem(ind, ws);
    p.lambda = cfg.lambda * lambda_scale(p.features, p.target, cfg.scaling);
    LassoOptions opt;
    opt.tol = cfg.lasso_tol;
    opt.max_iter = cfg.lasso_max_iter;
    opt.scaling = cfg.scaling;
    const SparseSolution sol = lasso_fit(p, opt);
    ind.weights = sol.weights;
    ind.trivial = sol.support.empty();
    const double residual = (p.features * sol.weights - p.target).norm();
    ind.fitness = 1.0 / (residual + cfg.fitness_epsilon);
    return *ind.fitness;
}

std::vector<std::size_t> tournament_select(std::span<const Individual> population, double a_proc,
                                           Rng& rng, int tournament_size) {
    if (population.empty())
        throw InputError("tournament selection on an empty population");
    for (const auto& ind : population)
        if (!ind.fitness)
            throw InputError("tournament selection needs evaluated individuals");
    const std::size_t n = population.size();
    const auto count = static_cast<std::size_t>(std::ceil(a_proc * static_cast<double>(n) - 1e-12));
    const std::size_t size = std::min<std::size_t>(static_cast<std::size_t>(std::max(tournament_size, 1)), n);

    std::vector<std::size_t> parents;
    std::vector<std::size_t> pool(n);
    for (std::size_t t = 0; t < count; ++t) {
        // Partial Fisher-Yates: the first `size` entries are the entrants.
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        for (std::size_t i = 0; i < size; ++i) {
            std::uniform_int_distribution<std::size_t> d(i, n - 1);
            std::swap(pool[i], pool[d(rng)]);
        }
        std::vector<std::size_t> best{pool[0]};
        for (std::size_t i = 1; i < size; ++i) {
            const auto& c = population[pool[i]];
            const auto& b = population[best.front()];
            if (ranks_higher(c, b))
                best.assign(1, pool[i]);
            else if (!ranks_higher(b, c))
                best.push_back(pool[i]);
        }
        std::uniform_int_distribution<std::size_t> tie(0, best.size() - 1);
        parents.push_back(best.size() == 1 ? best.front() : best[tie(rng)]);
    }
    return parents;
}

std::pair<Individual, Individual> crossover(const Individual& p1, const Individual& p2,
                                            double r_crossover, Rng& rng) {
    if (p1.terms.size() != p2.terms.size())
        throw InputError("crossover parents hold different numbers of terms");
    Individual c1;
    Individual c2;
    c1.terms = p1.terms;
    c2.terms = p2.terms;
    std::bernoulli_distribution swap(r_crossover);
    for (std::size_t i = 0; i < c1.terms.size(); ++i)
        if (swap(rng))
            std::swap(c1.terms[i], c2.terms[i]);
    std::uniform_int_distribution<std::size_t> pick(0, c1.terms.size() - 1);
    c1.target_index = pick(rng);
    c2.target_index = pick(rng);
    return {std::move(c1), std::move(c2)};
}

Individual mutate(const Individual& ind, double r_mutation, const FamilyConfig& family, Rng& rng,
                  double token_change_probability) {
    Individual out = ind;
    std::bernoulli_distribution hit(r_mutation);
    std::bernoulli_distribution token_change(token_change_probability);
    bool changed = false;
    for (std::size_t i = 0; i < out.terms.size(); ++i) {
        if (!hit(rng))
            continue;
        Term& gene = out.terms[i];
        if (token_change(rng)) {
            std::uniform_int_distribution<std::size_t> which(0, gene.size() - 1);
            const std::size_t t = which(rng);
            gene.replace_token(t, sample_random_token_like(family, gene.tokens()[t], rng));
        } else {
            gene = sample_random_term(family, rng);
        }
        changed = true;
    }
    if (changed) {
        out.fitness.reset();
        out.weights.resize(0);
        out.trivial = false;
        make_terms_distinct(out, family, rng);
    }
    return out;
}

DiscoveredModel make_model(const Individual& best, const Workspace& ws, const FamilyConfig& family,
                           const EvolutionConfig& cfg) {
    if (!best.fitness)
        throw InputError("cannot report an unevaluated individual");
    DiscoveredModel m;
    m.target = best.terms[best.target_index];
    m.target_label = term_label(m.target, family);
    m.lambda = cfg.lambda;
    m.fitness = *best.fitness;
    m.seed = cfg.seed;

    const RegressionProblem p = build_problem(best, ws);
    const auto left = best.left_indices();
    const auto support = extract_support(best.weights, 0.0);
    Eigen::VectorXd refit = Eigen::VectorXd::Zero(p.features.cols());
    if (!support.empty())
        refit = refit_support(p, support);
    const double rmax = refit.size() ? refit.cwiseAbs().maxCoeff() : 0.0;
    for (std::size_t j : support) {
        const double c = refit[static_cast<Eigen::Index>(j)];
        if (std::abs(c) <= 1e-6 * rmax || c == 0.0) {
            refit[static_cast<Eigen::Index>(j)] = 0.0;
            continue;
        }
        m.terms.push_back(best.terms[left[j]]);
        m.labels.push_back(term_label(m.terms.back(), family));
        m.coefficients.push_back(c);
        m.raw_coefficients.push_back(best.weights[static_cast<Eigen::Index>(j)]);
    }
    m.degenerate = m.terms.empty();
    m.residual_norm = (p.features * refit - p.target).norm();
    m.refit_fitness = 1.0 / (m.residual_norm + cfg.fitness_epsilon);
    const double ynorm = p.target.norm();
    m.relative_residual = ynorm > 0.0 ? m.residual_norm / ynorm : 0.0;
    return m;
}

DiscoveredModel evolve(const EvolutionConfig& cfg, const Workspace& ws, const FamilyConfig& family,
                       EvolutionTrace* trace) {
    cfg.validate();
    const FamilyConfig fam = with_term_length(family, cfg.k);
    const auto n_pop = static_cast<std::size_t>(cfg.n_pop);
    const auto n_elite = std::min(n_pop, static_cast<std::size_t>(std::llround(cfg.a_elite * cfg.n_pop)));

    Rng init_rng = stream_rng(cfg.seed, 0, n_pop);
    std::vector<Individual> pop = init_population(cfg, fam, init_rng);

    std::vector<double> history;
    std::vector<std::vector<Term>> best_structures;
    auto record = [&] {
        const auto order = ranking(pop);
        history.push_back(*pop[order.front()].fitness);
        best_structures.push_back(lasso_structure(pop[order.front()]));
        if (trace) {
            std::vector<double> all;
            for (const auto& ind : pop)
                all.push_back(*ind.fitness);
            trace->fitness.push_back(std::move(all));
        }
    };

    evaluate_population(pop, ws, cfg);
    record();

    for (int epoch = 1; epoch <= cfg.n_epochs; ++epoch) {
        const auto e = static_cast<std::uint64_t>(epoch);
        const auto order = ranking(pop);
        Rng ctrl = stream_rng(cfg.seed, e, n_pop);

        const auto parents = tournament_select(pop, cfg.a_proc, ctrl, cfg.tournament_size);
        std::vector<Individual> offspring;
        for (std::size_t i = 0; i < parents.size(); i += 2) {
            const std::size_t j = i + 1 < parents.size() ? i + 1 : 0;
            auto [c1, c2] = crossover(pop[parents[i]], pop[parents[j]], cfg.r_crossover, ctrl);
            make_terms_distinct(c1, fam, ctrl);
            make_terms_distinct(c2, fam, ctrl);
            offspring.push_back(std::move(c1));
            if (offspring.size() < parents.size())
                offspring.push_back(std::move(c2));
        }
        if (offspring.size() > n_pop - n_elite)
            offspring.resize(n_pop - n_elite);
        for (std::size_t o = 0; o < offspring.size(); ++o)
            pop[order[n_pop - 1 - o]] = std::move(offspring[o]);

        for (std::size_t r = n_elite; r < n_pop; ++r) {
            const std::size_t i = order[r];
            Rng rng = stream_rng(cfg.seed, e, i);
            pop[i] = mutate(pop[i], cfg.r_mutation, fam, rng, cfg.token_change_probability);
        }

        evaluate_population(pop, ws, cfg);
        record();
    }

    const auto order = ranking(pop);
    const Individual& best = pop[order.front()];
    DiscoveredModel model = make_model(best, ws, fam, cfg);
    model.epochs = cfg.n_epochs;
    model.fitness_history = std::move(history);
    const auto final_structure = lasso_structure(best);
    for (std::size_t e = 0; e < best_structures.size(); ++e)
        if (best_structures[e] == final_structure) {
            model.structure_epoch = static_cast<int>(e);
            break;
        }
    return model;
}

double search_space_size(std::size_t token_count, int k, int M) {
    const double n = count_terms(token_count, k);
    if (M < 0 || n < M)
        return 0.0;
    return std::round(std::exp(std::lgamma(n + 1) - std::lgamma(M + 1.0) - std::lgamma(n - M + 1)));
}

std::string equation_string(const DiscoveredModel& model, int precision) {
    std::string out = model.target_label + " =";
    if (model.terms.empty())
        return out + " 0";
    for (std::size_t i = 0; i < model.terms.size(); ++i) {
        const double c = model.coefficients[i];
        if (i == 0)
            out += c < 0 ? " -" : "";
        else
            out += c < 0 ? " -" : " +";
        out += " " + format_fixed(std::abs(c), precision) + " * " + model.labels[i];
    }
    return out;
}

std::size_t select_by_fitness(std::span<const DiscoveredModel> models) {
    std::vector<double> scores;
    scores.reserve(models.size());
    for (const auto& m : models)
        scores.push_back(m.refit_fitness);
    return argmax_first(scores);
}

std::size_t token_count(const DiscoveredModel& model) {
    std::size_t n = model.target.size();
    for (const auto& t : model.terms)
        n += t.size();
    return n;
}

std::size_t select_parsimonious(std::span<const DiscoveredModel> models, double tolerance) {
    if (models.empty())
        throw InputError("cannot select from an empty model list");
    std::size_t chosen = models.size();
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto& m = models[i];
        if (m.degenerate || !(m.relative_residual <= tolerance))
            continue;
        if (chosen == models.size()) {
            chosen = i;
            continue;
        }
        const auto& c = models[chosen];
        const std::size_t tm = token_count(m);
        const std::size_t tc = token_count(c);
        if (tm < tc || (tm == tc && m.relative_residual < c.relative_residual))
            chosen = i;
    }
    return chosen == models.size() ? select_by_fitness(models) : chosen;
}

} // namespace eqdisc
