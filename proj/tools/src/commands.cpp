#include "eqdisc_cli/commands.hpp"

#include "eqdisc_cli/report.hpp"

#include <eqdisc/errors.hpp>
#include <eqdisc/parallel.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

namespace eqdisc::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Prefixes library errors with the pipeline stage, keeping their category.
template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const InputError& e) {
        throw InputError(std::string(name) + ": " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(std::string(name) + ": " + e.what());
    }
}

void ensure_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec)
        throw InputError("cannot create output directory " + p.string() + ": " + ec.message());
}

std::string fmt(double v) {
    if (!std::isfinite(v))
        return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::string run_dir_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "run_%03zu", i);
    return buf;
}

unsigned config_threads(const json& cfg) {
    const json& t = cfg.at("threads");
    if (!t.is_number_integer() || t.get<long long>() < 1)
        throw InputError("threads must be a positive integer");
    return static_cast<unsigned>(t.get<long long>());
}

std::size_t config_runs(const json& cfg) {
    const json& r = cfg.at("runs");
    if (!r.is_number_integer() || r.get<long long>() < 1)
        throw InputError("runs must be a positive integer");
    return static_cast<std::size_t>(r.get<long long>());
}

std::uint64_t config_seed(const json& cfg) {
    const json& s = cfg.at("seed");
    if (!s.is_number_integer() || s.get<long long>() < 0)
        throw InputError("seed must be a non-negative integer");
    return s.get<std::uint64_t>();
}

struct Problem {
    Workspace ws;
    FamilyConfig family;
    json info;
};

struct DiscoveryRun {
    std::vector<double> lambdas;
    std::vector<DiscoveredModel> models;
    std::size_t chosen = 0;
    double seconds = 0.0;

    const DiscoveredModel& model() const { return models[chosen]; }
};

DiscoveryRun discover(const EvolutionConfig& base, const std::vector<double>& lambdas, const Problem& problem,
                      const SelectorSpec& selector, unsigned threads) {
    const auto t0 = Clock::now();
    auto outcome = stage("evolution", [&] {
        return lambda_sweep<DiscoveredModel>(
            lambdas,
            [&](double lambda) {
                EvolutionConfig c = base;
                c.lambda = lambda;
                return evolve(c, problem.ws, problem.family);
            },
            [&](std::span<const DiscoveredModel> ms) { return selector.select(ms); }, threads);
    });
    DiscoveryRun run;
    run.lambdas = lambdas;
    run.models = std::move(outcome.results);
    run.chosen = outcome.index;
    run.seconds = seconds_since(t0);
    return run;
}

json sweep_table(const DiscoveryRun& run) {
    json rows = json::array();
    for (std::size_t i = 0; i < run.models.size(); ++i) {
        const auto& m = run.models[i];
        rows.push_back({{"lambda", run.lambdas[i]},
                        {"equation", equation_string(m)},
                        {"relative_residual", m.relative_residual},
                        {"refit_fitness", m.refit_fitness},
                        {"token_count", token_count(m)},
                        {"degenerate", m.degenerate},
                        {"selected", i == run.chosen}});
    }
    return rows;
}

void write_run_files(const fs::path& dir, const DiscoveryRun& run) {
    const auto& m = run.model();
    std::ostringstream hist;
    hist << "epoch,best_fitness\n";
    for (std::size_t e = 0; e < m.fitness_history.size(); ++e)
        hist << e << ',' << fmt(m.fitness_history[e]) << '\n';
    write_text(dir / "fitness_history.csv", hist.str());
    write_text(dir / "equation.txt", equation_string(m) + "\n");

    std::ostringstream sweep;
    sweep << "lambda,relative_residual,refit_fitness,token_count,degenerate,equation\n";
    for (std::size_t i = 0; i < run.models.size(); ++i) {
        const auto& r = run.models[i];
        sweep << fmt(run.lambdas[i]) << ',' << fmt(r.relative_residual) << ',' << fmt(r.refit_fitness) << ','
              << token_count(r) << ',' << (r.degenerate ? 1 : 0) << ',' << csv_quote(equation_string(r)) << '\n';
    }
    write_text(dir / "lambda_sweep.csv", sweep.str());
}

// Per-model analysis hook: returns extra report fields and may write files
// into the directory (null path means no files).
using Analysis = std::function<json(const DiscoveredModel&, const fs::path*)>;

CommandResult discover_command(Command command, const json& config, const fs::path& out, const Problem& problem,
                               const Analysis& analysis, double data_seconds) {
    const auto t0 = Clock::now();
    const EvolutionConfig base = stage("config", [&] { return evolution_config(config); });
    const SelectorSpec selector = stage("config", [&] { return selector_spec(config); });
    const std::vector<double> lambdas = stage("config", [&] { return lambda_grid(config); });
    const std::size_t runs = config_runs(config);
    const unsigned threads = config_threads(config);
    const std::uint64_t seed = config_seed(config);
    ensure_dir(out);

    std::vector<DiscoveryRun> results(runs);
    if (runs == 1) {
        results[0] = discover(base, lambdas, problem, selector, threads);
    } else {
        parallel_for(runs, threads, [&](std::size_t i) {
            EvolutionConfig c = base;
            c.seed = seed + i;
            results[i] = discover(c, lambdas, problem, selector, 1);
        });
    }

    auto run_report = [&](std::size_t i, const fs::path& dir) {
        json echo = config;
        echo["seed"] = seed + i;
        echo["runs"] = 1;
        json r = {{"schema", kReportSchema},
                  {"command", to_string(command)},
                  {"seed", seed + i},
                  {"config", echo},
                  {"data", problem.info},
                  {"search_space_size", search_space_size(admissible_tokens(problem.family).size(),
                                                          max_term_tokens(problem.family), base.M)},
                  {"model", model_to_json(results[i].model())},
                  {"lambda_sweep", sweep_table(results[i])},
                  {"degenerate", results[i].model().degenerate}};
        if (analysis)
            r["analysis"] = analysis(results[i].model(), &dir);
        return r;
    };

    CommandResult result;
    if (runs == 1) {
        write_run_files(out, results[0]);
        result.report = run_report(0, out);
        result.report["config"] = config;
        result.report["timings"] = {{"data_seconds", data_seconds},
                                    {"evolution_seconds", results[0].seconds},
                                    {"total_seconds", data_seconds + seconds_since(t0)}};
    } else {
        json entries = json::array();
        std::vector<DiscoveredModel> chosen;
        std::ostringstream csv;
        csv << "run,seed,lambda,relative_residual,refit_fitness,token_count,degenerate,equation\n";
        json per_run_seconds = json::array();
        for (std::size_t i = 0; i < runs; ++i) {
            const fs::path dir = out / run_dir_name(i);
            ensure_dir(dir);
            write_run_files(dir, results[i]);
            json r = run_report(i, dir);
            json rt = r;
            rt["timings"] = {{"evolution_seconds", results[i].seconds}};
            write_json(dir / "report.json", rt);
            per_run_seconds.push_back(results[i].seconds);

            const auto& m = results[i].model();
            chosen.push_back(m);
            json entry = {{"run", i},
                          {"seed", seed + i},
                          {"report", run_dir_name(i) + "/report.json"},
                          {"equation", equation_string(m)},
                          {"lambda", m.lambda},
                          {"relative_residual", m.relative_residual},
                          {"token_count", token_count(m)},
                          {"degenerate", m.degenerate}};
            if (r.contains("analysis"))
                entry["analysis"] = r["analysis"];
            entries.push_back(entry);
            csv << i << ',' << seed + i << ',' << fmt(m.lambda) << ',' << fmt(m.relative_residual) << ','
                << fmt(m.refit_fitness) << ',' << token_count(m) << ',' << (m.degenerate ? 1 : 0) << ','
                << csv_quote(equation_string(m)) << '\n';
        }
        write_text(out / "runs.csv", csv.str());
        const std::size_t best = selector.select(chosen);
        write_run_files(out, results[best]);
        result.report = {{"schema", kReportSchema},
                         {"command", to_string(command)},
                         {"seed", seed},
                         {"config", config},
                         {"data", problem.info},
                         {"runs", entries},
                         {"best_run", best},
                         {"model", model_to_json(chosen[best])},
                         {"degenerate", chosen[best].degenerate}};
        if (analysis)
            result.report["analysis"] = analysis(chosen[best], &out);
        result.report["timings"] = {{"data_seconds", data_seconds},
                                    {"run_evolution_seconds", per_run_seconds},
                                    {"total_seconds", data_seconds + seconds_since(t0)}};
    }
    write_json(out / "report.json", result.report);
    result.exit_code = result.report["degenerate"].get<bool>() ? kExitDegenerate : kExitOk;
    return result;
}

// ---- PDE -------------------------------------------------------------------

struct PdeInput {
    GridField field;
    std::string source;
};

PdeInput load_pde_field(const json& config) {
    return stage("load", [&] {
        if (auto path = optional_path(config, "pde.dataset"))
            return PdeInput{load_grid(*path), "dataset:" + *path};
        return PdeInput{generate_field(synthetic_spec(config)), "synthetic"};
    });
}

Problem pde_problem(const PdeInput& input, const json& config) {
    const WorkspaceSpec wspec = stage("config", [&] { return workspace_spec(config); });
    const int k = config.at("evolution").at("k").get<int>();
    Workspace ws = stage("workspace", [&] { return build_workspace(input.field, wspec); });
    DerivativeFamily family = stage("workspace", [&] { return derivative_family(input.field, wspec.max_order, k); });
    stage("workspace", [&] { precompute_tokens(ws, family); });
    json info = {{"source", input.source},
                 {"axis_names", input.field.axis_names},
                 {"axis_sizes", input.field.axis_sizes},
                 {"axis_steps", input.field.axis_steps},
                 {"workspace_samples", ws.n_samples()},
                 {"token_count", admissible_tokens(family).size()}};
    return Problem{std::move(ws), FamilyConfig{family}, std::move(info)};
}

// ---- Floquet ---------------------------------------------------------------

struct FloquetContext {
    RodSpec rod;
    std::pair<double, double> range;
    double delta = 1e-3;
    QuadraticPolynomial oracle;
    std::optional<QuadraticPolynomial> reference;
    std::vector<double> expected_frequencies; ///< the two dominant a1 frequencies of the oracle
};

FloquetContext floquet_context(const json& config) {
    FloquetContext ctx;
    ctx.rod = stage("config", [&] { return rod_spec(config); });
    ctx.range = stage("config", [&] { return omega_range(config); });
    ctx.delta = config.at("floquet").at("roots_delta").get<double>();
    if (!(ctx.delta > 0.0))
        throw InputError("config: floquet.roots_delta must be positive");
    ctx.oracle = stage("oracle", [&] { return oracle_fourier_fit(ctx.rod); });
    try {
        ctx.reference = analytical_polynomial(ctx.rod);
    } catch (const InputError&) {
        ctx.reference.reset();
    }
    auto a1 = ctx.oracle.a1.terms;
    std::sort(a1.begin(), a1.end(), [](const auto& a, const auto& b) {
        return std::abs(a.first) > std::abs(b.first);
    });
    for (std::size_t i = 0; i < std::min<std::size_t>(2, a1.size()); ++i)
        ctx.expected_frequencies.push_back(a1[i].second);
    std::sort(ctx.expected_frequencies.begin(), ctx.expected_frequencies.end());
    return ctx;
}

double relative_error(double value, double reference) {
    return reference == 0.0 ? std::abs(value) : std::abs(value - reference) / std::abs(reference);
}

// Set of (frequency, power) over target and terms, for single-token cosine models.
std::set<std::pair<double, int>> cos_term_set(const DiscoveredModel& m) {
    std::set<std::pair<double, int>> out;
    auto add = [&](const Term& t) {
        if (t.size() != 1)
            return;
        if (const auto* c = std::get_if<CosToken>(&t.tokens()[0]))
            out.insert({c->frequency, c->power});
    };
    add(m.target);
    for (const auto& t : m.terms)
        add(t);
    return out;
}

std::size_t cos_token_total(const DiscoveredModel& m) {
    return 1 + m.terms.size();
}

json floquet_analysis(const FloquetContext& ctx, const DiscoveredModel& m, const fs::path* dir) {
    json a;
    const auto set = cos_term_set(m);
    json term_set = json::array();
    for (const auto& [f, p] : set)
        term_set.push_back({f, p});
    a["term_set"] = term_set;
    std::set<std::pair<double, int>> expected{{0.0, 2}, {0.0, 0}};
    for (double f : ctx.expected_frequencies)
        expected.insert({f, 1});
    a["expected_term_set"] = json::array();
    for (const auto& [f, p] : expected)
        a["expected_term_set"].push_back({f, p});
    a["matches_expected_terms"] = set == expected && cos_token_total(m) == expected.size();

    if (m.degenerate) {
        a["usable"] = false;
        a["roots_rmse"] = {{"oracle_fit", nullptr}, {"reference_form", nullptr}};
        return a;
    }
    QuadraticPolynomial poly = polynomial_from_model(m);
    const bool normalized = normalize_leading(poly);
    a["usable"] = true;
    a["normalized"] = normalized;
    a["polynomial"] = polynomial_to_json(poly);
    a["oracle_fit"] = polynomial_to_json(ctx.oracle);
    a["reference_form"] = ctx.reference ? polynomial_to_json(*ctx.reference) : json(nullptr);

    const double rmse_oracle = roots_rmse(poly, ctx.oracle, ctx.range, ctx.delta);
    const double rmse_ref = ctx.reference ? roots_rmse(poly, *ctx.reference, ctx.range, ctx.delta)
                                          : std::numeric_limits<double>::quiet_NaN();
    a["roots_rmse"] = {{"oracle_fit", std::isfinite(rmse_oracle) ? json(rmse_oracle) : json(nullptr)},
                       {"reference_form", std::isfinite(rmse_ref) ? json(rmse_ref) : json(nullptr)}};
    a["band_agreement"] = band_agreement(poly, ctx.oracle, ctx.range, ctx.delta);

    json coeffs = json::array();
    std::set<double> freqs;
    for (const auto& t : ctx.oracle.a1.terms)
        freqs.insert(t.second);
    for (const auto& t : poly.a1.terms)
        freqs.insert(t.second);
    if (ctx.reference)
        for (const auto& t : ctx.reference->a1.terms)
            freqs.insert(t.second);
    for (double f : freqs) {
        const double d = poly.a1.amplitude(f);
        const double o = ctx.oracle.a1.amplitude(f);
        json row = {{"frequency", f}, {"discovered", d}, {"oracle_fit", o}, {"relative_error_oracle", relative_error(d, o)}};
        if (ctx.reference) {
            const double r = ctx.reference->a1.amplitude(f);
            row["reference_form"] = r;
            row["relative_error_reference"] = relative_error(d, r);
        }
        coeffs.push_back(row);
    }
    a["a1_coefficients"] = coeffs;

    if (dir) {
        save_roots_csv(*dir / "roots.csv", poly, ctx.range, ctx.delta);
        std::ostringstream bands;
        bands << "omega,discovered,oracle\n";
        for (double w : omega_grid(ctx.range, ctx.delta))
            bands << fmt(w) << ',' << to_string(classify_band(poly, w)) << ','
                  << to_string(classify_band(ctx.oracle, w)) << '\n';
        write_text(*dir / "bands.csv", bands.str());
    }
    return a;
}

std::vector<FloquetSample> floquet_samples(const json& config, const FloquetContext& ctx, int npts,
                                           LambdaMode mode, unsigned threads, std::string& source) {
    return stage("load", [&] {
        if (auto path = optional_path(config, "floquet.dataset")) {
            bool has_im = false;
            auto samples = load_floquet_csv(*path, &has_im);
            if (mode == LambdaMode::Complex && !has_im)
                throw InputError(*path + " has no lambda_im column; use floquet.lambda_mode real or abs");
            if (samples.size() < 3)
                throw InputError(*path + " needs at least 3 samples");
            source = "dataset:" + *path;
            return samples;
        }
        source = "forcing-model";
        return generate_dataset(npts, ctx.range, ctx.rod, threads);
    });
}

Problem floquet_problem(const json& config, std::span<const FloquetSample> samples, LambdaMode mode,
                        const FloquetContext& ctx, const std::string& source) {
    const CosFamily family = stage("config", [&] { return cos_family(config); });
    Workspace ws = stage("workspace", [&] { return build_floquet_workspace(samples, mode); });
    stage("workspace", [&] { precompute_tokens(ws, family); });
    json info = {{"source", source},
                 {"samples", samples.size()},
                 {"omega_range", {ctx.range.first, ctx.range.second}},
                 {"lambda_mode", to_string(mode)},
                 {"rod",
                  {{"gamma", ctx.rod.gamma},
                   {"sigma", ctx.rod.sigma},
                   {"n_blocks", ctx.rod.n_blocks},
                   {"absorber_blocks", ctx.rod.absorber_blocks},
                   {"absorber_strength", ctx.rod.absorber_strength}}},
                 {"token_count", admissible_tokens(family).size()}};
    return Problem{std::move(ws), FamilyConfig{family}, std::move(info)};
}

int config_npts(const json& config) {
    const json& n = config.at("floquet").at("npts");
    if (!n.is_number_integer())
        throw InputError("config: floquet.npts must be an integer");
    return n.get<int>();
}

double median(std::vector<double> v) {
    if (v.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

CommandResult cmd_discover_pde(const json& config, const fs::path& out) {
    const auto t0 = Clock::now();
    const PdeInput input = load_pde_field(config);
    const Problem problem = pde_problem(input, config);
    return discover_command(Command::DiscoverPde, config, out, problem, nullptr, seconds_since(t0));
}

CommandResult cmd_discover_floquet(const json& config, const fs::path& out) {
    const auto t0 = Clock::now();
    const FloquetContext ctx = floquet_context(config);
    const LambdaMode mode = stage("config", [&] {
        return parse_lambda_mode(config.at("floquet").at("lambda_mode").get<std::string>());
    });
    std::string source;
    const auto samples = floquet_samples(config, ctx, config_npts(config), mode, config_threads(config), source);
    ensure_dir(out);
    save_floquet_csv(out / "dataset.csv", samples, mode == LambdaMode::Complex);
    save_roots_csv(out / "roots_oracle.csv", ctx.oracle, ctx.range, ctx.delta);
    const Problem problem = floquet_problem(config, samples, mode, ctx, source);
    return discover_command(
        Command::DiscoverFloquet, config, out, problem,
        [&](const DiscoveredModel& m, const fs::path* dir) { return floquet_analysis(ctx, m, dir); },
        seconds_since(t0));
}

CommandResult cmd_validate(const json& config, const fs::path& out) {
    const auto t0 = Clock::now();
    const auto report_path = optional_path(config, "validate.report");
    if (!report_path)
        throw InputError("validate needs a report (--report or validate.report)");
    const json report = stage("load", [&] { return read_json_file(*report_path); });
    if (!report.is_object() || report.value("schema", 0) != kReportSchema)
        throw InputError("load: " + *report_path + " is not a schema " + std::to_string(kReportSchema) + " report");
    if (report.value("command", std::string()) != "discover-pde")
        throw InputError("unsupported model: validation replays 1D PDE reports only, got '" +
                         report.value("command", std::string("?")) + "'");
    const DiscoveredModel model = stage("load", [&] { return model_from_json(report.at("model")); });
    std::vector<Term> all_terms = model.terms;
    all_terms.push_back(model.target);
    for (const Term& t : all_terms)
        for (const Token& tok : t.tokens())
            if (!std::holds_alternative<DerivativeToken>(tok))
                throw InputError("unsupported model: only derivative terms can be replayed");
    if (model.degenerate)
        throw InputError("unsupported model: the report holds a degenerate model");

    GridField reference = stage("load", [&] {
        if (auto ref = optional_path(config, "validate.reference"))
            return load_grid(*ref);
        json echo = merge_config(default_config(Command::DiscoverPde), report.at("config"));
        return load_pde_field(echo).field;
    });
    if (report.contains("data") && report["data"].contains("axis_sizes")) {
        const auto sizes = report["data"]["axis_sizes"].get<std::vector<std::size_t>>();
        if (sizes != reference.axis_sizes)
            throw InputError("shape mismatch: report grid and reference field differ");
    }
    const ReplayOptions opts = stage("config", [&] { return replay_options(config); });
    const GridField replay = stage("replay", [&] { return solve_discovered_1d(model, reference, opts); });
    const ErrorReport err = stage("errors", [&] { return error_report(reference, replay); });

    ensure_dir(out);
    save_grid(replay, out / "replay");
    save_grid(err.rmse_map, out / "rmse_map");
    save_grid(err.mae_map, out / "mae_map");
    const std::size_t nt = reference.axis_sizes[0];
    const std::size_t nx = reference.axis_sizes[1];
    const std::size_t mid = nx / 2;
    std::ostringstream series;
    series << "t,reference,replay\n";
    for (std::size_t i = 0; i < nt; ++i)
        series << fmt(reference.origin[0] + static_cast<double>(i) * reference.axis_steps[0]) << ','
               << fmt(reference.at({i, mid})) << ',' << fmt(replay.at({i, mid})) << '\n';
    write_text(out / "center_series.csv", series.str());

    double interior_max = 0.0;
    for (std::size_t j = 1; j + 1 < nx; ++j)
        interior_max = std::max(interior_max, err.rmse_map.values[j]);
    CommandResult result;
    result.report = {{"schema", kReportSchema},
                     {"command", "validate"},
                     {"source_report", *report_path},
                     {"config", config},
                     {"equation", equation_string(model)},
                     {"errors",
                      {{"rmse", err.rmse},
                       {"mae", err.mae},
                       {"relative_rmse", err.relative_rmse},
                       {"rmse_left_boundary", err.rmse_map.values.front()},
                       {"rmse_right_boundary", err.rmse_map.values.back()},
                       {"rmse_interior_max", interior_max},
                       {"center_index", mid}}},
                     {"timings", {{"total_seconds", seconds_since(t0)}}}};
    write_json(out / "report.json", result.report);
    return result;
}

CommandResult cmd_sweep(const json& config, const fs::path& out) {
    const auto t0 = Clock::now();
    const std::string target = config.at("sweep").at("target").get<std::string>();
    const std::size_t runs = config_runs(config);
    const unsigned threads = config_threads(config);
    const std::uint64_t seed = config_seed(config);
    const EvolutionConfig base = stage("config", [&] { return evolution_config(config); });
    const SelectorSpec selector = stage("config", [&] { return selector_spec(config); });
    const std::vector<double> lambdas = stage("config", [&] { return lambda_grid(config); });
    ensure_dir(out);
    CommandResult result;
    result.report = {{"schema", kReportSchema}, {"command", "sweep"}, {"seed", seed}, {"config", config}};

    if (target == "pde") {
        const PdeInput input = load_pde_field(config);
        const Problem problem = pde_problem(input, config);
        std::ostringstream csv;
        csv << "seed,lambda,relative_residual,refit_fitness,token_count,degenerate,selected,equation\n";
        json rows = json::array();
        for (std::size_t r = 0; r < runs; ++r) {
            EvolutionConfig c = base;
            c.seed = seed + r;
            const DiscoveryRun run = discover(c, lambdas, problem, selector, threads);
            for (std::size_t i = 0; i < run.models.size(); ++i) {
                const auto& m = run.models[i];
                csv << seed + r << ',' << fmt(run.lambdas[i]) << ',' << fmt(m.relative_residual) << ','
                    << fmt(m.refit_fitness) << ',' << token_count(m) << ',' << (m.degenerate ? 1 : 0) << ','
                    << (i == run.chosen ? 1 : 0) << ',' << csv_quote(equation_string(m)) << '\n';
            }
            rows.push_back({{"seed", seed + r}, {"lambda_sweep", sweep_table(run)}});
        }
        write_text(out / "sweep.csv", csv.str());
        result.report["data"] = problem.info;
        result.report["pde"] = rows;
    } else if (target == "floquet") {
        const FloquetContext ctx = floquet_context(config);
        const LambdaMode mode = stage("config", [&] {
            return parse_lambda_mode(config.at("floquet").at("lambda_mode").get<std::string>());
        });
        const json& grid = config.at("sweep").at("npts");
        if (!grid.is_array() || grid.empty())
            throw InputError("config: sweep.npts must be a non-empty array");
        std::ostringstream csv, summary;
        csv << "npts,run,seed,roots_rmse,log10_roots_rmse,roots_rmse_reference,matches_expected_terms,equation\n";
        summary << "npts,median_roots_rmse,median_log10_roots_rmse,finite_runs,expected_terms_runs\n";
        json points = json::array();
        std::vector<double> medians;
        for (const json& n : grid) {
            if (!n.is_number_integer())
                throw InputError("config: sweep.npts entries must be integers");
            const int npts = n.get<int>();
            std::string source;
            const auto samples = floquet_samples(config, ctx, npts, mode, threads, source);
            const Problem problem = floquet_problem(config, samples, mode, ctx, source);
            std::vector<DiscoveryRun> results(runs);
            std::vector<json> analyses(runs);
            parallel_for(runs, threads, [&](std::size_t i) {
                EvolutionConfig c = base;
                c.seed = seed + i;
                results[i] = discover(c, lambdas, problem, selector, 1);
                analyses[i] = floquet_analysis(ctx, results[i].model(), nullptr);
            });
            std::vector<double> rmse;
            std::size_t finite = 0, matched = 0;
            for (std::size_t i = 0; i < runs; ++i) {
                const json& a = analyses[i];
                const json& ro = a["roots_rmse"]["oracle_fit"];
                const json& rr = a["roots_rmse"]["reference_form"];
                const double v = ro.is_number() ? ro.get<double>() : std::numeric_limits<double>::infinity();
                const double vr = rr.is_number() ? rr.get<double>() : std::numeric_limits<double>::infinity();
                rmse.push_back(v);
                finite += std::isfinite(v) ? 1 : 0;
                matched += a["matches_expected_terms"].get<bool>() ? 1 : 0;
                csv << npts << ',' << i << ',' << seed + i << ',' << fmt(v) << ',' << fmt(std::log10(v)) << ','
                    << fmt(vr) << ',' << (a["matches_expected_terms"].get<bool>() ? 1 : 0) << ','
                    << csv_quote(equation_string(results[i].model())) << '\n';
            }
            const double med = median(rmse);
            medians.push_back(med);
            summary << npts << ',' << fmt(med) << ',' << fmt(std::log10(med)) << ',' << finite << ',' << matched
                    << '\n';
            points.push_back({{"npts", npts},
                              {"median_roots_rmse", std::isfinite(med) ? json(med) : json(nullptr)},
                              {"finite_runs", finite},
                              {"expected_terms_runs", matched}});
        }
        bool decreasing = true;
        for (std::size_t i = 1; i < medians.size(); ++i)
            decreasing = decreasing && medians[i] < medians[i - 1];
        write_text(out / "sweep.csv", csv.str());
        write_text(out / "sweep_summary.csv", summary.str());
        result.report["floquet"] = {{"points", points}, {"median_strictly_decreasing", decreasing}};
    } else {
        throw InputError("config: sweep.target must be 'floquet' or 'pde'");
    }
    result.report["timings"] = {{"total_seconds", seconds_since(t0)}};
    write_json(out / "report.json", result.report);
    return result;
}

CommandResult run_command(Command command, const json& config, const fs::path& out) {
    switch (command) {
    case Command::DiscoverPde:
        return cmd_discover_pde(config, out);
    case Command::DiscoverFloquet:
        return cmd_discover_floquet(config, out);
    case Command::Validate:
        return cmd_validate(config, out);
    case Command::Sweep:
        return cmd_sweep(config, out);
    }
    throw InputError("unknown command");
}

int exit_code_for(const std::exception& error) noexcept {
    if (dynamic_cast<const InputError*>(&error))
        return kExitInput;
    if (dynamic_cast<const NumericalError*>(&error))
        return kExitNumerical;
    if (dynamic_cast<const std::invalid_argument*>(&error))
        return kExitInput;
    return kExitInternal;
}

} // namespace eqdisc::cli
