#include "eqdisc_cli/config.hpp"

#include <eqdisc/errors.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace eqdisc::cli {

namespace {

json common_defaults() {
    return {
        {"seed", 1},
        {"runs", 1},
        {"threads", 1},
        {"lambda_grid", log_lambda_grid(10, 1e-6, 1e2)},
        {"selector", {{"mode", "parsimony"}, {"tolerance", 0.1}}},
        {"evolution",
         {{"M", 8},
          {"k", 3},
          {"n_pop", 10},
          {"n_epochs", 150},
          {"r_mutation", 0.4},
          {"r_crossover", 0.4},
          {"a_proc", 0.2},
          {"a_elite", 0.4},
          {"fitness_epsilon", 1e-9},
          {"tournament_size", 2},
          {"token_change_probability", 0.5},
          {"penalty", "standardized"},
          {"lasso_tol", 1e-10},
          {"lasso_max_iter", 10000},
          {"threads", 1}}},
    };
}

json mode_json(const Mode& m) {
    return {{"amplitude", m.amplitude}, {"wavenumber", m.wavenumber}, {"phase", m.phase},
            {"direction", m.direction}};
}

json pde_defaults() {
    const SyntheticSpec wave = default_wave_spec();
    json modes = json::array();
    for (const Mode& m : wave.modes)
        modes.push_back(mode_json(m));
    return {
        {"dataset", nullptr},
        {"synthetic",
         {{"equation", "wave"},
          {"coefficient", wave.coefficient},
          {"nt", wave.nt},
          {"nx", wave.nx},
          {"dt", wave.dt},
          {"dx", wave.dx},
          {"modes", modes},
          {"noise_level", 0.0},
          {"seed", 0}}},
        {"max_order", 2},
        {"differentiation", {{"window", 9}, {"poly_degree", 4}}},
        {"smoothing", {{"enabled", false}, {"sigma", 1.0}, {"radius", 3}}},
        {"margin", -1},
    };
}

json floquet_defaults() {
    json freqs = json::array();
    for (int b = 0; b <= 10; ++b)
        freqs.push_back(b);
    return {
        {"dataset", nullptr},
        {"npts", 35},
        {"omega_range", {0.0, 2.0}},
        {"gamma", 1.0},
        {"sigma", 0.2},
        {"n_blocks", 20},
        {"absorber_blocks", 400},
        {"absorber_strength", 1.0},
        {"lambda_mode", "complex"},
        {"frequencies", freqs},
        {"powers", {0, 1, 2}},
        {"roots_delta", 1e-3},
    };
}

void floquet_evolution_defaults(json& cfg) {
    cfg["evolution"]["n_epochs"] = 300;
    cfg["evolution"]["k"] = 1;
    cfg["selector"]["tolerance"] = 0.01;
}

bool compatible(const json& base, const json& value) {
    if (base.is_null())
        return true;
    if (base.is_number())
        return value.is_number();
    return base.type() == value.type();
}

void merge_into(json& base, const json& overlay, const std::string& path) {
    if (!overlay.is_object())
        throw InputError("config" + (path.empty() ? std::string() : " key '" + path + "'") +
                         " must be an object");
    for (auto it = overlay.begin(); it != overlay.end(); ++it) {
        const std::string key = path.empty() ? it.key() : path + "." + it.key();
        if (!base.contains(it.key()))
            throw InputError("unknown config key '" + key + "'");
        json& slot = base[it.key()];
        if (slot.is_object() && it.value().is_object()) {
            merge_into(slot, it.value(), key);
            continue;
        }
        if (!compatible(slot, it.value()))
            throw InputError("config key '" + key + "' expects " + std::string(slot.type_name()) +
                             ", got " + it.value().type_name());
        slot = it.value();
    }
}

const json& at_path(const json& config, const std::string& dotted) {
    const json* node = &config;
    std::size_t pos = 0;
    while (pos <= dotted.size()) {
        const std::size_t dot = dotted.find('.', pos);
        const std::string key = dotted.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (!node->is_object() || !node->contains(key))
            throw InputError("missing config key '" + dotted + "'");
        node = &(*node)[key];
        if (dot == std::string::npos)
            break;
        pos = dot + 1;
    }
    return *node;
}

double get_real(const json& config, const std::string& dotted) {
    const json& v = at_path(config, dotted);
    if (!v.is_number())
        throw InputError("config key '" + dotted + "' must be a number");
    return v.get<double>();
}

long long get_integer(const json& config, const std::string& dotted) {
    const json& v = at_path(config, dotted);
    if (v.is_number_integer())
        return v.get<long long>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15)
            return static_cast<long long>(d);
    }
    throw InputError("config key '" + dotted + "' must be an integer");
}

int get_int(const json& config, const std::string& dotted) {
    const long long v = get_integer(config, dotted);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw InputError("config key '" + dotted + "' is out of range");
    return static_cast<int>(v);
}

std::string get_string(const json& config, const std::string& dotted) {
    const json& v = at_path(config, dotted);
    if (!v.is_string())
        throw InputError("config key '" + dotted + "' must be a string");
    return v.get<std::string>();
}

std::vector<double> get_reals(const json& v, const std::string& dotted) {
    if (!v.is_array())
        throw InputError("config key '" + dotted + "' must be an array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
        if (!e.is_number())
            throw InputError("config key '" + dotted + "' must be an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

} // namespace

Command parse_command(const std::string& name) {
    if (name == "discover-pde")
        return Command::DiscoverPde;
    if (name == "discover-floquet")
        return Command::DiscoverFloquet;
    if (name == "validate")
        return Command::Validate;
    if (name == "sweep")
        return Command::Sweep;
    throw InputError("unknown command '" + name + "'");
}

std::string to_string(Command command) {
    switch (command) {
    case Command::DiscoverPde:
        return "discover-pde";
    case Command::DiscoverFloquet:
        return "discover-floquet";
    case Command::Validate:
        return "validate";
    case Command::Sweep:
        return "sweep";
    }
    return "?";
}

json default_config(Command command) {
    switch (command) {
    case Command::DiscoverPde: {
        json cfg = common_defaults();
        cfg["pde"] = pde_defaults();
        return cfg;
    }
    case Command::DiscoverFloquet: {
        json cfg = common_defaults();
        floquet_evolution_defaults(cfg);
        cfg["floquet"] = floquet_defaults();
        return cfg;
    }
    case Command::Validate:
        return {{"validate",
                 {{"report", nullptr},
                  {"reference", nullptr},
                  {"replay", {{"courant", 0.25}, {"diffusion", 0.25}, {"advection", 0.5}, {"max_substeps", 100000}}}}}};
    case Command::Sweep: {
        json cfg = common_defaults();
        floquet_evolution_defaults(cfg);
        cfg["runs"] = 100;
        cfg["pde"] = pde_defaults();
        cfg["floquet"] = floquet_defaults();
        cfg["sweep"] = {{"target", "floquet"}, {"npts", {20, 35, 50, 70}}};
        return cfg;
    }
    }
    throw InputError("unknown command");
}

json merge_config(const json& base, const json& overlay) {
    json out = base;
    merge_into(out, overlay, "");
    return out;
}

void apply_override(json& config, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw InputError("override '" + assignment + "' must look like key.path=value");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded())
        value = text;

    json overlay = value;
    std::size_t end = path.size();
    while (true) {
        const std::size_t dot = path.rfind('.', end - 1);
        const std::size_t begin = dot == std::string::npos ? 0 : dot + 1;
        const std::string key = path.substr(begin, end - begin);
        if (key.empty())
            throw InputError("override '" + assignment + "' has an empty key");
        overlay = json{{key, overlay}};
        if (dot == std::string::npos)
            break;
        end = dot;
    }
    merge_into(config, overlay, "");
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open config file " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded())
        throw InputError("config file " + path.string() + " is not valid JSON");
    return j;
}

std::size_t SelectorSpec::select(std::span<const DiscoveredModel> models) const {
    if (mode == "parsimony")
        return select_parsimonious(models, tolerance);
    return select_by_fitness(models);
}

EvolutionConfig evolution_config(const json& config) {
    EvolutionConfig c;
    c.M = get_int(config, "evolution.M");
    c.k = get_int(config, "evolution.k");
    c.n_pop = get_int(config, "evolution.n_pop");
    c.n_epochs = get_int(config, "evolution.n_epochs");
    c.r_mutation = get_real(config, "evolution.r_mutation");
    c.r_crossover = get_real(config, "evolution.r_crossover");
    c.a_proc = get_real(config, "evolution.a_proc");
    c.a_elite = get_real(config, "evolution.a_elite");
    c.fitness_epsilon = get_real(config, "evolution.fitness_epsilon");
    c.tournament_size = get_int(config, "evolution.tournament_size");
    c.token_change_probability = get_real(config, "evolution.token_change_probability");
    const std::string penalty = get_string(config, "evolution.penalty");
    if (penalty == "standardized")
        c.scaling = PenaltyScaling::Standardized;
    else if (penalty == "plain")
        c.scaling = PenaltyScaling::Plain;
    else
        throw InputError("evolution.penalty must be 'standardized' or 'plain'");
    c.lasso_tol = get_real(config, "evolution.lasso_tol");
    c.lasso_max_iter = get_int(config, "evolution.lasso_max_iter");
    const int threads = get_int(config, "evolution.threads");
    if (threads < 1)
        throw InputError("evolution.threads must be at least 1");
    c.threads = static_cast<unsigned>(threads);
    const long long seed = get_integer(config, "seed");
    if (seed < 0)
        throw InputError("seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(seed);
    c.validate();
    return c;
}

SelectorSpec selector_spec(const json& config) {
    SelectorSpec s;
    s.mode = get_string(config, "selector.mode");
    if (s.mode != "parsimony" && s.mode != "fitness")
        throw InputError("selector.mode must be 'parsimony' or 'fitness'");
    s.tolerance = get_real(config, "selector.tolerance");
    if (!(s.tolerance >= 0.0))
        throw InputError("selector.tolerance must be non-negative");
    return s;
}

std::vector<double> lambda_grid(const json& config) {
    std::vector<double> grid = get_reals(at_path(config, "lambda_grid"), "lambda_grid");
    if (grid.empty())
        throw InputError("lambda_grid must not be empty");
    for (double v : grid)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw InputError("lambda_grid entries must be finite and non-negative");
    return grid;
}

SyntheticSpec synthetic_spec(const json& config) {
    SyntheticSpec s;
    s.equation = parse_equation_kind(get_string(config, "pde.synthetic.equation"));
    s.coefficient = get_real(config, "pde.synthetic.coefficient");
    const long long nt = get_integer(config, "pde.synthetic.nt");
    const long long nx = get_integer(config, "pde.synthetic.nx");
    if (nt < 1 || nx < 1)
        throw InputError("pde.synthetic.nt and nx must be positive");
    s.nt = static_cast<std::size_t>(nt);
    s.nx = static_cast<std::size_t>(nx);
    s.dt = get_real(config, "pde.synthetic.dt");
    s.dx = get_real(config, "pde.synthetic.dx");
    s.noise_level = get_real(config, "pde.synthetic.noise_level");
    const long long seed = get_integer(config, "pde.synthetic.seed");
    if (seed < 0)
        throw InputError("pde.synthetic.seed must be non-negative");
    s.seed = static_cast<std::uint64_t>(seed);

    const json& modes = at_path(config, "pde.synthetic.modes");
    if (!modes.is_array())
        throw InputError("pde.synthetic.modes must be an array");
    static const std::set<std::string> known{"amplitude", "wavenumber", "phase", "direction"};
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const json& m = modes[i];
        const std::string where = "pde.synthetic.modes[" + std::to_string(i) + "]";
        if (!m.is_object())
            throw InputError(where + " must be an object");
        for (auto it = m.begin(); it != m.end(); ++it)
            if (!known.count(it.key()))
                throw InputError("unknown config key '" + where + "." + it.key() + "'");
        Mode mode;
        auto real = [&](const char* key, double& out) {
            if (!m.contains(key))
                return;
            if (!m[key].is_number())
                throw InputError(where + "." + key + " must be a number");
            out = m[key].get<double>();
        };
        real("amplitude", mode.amplitude);
        real("wavenumber", mode.wavenumber);
        real("phase", mode.phase);
        if (m.contains("direction")) {
            if (!m["direction"].is_number_integer())
                throw InputError(where + ".direction must be -1, 0 or 1");
            mode.direction = m["direction"].get<int>();
        }
        s.modes.push_back(mode);
    }
    s.validate();
    return s;
}

WorkspaceSpec workspace_spec(const json& config) {
    WorkspaceSpec w;
    w.max_order = get_int(config, "pde.max_order");
    w.window = get_int(config, "pde.differentiation.window");
    w.poly_degree = get_int(config, "pde.differentiation.poly_degree");
    w.margin = get_int(config, "pde.margin");
    if (at_path(config, "pde.smoothing.enabled").get<bool>()) {
        SmoothingSpec sm;
        sm.sigma = get_real(config, "pde.smoothing.sigma");
        sm.radius = get_int(config, "pde.smoothing.radius");
        w.smoothing = sm;
    }
    return w;
}

RodSpec rod_spec(const json& config) {
    RodSpec r;
    r.gamma = get_real(config, "floquet.gamma");
    r.sigma = get_real(config, "floquet.sigma");
    r.n_blocks = get_int(config, "floquet.n_blocks");
    r.absorber_blocks = get_int(config, "floquet.absorber_blocks");
    r.absorber_strength = get_real(config, "floquet.absorber_strength");
    r.validate();
    return r;
}

CosFamily cos_family(const json& config) {
    CosFamily f;
    f.frequencies = get_reals(at_path(config, "floquet.frequencies"), "floquet.frequencies");
    f.powers.clear();
    const json& powers = at_path(config, "floquet.powers");
    if (!powers.is_array())
        throw InputError("floquet.powers must be an array of integers");
    for (const json& p : powers) {
        if (!p.is_number_integer() || p.get<int>() < 0)
            throw InputError("floquet.powers must be an array of non-negative integers");
        f.powers.push_back(p.get<int>());
    }
    if (f.frequencies.empty() || f.powers.empty())
        throw InputError("floquet.frequencies and floquet.powers must not be empty");
    return f;
}

std::pair<double, double> omega_range(const json& config) {
    const std::vector<double> r = get_reals(at_path(config, "floquet.omega_range"), "floquet.omega_range");
    if (r.size() != 2 || !(r[1] > r[0]))
        throw InputError("floquet.omega_range must be [lo, hi] with hi > lo");
    return {r[0], r[1]};
}

ReplayOptions replay_options(const json& config) {
    ReplayOptions o;
    o.courant = get_real(config, "validate.replay.courant");
    o.diffusion = get_real(config, "validate.replay.diffusion");
    o.advection = get_real(config, "validate.replay.advection");
    o.max_substeps = get_int(config, "validate.replay.max_substeps");
    return o;
}

std::optional<std::string> optional_path(const json& config, const std::string& dotted) {
    const json* node = &config;
    std::size_t pos = 0;
    while (true) {
        const std::size_t dot = dotted.find('.', pos);
        const std::string key = dotted.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (!node->is_object() || !node->contains(key))
            return std::nullopt;
        node = &(*node)[key];
        if (dot == std::string::npos)
            break;
        pos = dot + 1;
    }
    if (node->is_null())
        return std::nullopt;
    if (!node->is_string())
        throw InputError("config key '" + dotted + "' must be a path string");
    return node->get<std::string>();
}

} // namespace eqdisc::cli
