#include "eqdisc/pde_lab.hpp"

#include "eqdisc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace eqdisc {

namespace {

// 4th-order central differences in the interior, 2nd-order next to the ends.
double d1(const std::vector<double>& u, std::size_t i, double dx) {
    const std::size_t n = u.size();
    if (i >= 2 && i + 2 < n)
        return (-u[i + 2] + 8.0 * u[i + 1] - 8.0 * u[i - 1] + u[i - 2]) / (12.0 * dx);
    return (u[i + 1] - u[i - 1]) / (2.0 * dx);
}

double d2(const std::vector<double>& u, std::size_t i, double dx) {
    const std::size_t n = u.size();
    if (i >= 2 && i + 2 < n)
        return (-u[i + 2] + 16.0 * u[i + 1] - 30.0 * u[i] + 16.0 * u[i - 1] - u[i - 2]) / (12.0 * dx * dx);
    return (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dx * dx);
}

// Spatial part a_xx u_xx + a_x u_x + a_0 u on interior points; ends are 0.
std::vector<double> spatial(const LinearModel& m, const std::vector<double>& u, double dx) {
    std::vector<double> out(u.size(), 0.0);
    for (std::size_t i = 1; i + 1 < u.size(); ++i)
        out[i] = m.u_xx * d2(u, i, dx) + m.u_x * d1(u, i, dx) + m.u * u[i];
    return out;
}

// Reference value at spatial index `ix` and time index position `s`
// (fractional), by 4-point Lagrange interpolation over time rows.
double boundary_value(const GridField& ref, std::size_t ix, double s) {
    const std::size_t nt = ref.axis_sizes[0];
    const std::size_t nx = ref.axis_sizes[1];
    auto row = [&](std::size_t t) { return ref.values[t * nx + ix]; };
    if (nt == 1)
        return row(0);
    if (nt < 4) {
        const auto t0 = std::min(static_cast<std::size_t>(std::floor(s)), nt - 2);
        const double f = s - static_cast<double>(t0);
        return (1.0 - f) * row(t0) + f * row(t0 + 1);
    }
    const double near = std::round(s);
    if (std::abs(s - near) < 1e-12)
        return row(static_cast<std::size_t>(near));
    const long long base = std::clamp(static_cast<long long>(std::floor(s)) - 1, 0LL,
                                      static_cast<long long>(nt) - 4);
    double value = 0.0;
    for (int a = 0; a < 4; ++a) {
        double w = 1.0;
        for (int b = 0; b < 4; ++b)
            if (b != a)
                w *= (s - static_cast<double>(base + b)) / static_cast<double>(a - b);
        value += w * row(static_cast<std::size_t>(base + a));
    }
    return value;
}

void set_ends(std::vector<double>& u, const GridField& ref, double s) {
    u.front() = boundary_value(ref, 0, s);
    u.back() = boundary_value(ref, u.size() - 1, s);
}

GridField replay_second_order(const LinearModel& m, const GridField& ref, const ReplayOptions& opt) {
    const std::size_t nt = ref.axis_sizes[0];
    const std::size_t nx = ref.axis_sizes[1];
    const double dt_out = ref.axis_steps[0];
    const double dx = ref.axis_steps[1];

    // u_tt = -beta u_t + R(u),  R(u) = -(a_xx u_xx + a_x u_x + a_0 u) / a_tt
    const double beta = m.u_t / m.u_tt;
    const double c2 = -m.u_xx / m.u_tt;
    if (c2 < 0.0)
        throw InputError("model is not hyperbolic: u_tt and u_xx have the same sign");
    const double v = std::abs(m.u_x / m.u_tt);
    double dt_max = std::numeric_limits<double>::infinity();
    if (c2 > 0.0)
        dt_max = std::min(dt_max, opt.courant * dx / std::sqrt(c2));
    if (v > 0.0)
        dt_max = std::min(dt_max, opt.courant * dx * dx / v);
    const double react = std::abs(m.u / m.u_tt);
    if (react > 0.0)
        dt_max = std::min(dt_max, opt.courant / std::sqrt(react));
    const double steps = std::ceil(dt_out / dt_max - 1e-12);
    if (!(steps <= opt.max_substeps))
        throw NumericalError("time-step bound needs more than max_substeps substeps");
    const int sub = std::max(1, static_cast<int>(steps));
    const double h = dt_out / sub;

    auto R = [&](const std::vector<double>& u) {
        auto r = spatial(m, u, dx);
        for (auto& x : r)
            x /= -m.u_tt;
        return r;
    };

    GridField out = ref.with_values(std::vector<double>(ref.size(), 0.0));
    std::vector<double> u0(ref.values.begin(), ref.values.begin() + static_cast<std::ptrdiff_t>(nx));
    std::copy(u0.begin(), u0.end(), out.values.begin());
    if (nt == 1)
        return out;

    // Initial velocity from the first two rows, corrected to third order.
    std::vector<double> u1row(ref.values.begin() + static_cast<std::ptrdiff_t>(nx),
                              ref.values.begin() + static_cast<std::ptrdiff_t>(2 * nx));
    const auto r0 = R(u0);
    std::vector<double> v0(nx), a0(nx), j0(nx);
    for (std::size_t i = 0; i < nx; ++i)
        v0[i] = (u1row[i] - u0[i]) / dt_out;
    for (int it = 0; it < 4; ++it) {
        const auto rv = R(v0);
        for (std::size_t i = 0; i < nx; ++i) {
            a0[i] = -beta * v0[i] + r0[i];
            j0[i] = -beta * a0[i] + rv[i];
        }
        for (std::size_t i = 0; i < nx; ++i)
            v0[i] = (u1row[i] - u0[i]) / dt_out - 0.5 * dt_out * a0[i] - dt_out * dt_out / 6.0 * j0[i];
    }
    {
        const auto rv = R(v0);
        for (std::size_t i = 0; i < nx; ++i) {
            a0[i] = -beta * v0[i] + r0[i];
            j0[i] = -beta * a0[i] + rv[i];
        }
    }

    std::vector<double> prev = u0;
    std::vector<double> cur(nx);
    for (std::size_t i = 0; i < nx; ++i)
        cur[i] = u0[i] + h * v0[i] + 0.5 * h * h * a0[i] + h * h * h / 6.0 * j0[i];
    set_ends(cur, ref, 1.0 / sub);

    std::vector<double> next(nx);
    const double damp_minus = 1.0 - 0.5 * beta * h;
    const double damp_plus = 1.0 + 0.5 * beta * h;
    const auto total = static_cast<long long>(nt - 1) * sub;
    for (long long step = 1; step <= total; ++step) {
        if (step % sub == 0) {
            const auto row = static_cast<std::size_t>(step / sub);
            std::copy(cur.begin(), cur.end(), out.values.begin() + static_cast<std::ptrdiff_t>(row * nx));
        }
        if (step == total)
            break;
        const auto r = R(cur);
        for (std::size_t i = 1; i + 1 < nx; ++i)
            next[i] = (2.0 * cur[i] - damp_minus * prev[i] + h * h * r[i]) / damp_plus;
        set_ends(next, ref, static_cast<double>(step + 1) / sub);
        std::swap(prev, cur);
        std::swap(cur, next);
    }
    return out;
}

GridField replay_first_order(const LinearModel& m, const GridField& ref, const ReplayOptions& opt) {
    const std::size_t nt = ref.axis_sizes[0];
    const std::size_t nx = ref.axis_sizes[1];
    const double dt_out = ref.axis_steps[0];
    const double dx = ref.axis_steps[1];

    // u_t = L(u) = -(a_xx u_xx + a_x u_x + a_0 u) / a_t
    const double diff = -m.u_xx / m.u_t;
    if (diff < 0.0)
        throw InputError("model is ill-posed forward in time (negative diffusivity)");
    const double v = std::abs(m.u_x / m.u_t);
    const double react = std::abs(m.u / m.u_t);
    double dt_max = std::numeric_limits<double>::infinity();
    if (diff > 0.0)
        dt_max = std::min(dt_max, opt.diffusion * dx * dx / diff);
    if (v > 0.0)
        dt_max = std::min(dt_max, opt.advection * dx / v);
    if (react > 0.0)
        dt_max = std::min(dt_max, 1.0 / react);
    const double steps = std::ceil(dt_out / dt_max - 1e-12);
    if (!(steps <= opt.max_substeps))
        throw NumericalError("time-step bound needs more than max_substeps substeps");
    const int sub = std::max(1, static_cast<int>(steps));
    const double h = dt_out / sub;

    auto L = [&](const std::vector<double>& u) {
        auto r = spatial(m, u, dx);
        for (auto& x : r)
            x /= -m.u_t;
        return r;
    };

    GridField out = ref.with_values(std::vector<double>(ref.size(), 0.0));
    std::vector<double> u(ref.values.begin(), ref.values.begin() + static_cast<std::ptrdiff_t>(nx));
    std::copy(u.begin(), u.end(), out.values.begin());
    std::vector<double> stage(nx);
    const auto total = static_cast<long long>(nt - 1) * sub;
    for (long long step = 0; step < total; ++step) {
        const auto k1 = L(u);
        for (std::size_t i = 0; i < nx; ++i)
            stage[i] = u[i] + 0.5 * h * k1[i];
        const auto k2 = L(stage);
        for (std::size_t i = 0; i < nx; ++i)
            stage[i] = u[i] + 0.5 * h * k2[i];
        const auto k3 = L(stage);
        for (std::size_t i = 0; i < nx; ++i)
            stage[i] = u[i] + h * k3[i];
        const auto k4 = L(stage);
        for (std::size_t i = 1; i + 1 < nx; ++i)
            u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        set_ends(u, ref, static_cast<double>(step + 1) / sub);
        if ((step + 1) % sub == 0) {
            const auto row = static_cast<std::size_t>((step + 1) / sub);
            std::copy(u.begin(), u.end(), out.values.begin() + static_cast<std::ptrdiff_t>(row * nx));
        }
    }
    return out;
}

} // namespace

void SyntheticSpec::validate() const {
    if (nt < 1 || nx < 1)
        throw InputError("synthetic grid needs nt, nx >= 1");
    if (!(dt > 0.0) || !(dx > 0.0))
        throw InputError("synthetic grid steps must be positive");
    if (!std::isfinite(coefficient))
        throw InputError("equation coefficient must be finite");
    if (equation == EquationKind::Heat && coefficient < 0.0)
        throw InputError("diffusivity must be non-negative");
    if (noise_level < 0.0)
        throw InputError("noise level must be non-negative");
    for (const auto& m : modes)
        if (m.direction < -1 || m.direction > 1)
            throw InputError("mode direction must be -1, 0 or 1");
}

SyntheticSpec default_wave_spec() {
    SyntheticSpec s;
    s.equation = EquationKind::Wave;
    s.coefficient = 1.0;
    s.modes = {{2.0, 1.0, 0.0, 0}, {1.0, 2.0, 0.5, 0}, {0.5, 3.0, 1.0, 0}};
    return s;
}

SyntheticSpec default_heat_spec() {
    SyntheticSpec s;
    s.equation = EquationKind::Heat;
    s.coefficient = 0.1;
    s.modes = {{2.0, 1.0, 0.0, 0}, {1.0, 2.0, 0.5, 0}, {0.5, 3.0, 1.0, 0}};
    return s;
}

EquationKind parse_equation_kind(const std::string& name) {
    if (name == "wave")
        return EquationKind::Wave;
    if (name == "heat")
        return EquationKind::Heat;
    throw InputError("unknown equation kind '" + name + "' (expected wave or heat)");
}

std::string to_string(EquationKind kind) { return kind == EquationKind::Wave ? "wave" : "heat"; }

GridField generate_field(const SyntheticSpec& spec) {
    spec.validate();
    std::vector<double> values(spec.nt * spec.nx, 0.0);
    const double c = spec.coefficient;
    for (std::size_t it = 0; it < spec.nt; ++it) {
        const double t = static_cast<double>(it) * spec.dt;
        for (std::size_t ix = 0; ix < spec.nx; ++ix) {
            const double x = static_cast<double>(ix) * spec.dx;
            double u = 0.0;
            for (const auto& m : spec.modes) {
                const double k = m.wavenumber;
                if (spec.equation == EquationKind::Heat) {
                    u += m.amplitude * std::exp(-c * k * k * t) * std::sin(k * x + m.phase);
                } else if (m.direction == 0) {
                    u += m.amplitude * std::sin(k * x + m.phase) * std::cos(k * c * t);
                } else {
                    u += m.amplitude * std::sin(k * (x - m.direction * c * t) + m.phase);
                }
            }
            values[it * spec.nx + ix] = u;
        }
    }
    GridField field = make_field({"t", "x"}, {spec.nt, spec.nx}, {spec.dt, spec.dx}, std::move(values));
    if (spec.noise_level > 0.0)
        field = add_gaussian_noise(field, spec.noise_level, spec.seed);
    return field;
}

DerivativeFamily derivative_family(const GridField& field, int max_order, int max_tokens) {
    DerivativeFamily f;
    f.axis_names = field.axis_names;
    f.max_order = max_order;
    f.max_tokens = max_tokens;
    return f;
}

Workspace build_workspace(const GridField& field, const WorkspaceSpec& spec) {
    field.validate();
    if (spec.max_order < 1)
        throw InputError("workspace max_order must be at least 1");
    const GridField base = spec.smoothing ? gaussian_smooth(field, *spec.smoothing) : field;
    const auto m = static_cast<std::size_t>(spec.effective_margin());
    const std::size_t d = field.dims();
    std::vector<std::size_t> kept(d);
    std::size_t n = 1;
    for (std::size_t a = 0; a < d; ++a) {
        if (field.axis_sizes[a] <= 2 * m)
            throw InputError("axis '" + field.axis_names[a] + "' is too short for a margin of " +
                             std::to_string(m));
        kept[a] = field.axis_sizes[a] - 2 * m;
        n *= kept[a];
    }

    auto trimmed = [&](const GridField& f) {
        std::vector<double> out;
        out.reserve(n);
        std::vector<std::size_t> idx(d, 0);
        for (std::size_t flat = 0; flat < n; ++flat) {
            std::size_t rem = flat;
            for (std::size_t a = d; a-- > 0;) {
                idx[a] = rem % kept[a] + m;
                rem /= kept[a];
            }
            out.push_back(f.values[f.offset(idx)]);
        }
        return out;
    };

    Workspace ws(n, field.axis_names);
    ws.set_base(derivative_variable(field.axis_names, 0, 0), trimmed(base));
    for (std::size_t a = 0; a < d; ++a)
        for (int o = 1; o <= spec.max_order; ++o) {
            DiffSpec ds;
            ds.axis = a;
            ds.order = o;
            ds.window = spec.window;
            ds.poly_degree = spec.poly_degree;
            ws.set_base(derivative_variable(field.axis_names, a, o), trimmed(differentiate(base, ds)));
        }
    return ws;
}

LinearModel linear_model(const DiscoveredModel& model) {
    LinearModel lm;
    auto add = [&](const Term& term, double coef) {
        if (term.size() != 1 || !std::holds_alternative<DerivativeToken>(term.tokens().front()))
            throw InputError("the replay solver only handles linear single-derivative terms");
        const auto& t = std::get<DerivativeToken>(term.tokens().front());
        if (t.order == 0)
            lm.u += coef;
        else if (t.axis == 0 && t.order == 1)
            lm.u_t += coef;
        else if (t.axis == 0 && t.order == 2)
            lm.u_tt += coef;
        else if (t.axis == 1 && t.order == 1)
            lm.u_x += coef;
        else if (t.axis == 1 && t.order == 2)
            lm.u_xx += coef;
        else
            throw InputError("the replay solver handles derivatives up to second order in (t, x)");
    };
    add(model.target, 1.0);
    for (std::size_t i = 0; i < model.terms.size(); ++i)
        add(model.terms[i], -model.coefficients[i]);
    return lm;
}

GridField solve_discovered_1d(const LinearModel& model, const GridField& reference,
                              const ReplayOptions& options) {
    reference.validate();
    if (reference.dims() != 2)
        throw InputError("the replay solver needs a (t, x) field");
    if (reference.axis_sizes[1] < 3)
        throw InputError("the replay solver needs at least 3 spatial points");
    if (model.u_tt != 0.0)
        return replay_second_order(model, reference, options);
    if (model.u_t != 0.0)
        return replay_first_order(model, reference, options);
    throw InputError("model has no time derivative; nothing to march");
}

GridField solve_discovered_1d(const DiscoveredModel& model, const GridField& reference,
                              const ReplayOptions& options) {
    return solve_discovered_1d(linear_model(model), reference, options);
}

ErrorReport error_report(const GridField& reference, const GridField& candidate) {
    if (reference.axis_sizes != candidate.axis_sizes)
        throw InputError("reference and candidate fields have different shapes");
    if (reference.dims() != 2)
        throw InputError("error maps need (t, x) fields");
    const std::size_t nt = reference.axis_sizes[0];
    const std::size_t nx = reference.axis_sizes[1];
    std::vector<double> rmse_map(nx, 0.0), mae_map(nx, 0.0);
    double se = 0.0;
    double ae = 0.0;
    double ref_sq = 0.0;
    for (std::size_t t = 0; t < nt; ++t)
        for (std::size_t x = 0; x < nx; ++x) {
            const double r = reference.values[t * nx + x];
            const double e = candidate.values[t * nx + x] - r;
            rmse_map[x] += e * e;
            mae_map[x] += std::abs(e);
            se += e * e;
            ae += std::abs(e);
            ref_sq += r * r;
        }
    for (std::size_t x = 0; x < nx; ++x) {
        rmse_map[x] = std::sqrt(rmse_map[x] / static_cast<double>(nt));
        mae_map[x] /= static_cast<double>(nt);
    }
    const auto count = static_cast<double>(nt * nx);
    ErrorReport rep;
    rep.rmse = std::sqrt(se / count);
    rep.mae = ae / count;
    const double ref_rms = std::sqrt(ref_sq / count);
    rep.relative_rmse = ref_rms > 0.0 ? rep.rmse / ref_rms : (rep.rmse == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    const std::vector<std::string> names{reference.axis_names[1]};
    const std::vector<std::size_t> sizes{nx};
    const std::vector<double> steps{reference.axis_steps[1]};
    const std::vector<double> origin{reference.origin[1]};
    rep.rmse_map = make_field(names, sizes, steps, std::move(rmse_map), origin);
    rep.mae_map = make_field(names, sizes, steps, std::move(mae_map), origin);
    return rep;
}

} // namespace eqdisc
