#include <eqdisc/errors.hpp>
#include <eqdisc/pde_lab.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace eqdisc;

namespace {

double rms(std::span<const double> v) {
    double s = 0.0;
    for (double x : v)
        s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
}

// Relative residual of a*lhs - rhs over the workspace.
double relative_residual(const Workspace& ws, const std::string& lhs, const std::string& rhs, double a) {
    const auto l = ws.base(lhs);
    const auto r = ws.base(rhs);
    std::vector<double> e(l.size());
    for (std::size_t i = 0; i < l.size(); ++i)
        e[i] = l[i] - a * r[i];
    return rms(e) / rms(l);
}

DiscoveredModel derivative_model(Token target, std::vector<std::pair<Token, double>> terms) {
    DiscoveredModel m;
    m.target = Term{target};
    for (auto& [t, c] : terms) {
        m.terms.push_back(Term{t});
        m.coefficients.push_back(c);
    }
    return m;
}

SyntheticSpec travelling(double c, std::size_t n) {
    SyntheticSpec s = default_wave_spec();
    s.coefficient = c;
    s.nt = n;
    s.nx = n;
    s.modes = {{1.0, 1.0, 0.2, 1}, {0.4, 2.0, 0.0, -1}};
    return s;
}

} // namespace

TEST(Synthetic, DefaultsAndParsing) {
    const SyntheticSpec w = default_wave_spec();
    EXPECT_EQ(w.nt, 100u);
    EXPECT_EQ(w.nx, 100u);
    EXPECT_EQ(w.modes.size(), 3u);
    EXPECT_EQ(default_heat_spec().coefficient, 0.1);
    EXPECT_EQ(parse_equation_kind("heat"), EquationKind::Heat);
    EXPECT_EQ(to_string(EquationKind::Wave), "wave");
    EXPECT_THROW(parse_equation_kind("burgers"), InputError);
    SyntheticSpec bad = w;
    bad.dx = 0.0;
    EXPECT_THROW(generate_field(bad), InputError);
    bad = w;
    bad.modes[0].direction = 2;
    EXPECT_THROW(generate_field(bad), InputError);
}

TEST(Synthetic, SingleModesSatisfyTheirEquations) {
    SyntheticSpec wave = default_wave_spec();
    wave.modes = {{1.0, 1.0, 0.0, 1}};  // sin(x - t)
    const Workspace w = build_workspace(generate_field(wave), WorkspaceSpec{});
    EXPECT_LE(relative_residual(w, "u_tt", "u_xx", 1.0), 1e-3);

    SyntheticSpec heat = default_heat_spec();
    heat.modes = {{1.0, 1.0, 0.0, 0}};
    const Workspace h = build_workspace(generate_field(heat), WorkspaceSpec{});
    EXPECT_LE(relative_residual(h, "u_t", "u_xx", 0.1), 1e-3);
}

TEST(Synthetic, MultiModeResidualsAreSmall) {
    const Workspace wave = build_workspace(generate_field(default_wave_spec()), WorkspaceSpec{});
    EXPECT_LE(relative_residual(wave, "u_tt", "u_xx", 1.0), 1e-3);
    const Workspace moving = build_workspace(generate_field(travelling(1.5, 80)), WorkspaceSpec{});
    EXPECT_LE(relative_residual(moving, "u_tt", "u_xx", 2.25), 5e-3);
    const Workspace heat = build_workspace(generate_field(default_heat_spec()), WorkspaceSpec{});
    EXPECT_LE(relative_residual(heat, "u_t", "u_xx", 0.1), 5e-3);
}

TEST(Synthetic, ResidualShrinksAtLeastQuadraticallyUnderRefinement) {
    SyntheticSpec coarse = travelling(1.5, 60);
    SyntheticSpec fine = coarse;
    fine.nt = fine.nx = 120;
    fine.dt = fine.dx = coarse.dx / 2;
    const double rc = relative_residual(build_workspace(generate_field(coarse), WorkspaceSpec{}), "u_tt", "u_xx", 2.25);
    const double rf = relative_residual(build_workspace(generate_field(fine), WorkspaceSpec{}), "u_tt", "u_xx", 2.25);
    EXPECT_GE(rc / rf, 3.5) << rc << " -> " << rf;
}

TEST(Synthetic, NoModesGivesZeroField) {
    SyntheticSpec s = default_wave_spec();
    s.modes.clear();
    const GridField f = generate_field(s);
    EXPECT_TRUE(std::all_of(f.values.begin(), f.values.end(), [](double v) { return v == 0.0; }));
}

TEST(Synthetic, NoiseIsSeeded) {
    SyntheticSpec s = default_wave_spec();
    s.noise_level = 0.01;
    s.seed = 3;
    const GridField a = generate_field(s);
    const GridField b = generate_field(s);
    EXPECT_EQ(a.values, b.values);
    s.seed = 4;
    EXPECT_NE(generate_field(s).values, a.values);
}

TEST(Workspace, ShapeAndDerivatives) {
    const GridField f = generate_field(default_wave_spec());
    const Workspace ws = build_workspace(f, WorkspaceSpec{});
    EXPECT_EQ(ws.n_samples(), 92u * 92u);
    for (const char* name : {"u", "u_t", "u_tt", "u_x", "u_xx"})
        EXPECT_TRUE(ws.has_base(name)) << name;
    DerivativeFamily fam = derivative_family(f, 2, 3);
    EXPECT_EQ(admissible_tokens(fam).size(), 5u);

    WorkspaceSpec wide;
    wide.margin = 10;
    EXPECT_EQ(build_workspace(f, wide).n_samples(), 80u * 80u);
    wide.margin = 50;
    EXPECT_THROW(build_workspace(f, wide), InputError);
    WorkspaceSpec zero;
    zero.max_order = 0;
    EXPECT_THROW(build_workspace(f, zero), InputError);
}

TEST(Workspace, SingleModeCurvature) {
    SyntheticSpec s = default_wave_spec();
    s.modes = {{1.0, 1.0, 0.3, 0}};
    const Workspace ws = build_workspace(generate_field(s), WorkspaceSpec{});
    // sin(x + phase) cos(t): u_xx = -u.
    EXPECT_LE(relative_residual(ws, "u_xx", "u", -1.0), 1e-4);
}

TEST(LinearModel, CollectsEverythingOnOneSide) {
    const DiscoveredModel m = derivative_model(derivative_token(0, 2), {{derivative_token(1, 2), 4.0},
                                                                        {derivative_token(0, 1), -0.5},
                                                                        {derivative_token(1, 1), 0.25},
                                                                        {derivative_token(0, 0), 2.0}});
    const LinearModel lm = linear_model(m);
    EXPECT_EQ(lm.u_tt, 1.0);
    EXPECT_EQ(lm.u_xx, -4.0);
    EXPECT_EQ(lm.u_t, 0.5);
    EXPECT_EQ(lm.u_x, -0.25);
    EXPECT_EQ(lm.u, -2.0);

    DiscoveredModel product = m;
    product.terms[0] = Term{derivative_token(1, 2), derivative_token(0, 0)};
    EXPECT_THROW(linear_model(product), InputError);
    DiscoveredModel high = m;
    high.terms[0] = Term{derivative_token(1, 3)};
    EXPECT_THROW(linear_model(high), InputError);
}

TEST(Replay, ExactWaveModelTracksTheReference) {
    const GridField ref = generate_field(default_wave_spec());
    const DiscoveredModel m = derivative_model(derivative_token(0, 2), {{derivative_token(1, 2), 1.0}});
    const GridField out = solve_discovered_1d(m, ref);
    const ErrorReport rep = error_report(ref, out);
    EXPECT_LE(rep.relative_rmse, 1e-2);
    EXPECT_EQ(rep.rmse_map.values.front(), 0.0);
    EXPECT_EQ(rep.rmse_map.values.back(), 0.0);
    // The first row is copied verbatim.
    for (std::size_t i = 0; i < ref.axis_sizes[1]; ++i)
        EXPECT_EQ(out.values[i], ref.values[i]);
}

TEST(Replay, TravellingWaveAndRefinement) {
    const DiscoveredModel m = derivative_model(derivative_token(0, 2), {{derivative_token(1, 2), 2.25}});
    const SyntheticSpec coarse = travelling(1.5, 60);
    SyntheticSpec fine = coarse;
    fine.nt = fine.nx = 120;
    fine.dt = fine.dx = coarse.dx / 2;
    const double e_coarse = error_report(generate_field(coarse), solve_discovered_1d(m, generate_field(coarse))).rmse;
    const double e_fine = error_report(generate_field(fine), solve_discovered_1d(m, generate_field(fine))).rmse;
    EXPECT_LE(e_coarse, 1e-2);
    EXPECT_LT(e_fine, e_coarse);
}

TEST(Replay, ZeroFieldStaysZero) {
    SyntheticSpec s = default_wave_spec();
    s.modes.clear();
    const GridField ref = generate_field(s);
    for (Token target : {derivative_token(0, 2), derivative_token(0, 1)}) {
        const DiscoveredModel m = derivative_model(target, {{derivative_token(1, 2), 0.5}});
        const GridField out = solve_discovered_1d(m, ref);
        EXPECT_TRUE(std::all_of(out.values.begin(), out.values.end(), [](double v) { return v == 0.0; }));
    }
}

TEST(Replay, Superposition) {
    SyntheticSpec a = default_heat_spec();
    a.modes = {{1.0, 1.0, 0.0, 0}};
    SyntheticSpec b = a;
    b.modes = {{0.5, 3.0, 1.0, 0}};
    SyntheticSpec ab = a;
    ab.modes = {a.modes[0], b.modes[0]};
    const DiscoveredModel m = derivative_model(derivative_token(0, 1), {{derivative_token(1, 2), 0.1}});
    const GridField ua = solve_discovered_1d(m, generate_field(a));
    const GridField ub = solve_discovered_1d(m, generate_field(b));
    const GridField uab = solve_discovered_1d(m, generate_field(ab));
    double worst = 0.0;
    for (std::size_t i = 0; i < uab.size(); ++i)
        worst = std::max(worst, std::abs(uab.values[i] - ua.values[i] - ub.values[i]));
    EXPECT_LE(worst, 1e-9);
}

TEST(Replay, HeatCoefficientPerturbationStaysInEnvelope) {
    const GridField ref = generate_field(default_heat_spec());
    const auto err = [&](double alpha) {
        const DiscoveredModel m = derivative_model(derivative_token(0, 1), {{derivative_token(1, 2), alpha}});
        return error_report(ref, solve_discovered_1d(m, ref)).relative_rmse;
    };
    const double exact = err(0.1);
    const double low = err(0.095);
    const double high = err(0.105);
    EXPECT_LE(exact, 1e-3);
    EXPECT_GT(low, exact);
    EXPECT_GT(high, exact);
    // A 5% diffusivity change moves the decay of the k = 3 mode by at most
    // 5% of its total decay over the window.
    EXPECT_LE(std::max(low, high), 0.05);
}

TEST(Replay, RejectsIllPosedModels) {
    const GridField ref = generate_field(default_heat_spec());
    EXPECT_THROW(solve_discovered_1d(derivative_model(derivative_token(0, 1), {{derivative_token(1, 2), -0.1}}), ref),
                 InputError);
    EXPECT_THROW(solve_discovered_1d(derivative_model(derivative_token(0, 2), {{derivative_token(1, 2), -1.0}}), ref),
                 InputError);
    EXPECT_THROW(solve_discovered_1d(derivative_model(derivative_token(1, 2), {{derivative_token(0, 0), -1.0}}), ref),
                 InputError);
    ReplayOptions tight;
    tight.max_substeps = 1;
    EXPECT_THROW(solve_discovered_1d(derivative_model(derivative_token(0, 1), {{derivative_token(1, 2), 10.0}}), ref,
                                     tight),
                 NumericalError);
}

TEST(ErrorReport, IdenticalShiftedAndNoisy) {
    const GridField ref = generate_field(default_wave_spec());
    const ErrorReport same = error_report(ref, ref);
    EXPECT_EQ(same.rmse, 0.0);
    EXPECT_EQ(same.mae, 0.0);
    EXPECT_EQ(same.relative_rmse, 0.0);

    std::vector<double> plus(ref.values);
    for (auto& v : plus)
        v += 1.0;
    const ErrorReport shifted = error_report(ref, ref.with_values(plus));
    EXPECT_NEAR(shifted.rmse, 1.0, 1e-12);
    EXPECT_NEAR(shifted.mae, 1.0, 1e-12);
    ASSERT_EQ(shifted.rmse_map.values.size(), ref.axis_sizes[1]);
    for (double v : shifted.rmse_map.values)
        EXPECT_NEAR(v, 1.0, 1e-12);

    std::vector<double> minus(ref.values);
    for (auto& v : minus)
        v -= 1.0;
    EXPECT_DOUBLE_EQ(error_report(ref, ref.with_values(minus)).rmse, shifted.rmse);

    // Gaussian noise of std s: rmse ~ s, mae ~ s sqrt(2/pi).
    const GridField noisy = add_gaussian_noise(ref, 0.05, 11);
    const ErrorReport n = error_report(ref, noisy);
    const double s = 0.05 * field_std(ref);
    EXPECT_NEAR(n.rmse, s, 0.05 * s);
    EXPECT_NEAR(n.mae, s * std::sqrt(2.0 / 3.141592653589793), 0.05 * s);
}

TEST(ErrorReport, ShapeMismatch) {
    const GridField a = generate_field(default_wave_spec());
    SyntheticSpec s = default_wave_spec();
    s.nx = 50;
    EXPECT_THROW(error_report(a, generate_field(s)), InputError);
}
