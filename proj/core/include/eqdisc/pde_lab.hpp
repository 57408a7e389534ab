#pragma once

/// @file pde_lab.hpp
/// @brief Synthetic fields with known governing equations, workspace
/// assembly from gridded data, a 1+1D explicit replay solver and error maps.
///
/// Fields live on a (t, x) grid with time as axis 0.

#include "eqdisc/evolution.hpp"
#include "eqdisc/grid_data.hpp"
#include "eqdisc/tokens.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace eqdisc {

enum class EquationKind { Wave, Heat };

/// One analytic mode. For the wave equation `direction` selects
/// sin(k(x - ct) + phase) (+1), sin(k(x + ct) + phase) (-1) or the standing
/// average of both (0). Heat modes ignore it.
struct Mode {
    double amplitude = 1.0;
    double wavenumber = 1.0;
    double phase = 0.0;
    int direction = 0;
};

struct SyntheticSpec {
    EquationKind equation = EquationKind::Wave;
    double coefficient = 1.0; ///< wave speed c, or diffusivity alpha
    std::size_t nt = 100;
    std::size_t nx = 100;
    double dt = 0.1;
    double dx = 0.1;
    std::vector<Mode> modes;
    double noise_level = 0.0; ///< relative to the clean field's std
    std::uint64_t seed = 0;

    void validate() const;
};

/// 100 x 100 standing-wave field, c = 1, three modes.
SyntheticSpec default_wave_spec();
/// 100 x 100 heat field, alpha = 0.1, three decaying modes.
SyntheticSpec default_heat_spec();

EquationKind parse_equation_kind(const std::string& name);
std::string to_string(EquationKind kind);

GridField generate_field(const SyntheticSpec& spec);

struct WorkspaceSpec {
    int max_order = 2;
    int window = 9;
    int poly_degree = 4;
    std::optional<SmoothingSpec> smoothing; ///< applied over every axis
    /// Cells trimmed per side and axis; negative means window / 2.
    int margin = -1;

    int effective_margin() const noexcept { return margin < 0 ? window / 2 : margin; }
};

/// Smooths (optionally), differentiates up to max_order along every axis,
/// trims the margin and stores u and its derivatives as base variables.
Workspace build_workspace(const GridField& field, const WorkspaceSpec& spec);

/// Derivative family over the field's axes.
DerivativeFamily derivative_family(const GridField& field, int max_order, int max_tokens);

/// Linear model sum_j a_j * token_j = 0 over {u, u_t, u_tt, u_x, u_xx}.
struct LinearModel {
    double u = 0.0, u_t = 0.0, u_tt = 0.0, u_x = 0.0, u_xx = 0.0;
};

/// Moves every term of the discovered equation to one side. Throws
/// InputError for product terms or orders beyond 2.
LinearModel linear_model(const DiscoveredModel& model);

struct ReplayOptions {
    double courant = 0.25;   ///< |c| dt / dx bound for second-order-in-time models
    double diffusion = 0.25; ///< |D| dt / dx^2 bound for first-order ones
    double advection = 0.5;  ///< |v| dt / dx bound for first-order ones
    int max_substeps = 100000;
};

/// Marches the model from the reference's first time row(s), imposing the
/// reference values at both spatial ends, and samples the result on the
/// reference grid. Throws InputError for models without a time derivative
/// or with an ill-posed sign, NumericalError if the step bound cannot be met.
GridField solve_discovered_1d(const LinearModel& model, const GridField& reference,
                              const ReplayOptions& options = {});
GridField solve_discovered_1d(const DiscoveredModel& model, const GridField& reference,
                              const ReplayOptions& options = {});

struct ErrorReport {
    double rmse = 0.0;
    double mae = 0.0;
    double relative_rmse = 0.0; ///< rmse / rms(reference)
    GridField rmse_map;         ///< per spatial point, over time
    GridField mae_map;
};

ErrorReport error_report(const GridField& reference, const GridField& candidate);

} // namespace eqdisc
