#pragma once

/// @file grid_data.hpp
/// @brief Regular-grid fields: loading, Gaussian smoothing and derivative
/// estimation by local least-squares polynomial fits.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace eqdisc {

/// Scalar variable sampled on a regular d-dimensional grid, row-major.
///
/// The last axis varies fastest. Every axis carries a name, a size, a
/// strictly positive physical step and an origin.
struct GridField {
    std::vector<std::string> axis_names;
    std::vector<std::size_t> axis_sizes;
    std::vector<double> axis_steps;
    std::vector<double> origin;
    std::vector<double> values;

    std::size_t dims() const noexcept { return axis_sizes.size(); }
    std::size_t size() const noexcept { return values.size(); }

    /// Distance in `values` between neighbours along `axis`.
    std::size_t stride(std::size_t axis) const;

    /// Flat offset of a multi-index.
    std::size_t offset(std::span<const std::size_t> index) const;

    double at(std::span<const std::size_t> index) const { return values[offset(index)]; }
    double at(std::initializer_list<std::size_t> index) const {
        return at(std::span<const std::size_t>(index.begin(), index.size()));
    }

    /// Same axes, new values.
    GridField with_values(std::vector<double> new_values) const;

    /// Throws InputError if any invariant is broken.
    void validate() const;
};

/// Builds and validates a field; origin defaults to zeros.
GridField make_field(std::vector<std::string> names, std::vector<std::size_t> sizes,
                     std::vector<double> steps, std::vector<double> values,
                     std::vector<double> origin = {});

/// Reads `meta.json` + `data.csv` from a dataset directory.
GridField load_grid(const std::filesystem::path& directory);

/// Writes a field in the dataset format. Values use shortest round-trip
/// formatting, so load_grid(save_grid(f)) is bit-exact.
void save_grid(const GridField& field, const std::filesystem::path& directory);

struct SmoothingSpec {
    double sigma = 1.0; ///< kernel standard deviation, grid-index units
    int radius = 3;     ///< kernel half-width in cells
};

/// Normalized discrete Gaussian weights for offsets -radius..radius.
std::vector<double> gaussian_kernel(const SmoothingSpec& spec);

/// Separable Gaussian smoothing along `axes` (all axes when empty).
/// Near the edges the kernel is renormalized over in-grid cells.
GridField gaussian_smooth(const GridField& field, const SmoothingSpec& spec,
                          std::span<const std::size_t> axes = {});

struct DiffSpec {
    std::size_t axis = 0;
    int order = 1;
    int window = 9;      ///< odd number of stencil points
    int poly_degree = 4; ///< degree of the local least-squares polynomial
};

/// Stencil weights for every position of the evaluation point inside the
/// window: row p holds the weights giving the derivative at window point p,
/// in grid-index units (divide by step^order for physical units).
std::vector<std::vector<double>> derivative_stencils(const DiffSpec& spec);

/// Derivative along spec.axis by fitting a polynomial over the `window`
/// nearest points (clipped one-sided windows near the boundary) and
/// differentiating it analytically.
GridField differentiate(const GridField& field, const DiffSpec& spec);

/// Adds zero-mean Gaussian noise with std = relative_level * std(field).
GridField add_gaussian_noise(const GridField& field, double relative_level, std::uint64_t seed);

/// Population standard deviation of the values.
double field_std(const GridField& field);

} // namespace eqdisc
