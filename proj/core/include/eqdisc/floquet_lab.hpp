#pragma once

/// @file floquet_lab.hpp
/// @brief Floquet data for a two-material periodic rod and the reference
/// quadratic the discovered polynomial is scored against.
///
/// One period is a block of length 1 (wavenumber Omega) followed by a block
/// of length gamma (wavenumber Omega / sigma). Displacement and its
/// derivative are continuous at every interface. The finite forcing model is
/// driven by u'(0) = 1 and radiates at its far end. Optionally, extra
/// blocks with a smoothly growing loss are appended behind the measured
/// region, which keeps waves reflected from the far end from polluting the
/// measured ratio (set absorber_blocks = 0 for the plain finite rod).

#include "eqdisc/evolution.hpp"
#include "eqdisc/tokens.hpp"

#include <complex>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace eqdisc {

using cplx = std::complex<double>;

struct RodSpec {
    double gamma = 1.0;
    double sigma = 0.2;
    int n_blocks = 20;         ///< lossless blocks, even, >= 4
    int absorber_blocks = 400; ///< lossy blocks appended behind them
    double absorber_strength = 1.0;

    void validate() const;
    double period() const noexcept { return 1.0 + gamma; }
    int total_blocks() const noexcept { return n_blocks + absorber_blocks; }
};

/// Solved coefficients of u_i(s) = b_i1 exp(i k_i s) + b_i2 exp(-i k_i s),
/// with s the local coordinate inside block i.
struct ForcingSolution {
    double omega = 0.0;
    std::vector<cplx> coeffs;     ///< b_11, b_12, b_21, ... (2 per block)
    std::vector<cplx> wavenumber; ///< per block
    std::vector<double> start;    ///< left end of each block
    std::vector<double> length;
    double residual = 0.0; ///< ||A b - rhs|| / ||rhs||

    std::size_t block_of(double x) const;
    cplx displacement(double x) const;
    cplx derivative(double x) const;
    /// Value and derivative at the left (side = 0) or right (side = 1) end of a block.
    std::pair<cplx, cplx> end_values(std::size_t block, int side) const;
};

/// Solves the forcing problem; throws ResonanceError when a pivot collapses.
ForcingSolution solve_forcing(double omega, const RodSpec& spec);

/// Ratio D(x) / D(x + period); throws NodeError for |D(x + period)| < 1e-12.
cplx floquet_ratio(double x, const ForcingSolution& solution, const RodSpec& spec);

/// Left end of the measurement cell: the middle period, offset 0.5 inside it.
double measurement_point(const RodSpec& spec);

struct FloquetSample {
    double omega = 0.0;
    double lambda_value = 0.0; ///< Re F
    double lambda_im = 0.0;    ///< Im F
};

/// npts uniformly spaced frequencies over [lo, hi]. Omega <= 0 and
/// resonant frequencies are moved up by 1e-6; nodes shift the measurement
/// point by 0.1.
std::vector<FloquetSample> generate_dataset(int npts, std::pair<double, double> omega_range,
                                            const RodSpec& spec, unsigned threads = 1);

void save_floquet_csv(const std::filesystem::path& path, std::span<const FloquetSample> samples,
                      bool with_imaginary = true);
/// Reads `omega,lambda` or `omega,lambda,lambda_im`; `has_imaginary`
/// reports which header was found.
std::vector<FloquetSample> load_floquet_csv(const std::filesystem::path& path,
                                            bool* has_imaginary = nullptr);

/// What the regression sees of the complex ratio F.
enum class LambdaMode { Real, Abs, Complex };
LambdaMode parse_lambda_mode(const std::string& name);
std::string to_string(LambdaMode mode);

/// Workspace with "omega" and "lambda" (or stacked "lambda_re"/"lambda_im").
Workspace build_floquet_workspace(std::span<const FloquetSample> samples, LambdaMode mode);

/// Sum of amplitude * cos(frequency * Omega).
struct CosineSeries {
    std::vector<std::pair<double, double>> terms; ///< (amplitude, frequency)

    double operator()(double omega) const;
    /// Total amplitude at `frequency` (0 when absent).
    double amplitude(double frequency) const;
    bool empty() const noexcept { return terms.empty(); }
};

/// a2(Omega) Lambda^2 + a1(Omega) Lambda + a0(Omega).
struct QuadraticPolynomial {
    CosineSeries a2, a1, a0;
};

/// Quadratic coefficients at one frequency.
struct QuadraticValues {
    double a2 = 0.0, a1 = 0.0, a0 = 0.0;
};

QuadraticValues evaluate(const QuadraticPolynomial& p, double omega);

/// Hard-coded reference form Lambda^2 + (169/60 cos 6W - 49/60 cos 4W) Lambda + 1,
/// defined only for gamma = 1, sigma = 1/5.
QuadraticPolynomial analytical_polynomial(const RodSpec& spec);

/// Monic quadratic in Lambda from the 4x4 one-period Bloch system
/// (continuity inside the cell, u(x + period) = Lambda u(x)).
QuadraticValues determinant_oracle(double omega, const RodSpec& spec);

/// Least-squares cosine series (frequencies 0..max_frequency) of the
/// determinant oracle's a1 and a0 over [lo, hi] with step `step`;
/// amplitudes below 1e-9 are dropped.
QuadraticPolynomial oracle_fourier_fit(const RodSpec& spec, int max_frequency = 10,
                                       std::pair<double, double> range = {0.01, 2.0},
                                       double step = 0.01);

enum class Band { PassBand, StopBand, Edge };
std::string to_string(Band band);

Band classify_band(const QuadraticValues& values);
Band classify_band(const QuadraticPolynomial& poly, double omega);

/// Both roots of the quadratic (a2 must not vanish).
std::pair<cplx, cplx> roots(const QuadraticValues& values);

/// Uniform grid lo, lo + delta, ... up to hi (inclusive within 1e-9 delta).
std::vector<double> omega_grid(std::pair<double, double> range, double delta);

/// RMSE of paired roots over the grid (pairing by minimal total distance).
/// Infinite when either leading coefficient vanishes on the grid.
double roots_rmse(const QuadraticPolynomial& p, const QuadraticPolynomial& q,
                  std::pair<double, double> range, double delta = 1e-3);

/// Fraction of grid points where both polynomials give the same band.
double band_agreement(const QuadraticPolynomial& p, const QuadraticPolynomial& q,
                      std::pair<double, double> range, double delta = 1e-3);

/// The polynomial a model encodes: target - sum c_j term_j = 0.
/// Throws InputError for non-cosine terms.
QuadraticPolynomial polynomial_from_model(const DiscoveredModel& model);

/// Divides every coefficient by the leading amplitude when a2 is a nonzero
/// constant; returns false (and leaves `poly` alone) otherwise.
bool normalize_leading(QuadraticPolynomial& poly);

/// Rows omega,re_root1,im_root1,re_root2,im_root2.
void save_roots_csv(const std::filesystem::path& path, const QuadraticPolynomial& poly,
                    std::pair<double, double> range, double delta);

} // namespace eqdisc
