#include "eqdisc/floquet_lab.hpp"

#include "eqdisc/errors.hpp"
#include "eqdisc/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace eqdisc {

namespace {

constexpr cplx I{0.0, 1.0};

// Band matrix with kl sub- and ku super-diagonals plus kl extra
// super-diagonals for the fill created by row interchanges.
class BandMatrix {
  public:
    BandMatrix(std::size_t n, int kl, int ku)
        : n_(n), kl_(kl), ku_(ku), width_(static_cast<std::size_t>(2 * kl + ku + 1)),
          data_(n * width_, cplx{}) {}

    std::size_t size() const noexcept { return n_; }
    int kl() const noexcept { return kl_; }
    int ku() const noexcept { return ku_; }

    bool in_band(std::size_t r, std::size_t c) const noexcept {
        const auto d = static_cast<long long>(c) - static_cast<long long>(r);
        return d >= -kl_ && d <= kl_ + ku_;
    }
    cplx& operator()(std::size_t r, std::size_t c) noexcept {
        return data_[r * width_ + static_cast<std::size_t>(static_cast<long long>(c) - static_cast<long long>(r) + kl_)];
    }
    cplx operator()(std::size_t r, std::size_t c) const noexcept {
        return in_band(r, c) ? data_[r * width_ + static_cast<std::size_t>(static_cast<long long>(c) - static_cast<long long>(r) + kl_)]
                             : cplx{};
    }

    std::vector<cplx> multiply(const std::vector<cplx>& x) const {
        std::vector<cplx> y(n_, cplx{});
        for (std::size_t r = 0; r < n_; ++r) {
            const std::size_t lo = r >= static_cast<std::size_t>(kl_) ? r - static_cast<std::size_t>(kl_) : 0;
            const std::size_t hi = std::min(n_ - 1, r + static_cast<std::size_t>(kl_ + ku_));
            for (std::size_t c = lo; c <= hi; ++c)
                y[r] += (*this)(r, c) * x[c];
        }
        return y;
    }

  private:
    std::size_t n_;
    int kl_, ku_;
    std::size_t width_;
    std::vector<cplx> data_;
};

// Gaussian elimination with partial pivoting restricted to the band.
// Rows must be equilibrated by the caller; a pivot below `tiny` is a
// collapse.
std::vector<cplx> band_solve(BandMatrix a, std::vector<cplx> b, double tiny) {
    const std::size_t n = a.size();
    const auto kl = static_cast<std::size_t>(a.kl());
    const auto reach = static_cast<std::size_t>(a.kl() + a.ku());
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t last_row = std::min(n - 1, j + kl);
        const std::size_t last_col = std::min(n - 1, j + reach);
        std::size_t p = j;
        for (std::size_t r = j + 1; r <= last_row; ++r)
            if (std::abs(a(r, j)) > std::abs(a(p, j)))
                p = r;
        if (!(std::abs(a(p, j)) > tiny))
            throw ResonanceError("pivot collapse in the forcing system (resonance)");
        if (p != j) {
            for (std::size_t c = j; c <= last_col; ++c)
                std::swap(a(j, c), a(p, c));
            std::swap(b[j], b[p]);
        }
        const cplx pivot = a(j, j);
        for (std::size_t r = j + 1; r <= last_row; ++r) {
            const cplx f = a(r, j) / pivot;
            if (f == cplx{})
                continue;
            a(r, j) = cplx{};
            for (std::size_t c = j + 1; c <= last_col; ++c)
                a(r, c) -= f * a(j, c);
            b[r] -= f * b[j];
        }
    }
    std::vector<cplx> x(n);
    for (std::size_t jj = n; jj-- > 0;) {
        cplx s = b[jj];
        const std::size_t last_col = std::min(n - 1, jj + reach);
        for (std::size_t c = jj + 1; c <= last_col; ++c)
            s -= a(jj, c) * x[c];
        x[jj] = s / a(jj, jj);
    }
    return x;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

bool leading_vanishes(const QuadraticValues& v) {
    return !(std::abs(v.a2) > 1e-12 * (std::abs(v.a1) + std::abs(v.a0)) && v.a2 != 0.0);
}

} // namespace

void RodSpec::validate() const {
    if (!(gamma > 0.0) || !(sigma > 0.0))
        throw InputError("rod gamma and sigma must be positive");
    if (n_blocks < 4 || n_blocks % 2 != 0)
        throw InputError("n_blocks must be an even integer >= 4");
    if (absorber_blocks < 0)
        throw InputError("absorber_blocks must be non-negative");
    if (!(absorber_strength >= 0.0))
        throw InputError("absorber_strength must be non-negative");
}

std::size_t ForcingSolution::block_of(double x) const {
    auto it = std::upper_bound(start.begin(), start.end(), x);
    const std::size_t i = it == start.begin() ? 0 : static_cast<std::size_t>(it - start.begin()) - 1;
    return std::min(i, start.size() - 1);
}

cplx ForcingSolution::displacement(double x) const {
    const std::size_t i = block_of(x);
    const double s = x - start[i];
    const cplx k = wavenumber[i];
    return coeffs[2 * i] * std::exp(I * k * s) + coeffs[2 * i + 1] * std::exp(-I * k * s);
}

cplx ForcingSolution::derivative(double x) const {
    const std::size_t i = block_of(x);
    const double s = x - start[i];
    const cplx k = wavenumber[i];
    return I * k * (coeffs[2 * i] * std::exp(I * k * s) - coeffs[2 * i + 1] * std::exp(-I * k * s));
}

std::pair<cplx, cplx> ForcingSolution::end_values(std::size_t block, int side) const {
    const double s = side == 0 ? 0.0 : length[block];
    const cplx k = wavenumber[block];
    const cplx e1 = std::exp(I * k * s);
    const cplx e2 = std::exp(-I * k * s);
    return {coeffs[2 * block] * e1 + coeffs[2 * block + 1] * e2,
            I * k * (coeffs[2 * block] * e1 - coeffs[2 * block + 1] * e2)};
}

ForcingSolution solve_forcing(double omega, const RodSpec& spec) {
    spec.validate();
    if (!(omega > 0.0) || !std::isfinite(omega))
        throw InputError("forcing frequency must be positive");
    const auto nb = static_cast<std::size_t>(spec.total_blocks());
    ForcingSolution sol;
    sol.omega = omega;
    double x = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
        const bool first_material = i % 2 == 0;
        const double len = first_material ? 1.0 : spec.gamma;
        cplx k = first_material ? omega : omega / spec.sigma;
        if (i >= static_cast<std::size_t>(spec.n_blocks)) {
            const double s = static_cast<double>(i + 1 - static_cast<std::size_t>(spec.n_blocks)) /
                             spec.absorber_blocks;
            k *= cplx(1.0, spec.absorber_strength * s * s);
        }
        sol.start.push_back(x);
        sol.length.push_back(len);
        sol.wavenumber.push_back(k);
        x += len;
    }

    // Rows: forcing, then (value, derivative) per interface, then radiation.
    const std::size_t n = 2 * nb;
    BandMatrix a(n, 2, 2);
    std::vector<cplx> rhs(n, cplx{});
    const cplx k0 = sol.wavenumber[0];
    a(0, 0) = I * k0;
    a(0, 1) = -I * k0;
    rhs[0] = 1.0;
    for (std::size_t i = 0; i + 1 < nb; ++i) {
        const std::size_t r = 1 + 2 * i;
        const cplx kl = sol.wavenumber[i];
        const cplx kr = sol.wavenumber[i + 1];
        const cplx e1 = std::exp(I * kl * sol.length[i]);
        const cplx e2 = std::exp(-I * kl * sol.length[i]);
        a(r, 2 * i) = e1;
        a(r, 2 * i + 1) = e2;
        a(r, 2 * i + 2) = -1.0;
        a(r, 2 * i + 3) = -1.0;
        a(r + 1, 2 * i) = I * kl * e1;
        a(r + 1, 2 * i + 1) = -I * kl * e2;
        a(r + 1, 2 * i + 2) = -I * kr;
        a(r + 1, 2 * i + 3) = I * kr;
    }
    a(n - 1, n - 1) = 1.0;

    // Row equilibration keeps the pivot test meaningful when the lossy tail
    // produces exponentially large or small entries.
    BandMatrix scaled = a;
    std::vector<cplx> scaled_rhs = rhs;
    for (std::size_t r = 0; r < n; ++r) {
        double m = 0.0;
        for (std::size_t c = r >= 2 ? r - 2 : 0; c <= std::min(n - 1, r + 2); ++c)
            m = std::max(m, std::abs(a(r, c)));
        if (m == 0.0)
            throw ResonanceError("empty row in the forcing system");
        for (std::size_t c = r >= 2 ? r - 2 : 0; c <= std::min(n - 1, r + 2); ++c)
            scaled(r, c) /= m;
        scaled_rhs[r] /= m;
    }
    sol.coeffs = band_solve(std::move(scaled), std::move(scaled_rhs), 1e-12);

    const auto ab = a.multiply(sol.coeffs);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        num += std::norm(ab[r] - rhs[r]);
        den += std::norm(rhs[r]);
    }
    sol.residual = std::sqrt(num / den);
    for (const auto& c : sol.coeffs)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw ResonanceError("forcing solution is not finite");
    return sol;
}

double measurement_point(const RodSpec& spec) {
    return static_cast<double>(spec.n_blocks / 4) * spec.period() + 0.5;
}

cplx floquet_ratio(double x, const ForcingSolution& solution, const RodSpec& spec) {
    const double rod_end = static_cast<double>(spec.n_blocks / 2) * spec.period();
    if (x < 0.0 || x + spec.period() > rod_end)
        throw InputError("Floquet ratio points must lie inside the measured rod");
    const cplx num = solution.displacement(x);
    const cplx den = solution.displacement(x + spec.period());
    if (std::abs(den) < 1e-12)
        throw NodeError("displacement node at the Floquet ratio denominator");
    return num / den;
}

std::vector<FloquetSample> generate_dataset(int npts, std::pair<double, double> omega_range,
                                            const RodSpec& spec, unsigned threads) {
    spec.validate();
    if (npts < 3)
        throw InputError("Floquet dataset needs npts >= 3 (got " + std::to_string(npts) + ")");
    const auto [lo, hi] = omega_range;
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
        throw InputError("Floquet omega range must satisfy lo < hi");
    std::vector<FloquetSample> out(static_cast<std::size_t>(npts));
    parallel_for(out.size(), threads, [&](std::size_t i) {
        double w = lo + (hi - lo) * static_cast<double>(i) / (npts - 1);
        if (w <= 0.0)
            w = 1e-6;
        for (int attempt = 0;; ++attempt) {
            try {
                const ForcingSolution sol = solve_forcing(w, spec);
                double x = measurement_point(spec);
                for (int shift = 0;; ++shift) {
                    try {
                        const cplx f = floquet_ratio(x, sol, spec);
                        out[i] = {w, f.real(), f.imag()};
                        return;
                    } catch (const NodeError&) {
                        if (shift >= 4)
                            throw;
                        x += 0.1;
                    }
                }
            } catch (const ResonanceError&) {
                if (attempt >= 10)
                    throw;
                w += 1e-6;
            }
        }
    });
    return out;
}

void save_floquet_csv(const std::filesystem::path& path, std::span<const FloquetSample> samples,
                      bool with_imaginary) {
    std::ofstream f(path);
    if (!f)
        throw InputError("cannot write " + path.string());
    f << (with_imaginary ? "omega,lambda,lambda_im\n" : "omega,lambda\n");
    for (const auto& s : samples) {
        f << format_double(s.omega) << ',' << format_double(s.lambda_value);
        if (with_imaginary)
            f << ',' << format_double(s.lambda_im);
        f << '\n';
    }
    if (!f)
        throw InputError("failed writing " + path.string());
}

std::vector<FloquetSample> load_floquet_csv(const std::filesystem::path& path, bool* has_imaginary) {
    std::ifstream f(path);
    if (!f)
        throw InputError("missing Floquet dataset " + path.string());
    std::string line;
    if (!std::getline(f, line))
        throw InputError(path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    std::size_t columns = 0;
    if (line == "omega,lambda")
        columns = 2;
    else if (line == "omega,lambda,lambda_im")
        columns = 3;
    else
        throw InputError(path.string() + ":1: expected header 'omega,lambda[,lambda_im]'");
    if (has_imaginary)
        *has_imaginary = columns == 3;
    std::vector<FloquetSample> out;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        double v[3] = {0.0, 0.0, 0.0};
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (std::size_t c = 0; c < columns; ++c) {
            auto [q, ec] = std::from_chars(p, end, v[c]);
            if (ec != std::errc{} || (c + 1 < columns ? (q == end || *q != ',') : q != end))
                throw InputError(path.string() + ":" + std::to_string(lineno) + ": malformed row '" + line + "'");
            if (!std::isfinite(v[c]))
                throw InputError(path.string() + ":" + std::to_string(lineno) + ": non-finite value");
            p = q + 1;
        }
        out.push_back({v[0], v[1], v[2]});
    }
    return out;
}

LambdaMode parse_lambda_mode(const std::string& name) {
    if (name == "real")
        return LambdaMode::Real;
    if (name == "abs")
        return LambdaMode::Abs;
    if (name == "complex")
        return LambdaMode::Complex;
    throw InputError("unknown lambda mode '" + name + "' (expected real, abs or complex)");
}

std::string to_string(LambdaMode mode) {
    switch (mode) {
    case LambdaMode::Real:
        return "real";
    case LambdaMode::Abs:
        return "abs";
    case LambdaMode::Complex:
        return "complex";
    }
    return "real";
}

Workspace build_floquet_workspace(std::span<const FloquetSample> samples, LambdaMode mode) {
    if (samples.empty())
        throw InputError("Floquet workspace needs samples");
    const std::size_t n = samples.size();
    if (mode != LambdaMode::Complex) {
        Workspace ws(n);
        std::vector<double> omega(n), lambda(n);
        for (std::size_t i = 0; i < n; ++i) {
            omega[i] = samples[i].omega;
            lambda[i] = mode == LambdaMode::Real ? samples[i].lambda_value
                                                 : std::hypot(samples[i].lambda_value, samples[i].lambda_im);
        }
        ws.set_base("omega", std::move(omega));
        ws.set_base("lambda", std::move(lambda));
        return ws;
    }
    Workspace ws(2 * n, {}, true);
    std::vector<double> omega(2 * n), re(2 * n), im(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        omega[i] = omega[n + i] = samples[i].omega;
        re[i] = re[n + i] = samples[i].lambda_value;
        im[i] = im[n + i] = samples[i].lambda_im;
    }
    ws.set_base("omega", std::move(omega));
    ws.set_base("lambda_re", std::move(re));
    ws.set_base("lambda_im", std::move(im));
    return ws;
}

double CosineSeries::operator()(double omega) const {
    double s = 0.0;
    for (const auto& [amp, freq] : terms)
        s += amp * std::cos(freq * omega);
    return s;
}

double CosineSeries::amplitude(double frequency) const {
    double s = 0.0;
    for (const auto& [amp, freq] : terms)
        if (freq == frequency)
            s += amp;
    return s;
}

QuadraticValues evaluate(const QuadraticPolynomial& p, double omega) {
    return {p.a2(omega), p.a1(omega), p.a0(omega)};
}

QuadraticPolynomial analytical_polynomial(const RodSpec& spec) {
    if (std::abs(spec.gamma - 1.0) > 1e-12 || std::abs(spec.sigma - 0.2) > 1e-12)
        throw InputError("the closed-form reference polynomial exists only for gamma = 1, sigma = 1/5");
    QuadraticPolynomial p;
    p.a2.terms = {{1.0, 0.0}};
    p.a1.terms = {{169.0 / 60.0, 6.0}, {-49.0 / 60.0, 4.0}};
    p.a0.terms = {{1.0, 0.0}};
    return p;
}

QuadraticValues determinant_oracle(double omega, const RodSpec& spec) {
    if (!(omega > 0.0))
        throw InputError("determinant oracle needs omega > 0");
    if (!(spec.gamma > 0.0) || !(spec.sigma > 0.0))
        throw InputError("rod gamma and sigma must be positive");
    const double k1 = omega;
    const double k2 = omega / spec.sigma;
    const double g = spec.gamma;
    // Unknowns (b11, b12, b21, b22). Rows: value and slope continuity at the
    // inner interface, then the Bloch conditions u2(g) = L u1(0), u2'(g) = L u1'(0).
    auto det = [&](cplx lam) {
        Eigen::Matrix4cd m;
        const cplx e1 = std::exp(I * k1), f1 = std::exp(-I * k1);
        const cplx e2 = std::exp(I * k2 * g), f2 = std::exp(-I * k2 * g);
        m << e1, f1, -1.0, -1.0,
            I * k1 * e1, -I * k1 * f1, -I * k2, I * k2,
            -lam, -lam, e2, f2,
            -lam * I * k1, lam * I * k1, I * k2 * e2, -I * k2 * f2;
        return m.determinant();
    };
    const cplx d0 = det(0.0);
    const cplx dp = det(1.0);
    const cplx dm = det(-1.0);
    const cplx c2 = 0.5 * (dp + dm) - d0;
    const cplx c1 = 0.5 * (dp - dm);
    if (std::abs(c2) < 1e-14 * (std::abs(d0) + std::abs(c1) + 1e-300))
        throw NumericalError("degenerate Bloch system: leading coefficient vanishes");
    const cplx a1 = c1 / c2;
    const cplx a0 = d0 / c2;
    return {1.0, a1.real(), a0.real()};
}

QuadraticPolynomial oracle_fourier_fit(const RodSpec& spec, int max_frequency,
                                       std::pair<double, double> range, double step) {
    if (max_frequency < 0)
        throw InputError("max_frequency must be non-negative");
    const auto grid = omega_grid(range, step);
    if (grid.empty() || grid.front() <= 0.0)
        throw InputError("oracle fit range must be positive");
    const auto n = static_cast<Eigen::Index>(grid.size());
    const Eigen::Index p = max_frequency + 1;
    Eigen::MatrixXd basis(n, p);
    Eigen::VectorXd y1(n), y0(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double w = grid[static_cast<std::size_t>(i)];
        for (Eigen::Index b = 0; b < p; ++b)
            basis(i, b) = std::cos(static_cast<double>(b) * w);
        const auto v = determinant_oracle(w, spec);
        y1[i] = v.a1;
        y0[i] = v.a0;
    }
    const auto qr = basis.colPivHouseholderQr();
    const Eigen::VectorXd c1 = qr.solve(y1);
    const Eigen::VectorXd c0 = qr.solve(y0);
    QuadraticPolynomial out;
    out.a2.terms = {{1.0, 0.0}};
    for (Eigen::Index b = 0; b < p; ++b) {
        if (std::abs(c1[b]) > 1e-9)
            out.a1.terms.emplace_back(c1[b], static_cast<double>(b));
        if (std::abs(c0[b]) > 1e-9)
            out.a0.terms.emplace_back(c0[b], static_cast<double>(b));
    }
    return out;
}

std::string to_string(Band band) {
    switch (band) {
    case Band::PassBand:
        return "pass";
    case Band::StopBand:
        return "stop";
    case Band::Edge:
        return "edge";
    }
    return "edge";
}

Band classify_band(const QuadraticValues& v) {
    if (v.a2 == 0.0 || !std::isfinite(v.a2))
        throw InputError("leading coefficient vanishes; band undefined");
    const double p = v.a1 / v.a2;
    const double q = v.a0 / v.a2;
    const double disc = p * p - 4.0 * q;
    if (std::abs(disc) <= 1e-9)
        return Band::Edge;
    return disc < 0.0 ? Band::PassBand : Band::StopBand;
}

Band classify_band(const QuadraticPolynomial& poly, double omega) {
    return classify_band(evaluate(poly, omega));
}

std::pair<cplx, cplx> roots(const QuadraticValues& v) {
    if (v.a2 == 0.0)
        throw InputError("leading coefficient vanishes; no quadratic roots");
    const cplx p = v.a1 / v.a2;
    const cplx q = v.a0 / v.a2;
    cplx s = std::sqrt(p * p - 4.0 * q);
    if ((std::conj(p) * s).real() < 0.0)
        s = -s;
    const cplx r1 = -(p + s) / 2.0;
    const cplx r2 = r1 != cplx{} ? q / r1 : -(p - s) / 2.0;
    return {r1, r2};
}

std::vector<double> omega_grid(std::pair<double, double> range, double delta) {
    if (!(delta > 0.0))
        throw InputError("grid step must be positive");
    const auto [lo, hi] = range;
    if (hi < lo)
        return {};
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / delta + 1e-9)) + 1;
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i)
        g[i] = lo + static_cast<double>(i) * delta;
    return g;
}

double roots_rmse(const QuadraticPolynomial& p, const QuadraticPolynomial& q,
                  std::pair<double, double> range, double delta) {
    const auto grid = omega_grid(range, delta);
    if (grid.empty())
        return 0.0;
    double sum = 0.0;
    for (double w : grid) {
        const auto vp = evaluate(p, w);
        const auto vq = evaluate(q, w);
        if (leading_vanishes(vp) || leading_vanishes(vq))
            return std::numeric_limits<double>::infinity();
        const auto [p1, p2] = roots(vp);
        const auto [q1, q2] = roots(vq);
        const double straight = std::abs(p1 - q1) + std::abs(p2 - q2);
        const double crossed = std::abs(p1 - q2) + std::abs(p2 - q1);
        sum += straight <= crossed ? std::norm(p1 - q1) + std::norm(p2 - q2)
                                   : std::norm(p1 - q2) + std::norm(p2 - q1);
    }
    return std::sqrt(sum / (2.0 * static_cast<double>(grid.size())));
}

double band_agreement(const QuadraticPolynomial& p, const QuadraticPolynomial& q,
                      std::pair<double, double> range, double delta) {
    const auto grid = omega_grid(range, delta);
    if (grid.empty())
        return 1.0;
    std::size_t same = 0;
    for (double w : grid) {
        const auto vp = evaluate(p, w);
        const auto vq = evaluate(q, w);
        if (leading_vanishes(vp) || leading_vanishes(vq))
            continue;
        if (classify_band(vp) == classify_band(vq))
            ++same;
    }
    return static_cast<double>(same) / static_cast<double>(grid.size());
}

QuadraticPolynomial polynomial_from_model(const DiscoveredModel& model) {
    QuadraticPolynomial poly;
    auto add = [&](const Term& term, double coef) {
        if (term.size() != 1 || !std::holds_alternative<CosToken>(term.tokens().front()))
            throw InputError("model is not a Floquet polynomial (non-cosine term)");
        const auto& c = std::get<CosToken>(term.tokens().front());
        CosineSeries* target = nullptr;
        switch (c.power) {
        case 0:
            target = &poly.a0;
            break;
        case 1:
            target = &poly.a1;
            break;
        case 2:
            target = &poly.a2;
            break;
        default:
            throw InputError("Floquet polynomial powers must lie in 0..2");
        }
        target->terms.emplace_back(coef, c.frequency);
    };
    add(model.target, 1.0);
    for (std::size_t i = 0; i < model.terms.size(); ++i)
        add(model.terms[i], -model.coefficients[i]);
    return poly;
}

bool normalize_leading(QuadraticPolynomial& poly) {
    double lead = 0.0;
    for (const auto& [amp, freq] : poly.a2.terms) {
        if (freq != 0.0 && amp != 0.0)
            return false;
        lead += amp;
    }
    if (lead == 0.0)
        return false;
    for (auto* s : {&poly.a2, &poly.a1, &poly.a0})
        for (auto& t : s->terms)
            t.first /= lead;
    return true;
}

void save_roots_csv(const std::filesystem::path& path, const QuadraticPolynomial& poly,
                    std::pair<double, double> range, double delta) {
    std::ofstream f(path);
    if (!f)
        throw InputError("cannot write " + path.string());
    f << "omega,re_root1,im_root1,re_root2,im_root2\n";
    for (double w : omega_grid(range, delta)) {
        const auto v = evaluate(poly, w);
        if (leading_vanishes(v))
            continue;
        const auto [r1, r2] = roots(v);
        f << format_double(w) << ',' << format_double(r1.real()) << ',' << format_double(r1.imag()) << ','
          << format_double(r2.real()) << ',' << format_double(r2.imag()) << '\n';
    }
}

} // namespace eqdisc
