#include "eqdisc/grid_data.hpp"

#include "eqdisc/errors.hpp"
#include "eqdisc/rng.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace eqdisc {

namespace {

using json = nlohmann::json;

// Calls fn(start) for the first element of every 1D line along `axis`.
template <class Fn>
void for_each_line(const GridField& field, std::size_t axis, Fn&& fn) {
    const std::size_t stride = field.stride(axis);
    const std::size_t n = field.axis_sizes[axis];
    const std::size_t outer = field.size() / (n * stride);
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t inner = 0; inner < stride; ++inner)
            fn(o * n * stride + inner);
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace

std::size_t GridField::stride(std::size_t axis) const {
    std::size_t s = 1;
    for (std::size_t a = axis + 1; a < axis_sizes.size(); ++a)
        s *= axis_sizes[a];
    return s;
}

std::size_t GridField::offset(std::span<const std::size_t> index) const {
    if (index.size() != dims())
        throw InputError("grid index has wrong dimensionality");
    std::size_t off = 0;
    for (std::size_t a = 0; a < dims(); ++a) {
        if (index[a] >= axis_sizes[a])
            throw InputError("grid index out of range on axis " + axis_names[a]);
        off = off * axis_sizes[a] + index[a];
    }
    return off;
}

GridField GridField::with_values(std::vector<double> new_values) const {
    GridField out{axis_names, axis_sizes, axis_steps, origin, std::move(new_values)};
    if (out.values.size() != values.size())
        throw InputError("value count does not match grid shape");
    return out;
}

void GridField::validate() const {
    const std::size_t d = axis_sizes.size();
    if (d == 0)
        throw InputError("grid has no axes");
    if (axis_names.size() != d || axis_steps.size() != d || origin.size() != d)
        throw InputError("axis metadata lists have different lengths");
    std::size_t count = 1;
    for (std::size_t a = 0; a < d; ++a) {
        if (axis_sizes[a] == 0)
            throw InputError("axis '" + axis_names[a] + "' has size 0");
        if (!(axis_steps[a] > 0.0) || !std::isfinite(axis_steps[a]))
            throw InputError("axis '" + axis_names[a] + "' step must be positive");
        count *= axis_sizes[a];
    }
    if (count != values.size())
        throw InputError("value count " + std::to_string(values.size()) +
                         " does not match product of axis sizes " + std::to_string(count));
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i]))
            throw InputError("non-finite value at flat index " + std::to_string(i));
}

GridField make_field(std::vector<std::string> names, std::vector<std::size_t> sizes,
                     std::vector<double> steps, std::vector<double> values,
                     std::vector<double> origin) {
    if (origin.empty())
        origin.assign(sizes.size(), 0.0);
    GridField f{std::move(names), std::move(sizes), std::move(steps), std::move(origin),
                std::move(values)};
    f.validate();
    return f;
}

GridField load_grid(const std::filesystem::path& directory) {
    const auto meta_path = directory / "meta.json";
    const auto data_path = directory / "data.csv";
    std::ifstream meta_in(meta_path);
    if (!meta_in)
        throw InputError("missing file: " + meta_path.string());
    std::ifstream data_in(data_path);
    if (!data_in)
        throw InputError("missing file: " + data_path.string());

    GridField field;
    try {
        const json meta = json::parse(meta_in);
        field.axis_names = meta.at("axis_names").get<std::vector<std::string>>();
        field.axis_sizes = meta.at("axis_sizes").get<std::vector<std::size_t>>();
        field.axis_steps = meta.at("axis_steps").get<std::vector<double>>();
        field.origin = meta.at("origin").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw InputError(meta_path.string() + ": " + e.what());
    }

    std::string line;
    std::size_t line_no = 0;
    std::size_t pending_blank = 0;
    while (std::getline(data_in, line)) {
        ++line_no;
        const std::string token = trim(line);
        if (token.empty()) {
            ++pending_blank;
            continue;
        }
        if (pending_blank != 0)
            throw InputError(data_path.string() + ":" + std::to_string(line_no - 1) +
                             ": empty line inside data");
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (ec != std::errc{} || ptr != token.data() + token.size())
            throw InputError(data_path.string() + ":" + std::to_string(line_no) +
                             ": malformed number '" + token + "'");
        if (!std::isfinite(v))
            throw InputError(data_path.string() + ":" + std::to_string(line_no) +
                             ": non-finite value '" + token + "'");
        field.values.push_back(v);
    }

    std::size_t expected = field.axis_sizes.empty() ? 0 : 1;
    for (auto s : field.axis_sizes)
        expected *= s;
    if (field.values.size() != expected)
        throw InputError(data_path.string() + ": count mismatch, found " +
                         std::to_string(field.values.size()) + " values, metadata expects " +
                         std::to_string(expected));
    field.validate();
    return field;
}

void save_grid(const GridField& field, const std::filesystem::path& directory) {
    field.validate();
    std::filesystem::create_directories(directory);
    json meta;
    meta["axis_names"] = field.axis_names;
    meta["axis_sizes"] = field.axis_sizes;
    meta["axis_steps"] = field.axis_steps;
    meta["origin"] = field.origin;
    std::ofstream meta_out(directory / "meta.json");
    meta_out << meta.dump(2) << '\n';

    std::ofstream data_out(directory / "data.csv");
    std::string buffer;
    buffer.reserve(field.size() * 24);
    for (double v : field.values) {
        buffer += format_double(v);
        buffer += '\n';
    }
    data_out << buffer;
    if (!data_out || !meta_out)
        throw InputError("failed writing dataset to " + directory.string());
}

std::vector<double> gaussian_kernel(const SmoothingSpec& spec) {
    if (!(spec.sigma > 0.0) || spec.radius < 1)
        throw InputError("smoothing needs sigma > 0 and radius >= 1");
    std::vector<double> w(2 * static_cast<std::size_t>(spec.radius) + 1);
    for (int r = -spec.radius; r <= spec.radius; ++r)
        w[static_cast<std::size_t>(r + spec.radius)] =
            std::exp(-0.5 * r * r / (spec.sigma * spec.sigma));
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w)
        x /= total;
    return w;
}

GridField gaussian_smooth(const GridField& field, const SmoothingSpec& spec,
                          std::span<const std::size_t> axes) {
    field.validate();
    const std::vector<double> kernel = gaussian_kernel(spec);
    std::vector<std::size_t> selected(axes.begin(), axes.end());
    if (selected.empty()) {
        selected.resize(field.dims());
        std::iota(selected.begin(), selected.end(), std::size_t{0});
    }

    std::vector<double> current = field.values;
    std::vector<double> next(current.size());
    const long radius = spec.radius;
    for (std::size_t axis : selected) {
        if (axis >= field.dims())
            throw InputError("smoothing axis out of range");
        const std::size_t stride = field.stride(axis);
        const long n = static_cast<long>(field.axis_sizes[axis]);
        for_each_line(field, axis, [&](std::size_t start) {
            for (long i = 0; i < n; ++i) {
                double acc = 0.0;
                double norm = 0.0;
                const long lo = std::max(-radius, -i);
                const long hi = std::min(radius, n - 1 - i);
                for (long r = lo; r <= hi; ++r) {
                    const double w = kernel[static_cast<std::size_t>(r + radius)];
                    acc += w * current[start + static_cast<std::size_t>(i + r) * stride];
                    norm += w;
                }
                next[start + static_cast<std::size_t>(i) * stride] = acc / norm;
            }
        });
        std::swap(current, next);
    }
    return field.with_values(std::move(current));
}

std::vector<std::vector<double>> derivative_stencils(const DiffSpec& spec) {
    if (spec.order < 0)
        throw InputError("derivative order must be non-negative");
    if (spec.window < 1 || spec.window % 2 == 0)
        throw InputError("differentiation window must be an odd positive integer");
    if (spec.order > spec.poly_degree)
        throw InputError("derivative order exceeds polynomial degree");
    if (spec.window < spec.poly_degree + 1)
        throw InputError("window too small for polynomial degree");

    const int w = spec.window;
    const int d = spec.poly_degree;
    double factorial = 1.0;
    for (int i = 2; i <= spec.order; ++i)
        factorial *= i;

    std::vector<std::vector<double>> stencils(static_cast<std::size_t>(w));
    for (int p = 0; p < w; ++p) {
        Eigen::MatrixXd vander(w, d + 1);
        for (int j = 0; j < w; ++j) {
            double x = 1.0;
            for (int q = 0; q <= d; ++q) {
                vander(j, q) = x;
                x *= static_cast<double>(j - p);
            }
        }
        // Row `order` of the pseudo-inverse maps samples to that polynomial coefficient.
        const Eigen::MatrixXd pinv =
            vander.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(w, w));
        auto& row = stencils[static_cast<std::size_t>(p)];
        row.resize(static_cast<std::size_t>(w));
        for (int j = 0; j < w; ++j)
            row[static_cast<std::size_t>(j)] = factorial * pinv(spec.order, j);
    }
    return stencils;
}

GridField differentiate(const GridField& field, const DiffSpec& spec) {
    field.validate();
    if (spec.axis >= field.dims())
        throw InputError("differentiation axis out of range");
    const auto stencils = derivative_stencils(spec);
    const long n = static_cast<long>(field.axis_sizes[spec.axis]);
    const long w = spec.window;
    if (w > n)
        throw InputError("differentiation window " + std::to_string(w) + " larger than axis '" +
                         field.axis_names[spec.axis] + "' (" + std::to_string(n) + " points)");
    const double scale = 1.0 / std::pow(field.axis_steps[spec.axis], spec.order);
    const std::size_t stride = field.stride(spec.axis);
    const long half = w / 2;

    std::vector<double> out(field.size());
    for_each_line(field, spec.axis, [&](std::size_t start) {
        for (long i = 0; i < n; ++i) {
            const long first = std::clamp(i - half, 0L, n - w);
            const auto& weights = stencils[static_cast<std::size_t>(i - first)];
            double acc = 0.0;
            for (long j = 0; j < w; ++j)
                acc += weights[static_cast<std::size_t>(j)] *
                       field.values[start + static_cast<std::size_t>(first + j) * stride];
            out[start + static_cast<std::size_t>(i) * stride] = acc * scale;
        }
    });
    return field.with_values(std::move(out));
}

double field_std(const GridField& field) {
    if (field.values.empty())
        return 0.0;
    const double n = static_cast<double>(field.size());
    const double mean = std::accumulate(field.values.begin(), field.values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : field.values)
        ss += (v - mean) * (v - mean);
    return std::sqrt(ss / n);
}

GridField add_gaussian_noise(const GridField& field, double relative_level, std::uint64_t seed) {
    if (!(relative_level >= 0.0))
        throw InputError("noise level must be non-negative");
    if (relative_level == 0.0)
        return field;
    const double sd = relative_level * field_std(field);
    if (sd == 0.0)
        return field;
    Rng rng(mix64(seed));
    std::normal_distribution<double> normal(0.0, sd);
    std::vector<double> noisy = field.values;
    for (auto& v : noisy)
        v += normal(rng);
    return field.with_values(std::move(noisy));
}

} // namespace eqdisc
