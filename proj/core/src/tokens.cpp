#include "eqdisc/tokens.hpp"

#include "eqdisc/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>

namespace eqdisc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

void require_finite(std::span<const double> values, const std::string& what) {
    for (double v : values)
        if (!std::isfinite(v))
            throw NumericalError("non-finite value in " + what);
}

} // namespace

Token derivative_token(std::size_t axis, int order) {
    return DerivativeToken{order == 0 ? std::size_t{0} : axis, order};
}

Token cos_token(double frequency, int power) { return CosToken{frequency, power}; }

Term::Term(std::vector<Token> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.empty())
        throw InputError("a term needs at least one token");
    std::sort(tokens_.begin(), tokens_.end());
}

void Term::replace_token(std::size_t i, Token token) {
    tokens_.at(i) = std::move(token);
    std::sort(tokens_.begin(), tokens_.end());
}

CosFamily default_cos_family() {
    CosFamily f;
    for (int b = 0; b <= 10; ++b)
        f.frequencies.push_back(b);
    return f;
}

std::vector<Token> admissible_tokens(const FamilyConfig& family) {
    std::vector<Token> out;
    std::visit(overloaded{
                   [&](const DerivativeFamily& d) {
                       if (d.allow_order_zero)
                           out.push_back(derivative_token(0, 0));
                       for (std::size_t a = 0; a < d.axis_names.size(); ++a)
                           for (int o = 1; o <= d.max_order; ++o)
                               out.push_back(derivative_token(a, o));
                   },
                   [&](const CosFamily& c) {
                       for (double b : c.frequencies)
                           for (int j : c.powers)
                               out.push_back(cos_token(b, j));
                   },
               },
               family);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

int max_term_tokens(const FamilyConfig& family) {
    return std::visit(overloaded{
                          [](const DerivativeFamily& d) { return d.max_tokens; },
                          [](const CosFamily&) { return 1; },
                      },
                      family);
}

Token sample_random_token(const FamilyConfig& family, Rng& rng) {
    const auto tokens = admissible_tokens(family);
    if (tokens.empty())
        throw InputError("token family has an empty admissible set");
    std::uniform_int_distribution<std::size_t> pick(0, tokens.size() - 1);
    return tokens[pick(rng)];
}

Token sample_random_token_like(const FamilyConfig& family, const Token& like, Rng& rng) {
    auto tokens = admissible_tokens(family);
    std::erase_if(tokens, [&](const Token& t) { return t.index() != like.index() || t == like; });
    if (tokens.empty())
        return like;
    std::uniform_int_distribution<std::size_t> pick(0, tokens.size() - 1);
    return tokens[pick(rng)];
}

Term sample_random_term(const FamilyConfig& family, Rng& rng) {
    const auto tokens = admissible_tokens(family);
    if (tokens.empty())
        throw InputError("token family has an empty admissible set");
    const int k = max_term_tokens(family);
    if (k < 1)
        throw InputError("terms must allow at least one token");
    std::uniform_int_distribution<int> length(1, k);
    std::uniform_int_distribution<std::size_t> pick(0, tokens.size() - 1);
    const int n = length(rng);
    std::vector<Token> chosen;
    chosen.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        chosen.push_back(tokens[pick(rng)]);
    return Term(std::move(chosen));
}

double count_terms(std::size_t token_count, int max_tokens) {
    // C(nt + l - 1, l), accumulated as a running product.
    double total = 0.0;
    double c = 1.0;
    for (int l = 1; l <= max_tokens; ++l) {
        c = c * static_cast<double>(token_count + static_cast<std::size_t>(l) - 1) / l;
        total += c;
    }
    return total;
}

std::vector<Term> enumerate_terms(const FamilyConfig& family) {
    const auto tokens = admissible_tokens(family);
    const int k = max_term_tokens(family);
    std::vector<Term> out;
    std::vector<std::size_t> idx;
    auto recurse = [&](auto&& self, std::size_t start, int remaining) -> void {
        if (!idx.empty()) {
            std::vector<Token> t;
            for (auto i : idx)
                t.push_back(tokens[i]);
            out.emplace_back(std::move(t));
        }
        if (remaining == 0)
            return;
        for (std::size_t i = start; i < tokens.size(); ++i) {
            idx.push_back(i);
            self(self, i, remaining - 1);
            idx.pop_back();
        }
    };
    recurse(recurse, 0, k);
    std::sort(out.begin(), out.end());
    return out;
}

std::string token_label(const Token& token, const FamilyConfig& family) {
    return std::visit(
        overloaded{
            [&](const DerivativeToken& d) -> std::string {
                const auto* fam = std::get_if<DerivativeFamily>(&family);
                const std::string var = fam ? fam->variable : "u";
                if (d.order == 0)
                    return var;
                const std::string axis = fam && d.axis < fam->axis_names.size()
                                             ? fam->axis_names[d.axis]
                                             : "x" + std::to_string(d.axis);
                const std::string n = std::to_string(d.order);
                return (d.order == 1 ? "d" : "d" + n) + var + "/d" + axis + n;
            },
            [](const CosToken& c) -> std::string {
                return "cos(" + format_number(c.frequency) + "*Omega)*Lambda^" +
                       std::to_string(c.power);
            },
        },
        token);
}

std::string term_label(const Term& term, const FamilyConfig& family) {
    std::string out;
    for (const auto& t : term.tokens()) {
        if (!out.empty())
            out += " * ";
        out += token_label(t, family);
    }
    return out;
}

Workspace::Workspace(std::size_t n_samples, std::vector<std::string> axis_names,
                     bool stacked_complex)
    : n_samples_(n_samples), axis_names_(std::move(axis_names)),
      stacked_complex_(stacked_complex) {
    if (n_samples_ == 0)
        throw InputError("workspace needs at least one sample");
    if (stacked_complex_ && n_samples_ % 2 != 0)
        throw InputError("stacked complex workspace needs an even sample count");
}

void Workspace::set_base(const std::string& name, std::vector<double> values) {
    if (values.size() != n_samples_)
        throw InputError("base variable '" + name + "' has " + std::to_string(values.size()) +
                         " samples, workspace has " + std::to_string(n_samples_));
    require_finite(values, "base variable '" + name + "'");
    base_[name] = std::move(values);
}

bool Workspace::has_base(const std::string& name) const { return base_.contains(name); }

std::span<const double> Workspace::base(const std::string& name) const {
    auto it = base_.find(name);
    if (it == base_.end())
        throw InputError("workspace has no base variable '" + name + "'");
    return it->second;
}

std::vector<std::string> Workspace::base_names() const {
    std::vector<std::string> names;
    for (const auto& [k, v] : base_)
        names.push_back(k);
    return names;
}

void Workspace::cache(const Token& token, std::vector<double> values) {
    if (values.size() != n_samples_)
        throw InputError("cached token vector has the wrong length");
    require_finite(values, "token vector");
    if (!cache_.emplace(token, std::move(values)).second)
        throw InputError("token already cached; the cache is write-once");
}

bool Workspace::is_cached(const Token& token) const { return cache_.contains(token); }

std::span<const double> Workspace::cached(const Token& token) const {
    auto it = cache_.find(token);
    if (it == cache_.end())
        return {};
    return it->second;
}

std::string derivative_variable(const std::vector<std::string>& axis_names, std::size_t axis,
                                int order, const std::string& variable) {
    if (order == 0)
        return variable;
    if (axis >= axis_names.size())
        throw InputError("derivative axis " + std::to_string(axis) + " out of range");
    std::string name = variable + "_";
    for (int i = 0; i < order; ++i)
        name += axis_names[axis];
    return name;
}

std::vector<double> evaluate_token(const Token& token, const Workspace& ws) {
    if (auto hit = ws.cached(token); !hit.empty())
        return {hit.begin(), hit.end()};

    return std::visit(
        overloaded{
            [&](const DerivativeToken& d) -> std::vector<double> {
                const std::string name = derivative_variable(ws.axis_names(), d.axis, d.order);
                if (!ws.has_base(name))
                    throw InputError("derivative '" + name + "' was not precomputed");
                auto v = ws.base(name);
                return {v.begin(), v.end()};
            },
            [&](const CosToken& c) -> std::vector<double> {
                const auto omega = ws.base("omega");
                const std::size_t n = ws.n_samples();
                std::vector<double> out(n);
                if (!ws.stacked_complex()) {
                    const auto lambda = ws.base("lambda");
                    for (std::size_t i = 0; i < n; ++i)
                        out[i] = std::cos(c.frequency * omega[i]) * std::pow(lambda[i], c.power);
                    return out;
                }
                const auto re = ws.base("lambda_re");
                const auto im = ws.base("lambda_im");
                const std::size_t half = n / 2;
                for (std::size_t i = 0; i < half; ++i) {
                    const std::complex<double> z =
                        std::cos(c.frequency * omega[i]) *
                        std::pow(std::complex<double>(re[i], im[i]), c.power);
                    out[i] = z.real();
                    out[half + i] = z.imag();
                }
                return out;
            },
        },
        token);
}

std::vector<double> evaluate_term(const Term& term, const Workspace& ws) {
    if (term.size() == 0)
        throw InputError("cannot evaluate an empty term");
    if (ws.stacked_complex() && term.size() > 1)
        throw InputError("stacked complex workspaces only evaluate single-token terms");
    std::vector<double> out = evaluate_token(term.tokens().front(), ws);
    for (std::size_t t = 1; t < term.size(); ++t) {
        const Token& token = term.tokens()[t];
        if (auto hit = ws.cached(token); !hit.empty()) {
            for (std::size_t i = 0; i < out.size(); ++i)
                out[i] *= hit[i];
        } else {
            const auto v = evaluate_token(token, ws);
            for (std::size_t i = 0; i < out.size(); ++i)
                out[i] *= v[i];
        }
    }
    return out;
}

void precompute_tokens(Workspace& ws, const FamilyConfig& family) {
    for (const auto& token : admissible_tokens(family))
        if (!ws.is_cached(token))
            ws.cache(token, evaluate_token(token, ws));
}

} // namespace eqdisc
