#include "eqdisc_cli/report.hpp"

#include <eqdisc/errors.hpp>

#include <fstream>

namespace eqdisc::cli {

namespace {

template <class T>
T require(const json& j, const char* key, const char* what) {
    if (!j.is_object() || !j.contains(key))
        throw InputError(std::string(what) + " lacks '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InputError(std::string(what) + " has a malformed '" + key + "'");
    }
}

} // namespace

json token_to_json(const Token& token) {
    if (const auto* d = std::get_if<DerivativeToken>(&token))
        return {{"kind", "derivative"}, {"axis", d->axis}, {"order", d->order}};
    const auto& c = std::get<CosToken>(token);
    return {{"kind", "cos"}, {"frequency", c.frequency}, {"power", c.power}};
}

Token token_from_json(const json& j) {
    const auto kind = require<std::string>(j, "kind", "token");
    if (kind == "derivative")
        return derivative_token(require<std::size_t>(j, "axis", "token"), require<int>(j, "order", "token"));
    if (kind == "cos")
        return cos_token(require<double>(j, "frequency", "token"), require<int>(j, "power", "token"));
    throw InputError("unknown token kind '" + kind + "'");
}

json term_to_json(const Term& term) {
    json out = json::array();
    for (const Token& t : term.tokens())
        out.push_back(token_to_json(t));
    return out;
}

Term term_from_json(const json& j) {
    if (!j.is_array() || j.empty())
        throw InputError("a term must be a non-empty token array");
    std::vector<Token> tokens;
    for (const json& t : j)
        tokens.push_back(token_from_json(t));
    return Term(std::move(tokens));
}

json model_to_json(const DiscoveredModel& model) {
    json terms = json::array();
    for (std::size_t i = 0; i < model.terms.size(); ++i)
        terms.push_back({{"tokens", term_to_json(model.terms[i])},
                         {"label", model.labels[i]},
                         {"coefficient", model.coefficients[i]},
                         {"raw_coefficient", model.raw_coefficients[i]}});
    return {
        {"equation", equation_string(model)},
        {"target", {{"tokens", term_to_json(model.target)}, {"label", model.target_label}}},
        {"terms", terms},
        {"lambda", model.lambda},
        {"fitness", model.fitness},
        {"refit_fitness", model.refit_fitness},
        {"residual_norm", model.residual_norm},
        {"relative_residual", model.relative_residual},
        {"token_count", token_count(model)},
        {"seed", model.seed},
        {"epochs", model.epochs},
        {"structure_epoch", model.structure_epoch},
        {"degenerate", model.degenerate},
        {"fitness_history", model.fitness_history},
    };
}

DiscoveredModel model_from_json(const json& j) {
    DiscoveredModel m;
    if (!j.is_object() || !j.contains("target") || !j.contains("terms"))
        throw InputError("report has no usable model");
    m.target = term_from_json(require<json>(j["target"], "tokens", "model target"));
    m.target_label = require<std::string>(j["target"], "label", "model target");
    for (const json& t : j["terms"]) {
        m.terms.push_back(term_from_json(require<json>(t, "tokens", "model term")));
        m.labels.push_back(require<std::string>(t, "label", "model term"));
        m.coefficients.push_back(require<double>(t, "coefficient", "model term"));
        m.raw_coefficients.push_back(t.value("raw_coefficient", 0.0));
    }
    m.lambda = j.value("lambda", 0.0);
    m.fitness = j.value("fitness", 0.0);
    m.refit_fitness = j.value("refit_fitness", 0.0);
    m.residual_norm = j.value("residual_norm", 0.0);
    m.relative_residual = j.value("relative_residual", 0.0);
    m.seed = j.value("seed", std::uint64_t{0});
    m.epochs = j.value("epochs", 0);
    m.structure_epoch = j.value("structure_epoch", 0);
    m.degenerate = j.value("degenerate", m.terms.empty());
    if (j.contains("fitness_history") && j["fitness_history"].is_array())
        for (const json& v : j["fitness_history"])
            m.fitness_history.push_back(v.is_number() ? v.get<double>() : 0.0);
    return m;
}

json series_to_json(const CosineSeries& series) {
    json out = json::array();
    for (const auto& [amp, freq] : series.terms)
        out.push_back({{"amplitude", amp}, {"frequency", freq}});
    return out;
}

json polynomial_to_json(const QuadraticPolynomial& poly) {
    return {{"a2", series_to_json(poly.a2)}, {"a1", series_to_json(poly.a1)}, {"a0", series_to_json(poly.a0)}};
}

json without_timings(json report) {
    if (report.is_object()) {
        report.erase("timings");
        for (auto& item : report.items())
            item.value() = without_timings(item.value());
    } else if (report.is_array()) {
        for (auto& value : report)
            value = without_timings(value);
    }
    return report;
}

void write_json(const std::filesystem::path& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("cannot write " + path.string());
    out << text;
    if (!out)
        throw InputError("failed writing " + path.string());
}

} // namespace eqdisc::cli
