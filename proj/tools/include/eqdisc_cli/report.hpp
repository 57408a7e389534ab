#pragma once

/// @file report.hpp
/// @brief JSON forms of tokens, terms, models and polynomials.

#include <eqdisc/evolution.hpp>
#include <eqdisc/floquet_lab.hpp>

#include <json.hpp>

#include <filesystem>
#include <string>

namespace eqdisc::cli {

using json = nlohmann::json;

inline constexpr int kReportSchema = 1;

json token_to_json(const Token& token);
Token token_from_json(const json& j);

json term_to_json(const Term& term);
Term term_from_json(const json& j);

/// Everything needed to rebuild the model, plus the diagnostics of its run.
json model_to_json(const DiscoveredModel& model);
/// Restores target, terms, labels and coefficients (diagnostics included
/// when present).
DiscoveredModel model_from_json(const json& j);

json series_to_json(const CosineSeries& series);
json polynomial_to_json(const QuadraticPolynomial& poly);

/// Copy of a report without its "timings" entries (recursively).
json without_timings(json report);

/// Pretty-printed JSON followed by a newline.
void write_json(const std::filesystem::path& path, const json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace eqdisc::cli
