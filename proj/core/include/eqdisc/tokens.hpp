#pragma once

/// @file tokens.hpp
/// @brief Tokens (atomic equation factors), terms (products of tokens) and
/// the workspace of precomputed token values they are evaluated on.

#include "eqdisc/rng.hpp"

#include <compare>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace eqdisc {

/// Derivative of the field along one axis; order 0 is the field itself.
struct DerivativeToken {
    std::size_t axis = 0;
    int order = 0;
    auto operator<=>(const DerivativeToken&) const = default;
};

/// cos(frequency * Omega) * Lambda^power. The amplitude is the regression
/// weight of the term and is not part of the token.
struct CosToken {
    double frequency = 0.0;
    int power = 0;
    auto operator<=>(const CosToken&) const = default;
};

using Token = std::variant<DerivativeToken, CosToken>;

/// Canonical derivative token (order 0 always lives on axis 0).
Token derivative_token(std::size_t axis, int order);
Token cos_token(double frequency, int power);

/// Product of 1..k tokens, kept sorted so equal multisets compare equal.
class Term {
  public:
    Term() = default;
    explicit Term(std::vector<Token> tokens);
    Term(std::initializer_list<Token> tokens) : Term(std::vector<Token>(tokens)) {}

    const std::vector<Token>& tokens() const noexcept { return tokens_; }
    std::size_t size() const noexcept { return tokens_.size(); }

    /// Replaces token `i` and restores canonical order.
    void replace_token(std::size_t i, Token token);

    auto operator<=>(const Term&) const = default;

  private:
    std::vector<Token> tokens_;
};

struct DerivativeFamily {
    std::vector<std::string> axis_names;
    int max_order = 2;
    bool allow_order_zero = true;
    int max_tokens = 3; ///< k: tokens per term
    std::string variable = "u";
};

/// Parametric cosine family; terms hold exactly one token.
struct CosFamily {
    std::vector<double> frequencies;
    std::vector<int> powers{0, 1, 2};
};

using FamilyConfig = std::variant<DerivativeFamily, CosFamily>;

/// Integer frequencies 0..10 and powers {0,1,2}.
CosFamily default_cos_family();

/// Every admissible token of the family in canonical order.
std::vector<Token> admissible_tokens(const FamilyConfig& family);

/// Largest number of tokens a term of this family may hold.
int max_term_tokens(const FamilyConfig& family);

/// Uniform draw from the admissible tokens.
Token sample_random_token(const FamilyConfig& family, Rng& rng);

/// Random token whose kind matches `like`; used by the token-change mutation.
Token sample_random_token_like(const FamilyConfig& family, const Token& like, Rng& rng);

/// Term length uniform in 1..k, then tokens drawn independently.
Term sample_random_term(const FamilyConfig& family, Rng& rng);

/// Number of distinct multisets of 1..k tokens out of nt.
double count_terms(std::size_t token_count, int max_tokens);

/// All distinct terms of the family (multisets of length 1..k).
std::vector<Term> enumerate_terms(const FamilyConfig& family);

std::string token_label(const Token& token, const FamilyConfig& family);

/// e.g. "d2u/dx2 * du/dt1" or "cos(6*Omega)*Lambda^1".
std::string term_label(const Term& term, const FamilyConfig& family);

/// Per-run store of sample points and precomputed token vectors.
///
/// Derivative tokens read base variables named by derivative_variable();
/// cosine tokens read "omega" and "lambda" (or "lambda_re"/"lambda_im" when
/// the workspace stacks real and imaginary parts of complex samples: the
/// first half of every vector is the real part, the second half imaginary).
class Workspace {
  public:
    explicit Workspace(std::size_t n_samples, std::vector<std::string> axis_names = {},
                       bool stacked_complex = false);

    std::size_t n_samples() const noexcept { return n_samples_; }
    const std::vector<std::string>& axis_names() const noexcept { return axis_names_; }
    bool stacked_complex() const noexcept { return stacked_complex_; }

    void set_base(const std::string& name, std::vector<double> values);
    bool has_base(const std::string& name) const;
    std::span<const double> base(const std::string& name) const;
    std::vector<std::string> base_names() const;

    /// Stores token values once; a second store of the same token is an error.
    void cache(const Token& token, std::vector<double> values);
    bool is_cached(const Token& token) const;
    std::span<const double> cached(const Token& token) const;
    std::size_t cache_size() const noexcept { return cache_.size(); }

  private:
    std::size_t n_samples_;
    std::vector<std::string> axis_names_;
    bool stacked_complex_;
    std::map<std::string, std::vector<double>> base_;
    std::map<Token, std::vector<double>> cache_;
};

/// Base-variable name for a derivative token: "u", "u_x", "u_xx", ...
std::string derivative_variable(const std::vector<std::string>& axis_names, std::size_t axis,
                                int order, const std::string& variable = "u");

/// Token values over the workspace samples (cached values when present).
std::vector<double> evaluate_token(const Token& token, const Workspace& ws);

/// Elementwise product of the member tokens.
std::vector<double> evaluate_term(const Term& term, const Workspace& ws);

/// Evaluates and caches every admissible token of the family.
void precompute_tokens(Workspace& ws, const FamilyConfig& family);

} // namespace eqdisc
