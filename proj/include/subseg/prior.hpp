#ifndef SUBSEG_PRIOR_HPP
#define SUBSEG_PRIOR_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "subseg/corpus_io.hpp"
#include "subseg/errors.hpp"
#include "subseg/model.hpp"
#include "subseg/numeric.hpp"

namespace subseg {

enum class PriorVariant { full, noexp_psi, nofreqdistr, noprior };

inline const char* to_string(PriorVariant v) {
  switch (v) {
    case PriorVariant::full: return "full";
    case PriorVariant::noexp_psi: return "noexppsi";
    case PriorVariant::nofreqdistr: return "nofreqdistr";
    case PriorVariant::noprior: return "noprior";
  }
  return "?";
}

struct PriorConfig {
  PriorVariant variant = PriorVariant::full;
  double alpha = 1.0;  // likelihood weight

  void validate() const {
    if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
  }
  bool has_form() const { return variant != PriorVariant::noprior; }
  bool has_freq_distribution() const {
    return variant == PriorVariant::full || variant == PriorVariant::noexp_psi;
  }
  bool bayesian_m_step() const { return variant != PriorVariant::noexp_psi; }
};

// Two-part cost: prior nats plus alpha-weighted likelihood nats.
struct CostBreakdown {
  double prior_nats = 0.0;
  double likelihood_nats = 0.0;
  double alpha = 1.0;
  double weighted_total = 0.0;

  static CostBreakdown make(double prior, double likelihood, double alpha) {
    return CostBreakdown{prior, likelihood, alpha, prior + alpha * likelihood};
  }
};

// Non-informative prior on how the total token count is distributed over the
// lexicon: log C(round(nu)-1, mu-1). Real-valued expected totals are rounded;
// degenerate shapes cost nothing.
inline double freq_distribution_prior(double total_tokens, long long lexicon_size) {
  if (lexicon_size < 1) throw DomainError("lexicon size must be >= 1");
  if (!(total_tokens > 0.0)) throw DomainError("total token count must be positive");
  const long long nu = std::llround(total_tokens);
  const long long mu = lexicon_size;
  if (mu == 1 || nu <= mu) return 0.0;
  return std::lgamma(static_cast<double>(nu)) - std::lgamma(static_cast<double>(mu)) -
         std::lgamma(static_cast<double>(nu - mu + 1));
}

// Character distribution used to spell out lexicon entries, including the
// end-of-morph event. Estimated from the corpus: code points weighted by
// effective counts, one end event per word type.
class CharDistribution {
public:
  static CharDistribution estimate(const WordCountTable& data) {
    if (data.empty()) throw ValidationError("cannot estimate characters from an empty corpus");
    CharDistribution cd;
    std::unordered_map<char32_t, double> weight;
    double total = 0.0;
    for (size_t i = 0; i < data.size(); ++i) {
      const double eff = data.effective_count(i);
      for (char32_t c : data.entry(i).word) {
        weight[c] += eff;
        total += eff;
      }
    }
    const double end_weight = static_cast<double>(data.size());
    total += end_weight;
    cd.log_p_.reserve(weight.size());
    for (const auto& [c, w] : weight) cd.log_p_.emplace(c, std::log(w / total));
    cd.log_p_end_ = std::log(end_weight / total);
    return cd;
  }

  double log_p(char32_t c) const {
    auto it = log_p_.find(c);
    if (it == log_p_.end())
      throw DomainError("code point missing from character distribution");
    return it->second;
  }
  double log_p_end() const { return log_p_end_; }

  double probability(char32_t c) const { return std::exp(log_p(c)); }
  double probability_end() const { return std::exp(log_p_end_); }

  // Nats to spell one morph: every code point plus the end marker.
  double spell_cost(std::u32string_view morph) const {
    double cost = -log_p_end_;
    for (char32_t c : morph) cost -= log_p(c);
    return cost;
  }

  // Direct construction, mainly for tests.
  static CharDistribution from_probabilities(const std::unordered_map<char32_t, double>& p,
                                             double p_end) {
    CharDistribution cd;
    for (const auto& [c, prob] : p) cd.log_p_.emplace(c, std::log(prob));
    cd.log_p_end_ = std::log(p_end);
    return cd;
  }

private:
  std::unordered_map<char32_t, double> log_p_;
  double log_p_end_ = 0.0;
};

inline CharDistribution corpus_char_distribution(const WordCountTable& data) {
  return CharDistribution::estimate(data);
}

// Spelling cost of the whole lexicon minus ln(mu!) for the unordered set.
inline double form_prior_from_sum(double sum_spell, long long mu) {
  return sum_spell - std::lgamma(static_cast<double>(mu) + 1.0);
}

inline double form_prior(const SubwordLexicon& lexicon, const CharDistribution& chars) {
  double sum_spell = 0.0;
  for (std::int32_t id = 0; id < lexicon.size(); ++id)
    sum_spell += chars.spell_cost(lexicon.at(id));
  return form_prior_from_sum(sum_spell, lexicon.size());
}

// Assemble the two-part cost for a model given the expected counts produced
// under it. The noexp_psi variant changes the M-step, not this assembly.
inline CostBreakdown total_cost(const UnigramModel& model, const ExpectedCounts& counts,
                                const PriorConfig& prior, const CharDistribution& chars) {
  if (static_cast<std::int32_t>(counts.counts.size()) != model.lexicon().size())
    throw ValidationError("counts do not match the model lexicon");
  const double likelihood = -counts.data_loglik;
  double prior_nats = 0.0;
  if (prior.has_form()) prior_nats += form_prior(model.lexicon(), chars);
  if (prior.has_freq_distribution())
    prior_nats += freq_distribution_prior(counts.total, model.lexicon().size());
  return CostBreakdown::make(prior_nats, likelihood, prior.alpha);
}

}  // namespace subseg

#endif
