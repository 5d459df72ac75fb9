#ifndef SUBSEG_EMPRUNE_HPP
#define SUBSEG_EMPRUNE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "subseg/corpus_io.hpp"
#include "subseg/errors.hpp"
#include "subseg/lattice.hpp"
#include "subseg/model.hpp"
#include "subseg/numeric.hpp"
#include "subseg/prior.hpp"
#include "subseg/seed.hpp"

namespace subseg {

enum class EmVariant { em, lateen, viterbi_prune };

inline const char* to_string(EmVariant v) {
  switch (v) {
    case EmVariant::em: return "em";
    case EmVariant::lateen: return "lateen";
    case EmVariant::viterbi_prune: return "viterbi-prune";
  }
  return "?";
}

enum class PruneCriterion { mdl, autotune, lexicon_size };

inline const char* to_string(PruneCriterion c) {
  switch (c) {
    case PruneCriterion::mdl: return "mdl";
    case PruneCriterion::autotune: return "autotune";
    case PruneCriterion::lexicon_size: return "size";
  }
  return "?";
}

struct TrainConfig {
  EmVariant em_variant = EmVariant::em;
  int sub_iterations = 3;
  double pruning_quota = 0.2;  // fraction of the remaining lexicon prunable per round
  PruneCriterion criterion = PruneCriterion::mdl;
  long long target_size = 0;  // for autotune / lexicon_size
  PriorConfig prior;
  Dampening dampening = Dampening::ones;
  double stop_cost_rel_threshold = 1e-4;
  int max_rounds = 15;
  SeedConfig seed;
  std::uint64_t rng_seed = 0;
  int threads = 1;

  void validate() const {
    prior.validate();
    seed.validate();
    if (sub_iterations < 1) throw ValidationError("sub_iterations must be >= 1");
    if (!(pruning_quota > 0.0 && pruning_quota < 1.0))
      throw ValidationError("pruning_quota must be in (0, 1)");
    if (max_rounds < 1) throw ValidationError("max_rounds must be >= 1");
    if (stop_cost_rel_threshold < 0.0)
      throw ValidationError("stop_cost_rel_threshold must be >= 0");
    if (threads < 1) throw ValidationError("threads must be >= 1");
    if ((criterion == PruneCriterion::mdl || criterion == PruneCriterion::autotune) &&
        prior.variant == PriorVariant::noprior)
      throw ValidationError("MDL pruning criteria are not compatible with omitting the prior");
    if ((criterion == PruneCriterion::autotune || criterion == PruneCriterion::lexicon_size) &&
        target_size < 1)
      throw ValidationError("criterion requires a target lexicon size >= 1");
  }
};

struct RoundRecord {
  int round = 0;
  long long lexicon_size = 0;  // after this round's pruning
  CostBreakdown cost;          // measured after this round's EM, before pruning
  long long pruned = 0;
  double alpha = 1.0;  // alpha in effect for the pruning decision
  bool quota_capped = false;
};

struct TrainHistory {
  std::vector<RoundRecord> rounds;

  static const char* csv_header() { return "round,lexicon_size,prior,likelihood,weighted,alpha,pruned"; }

  std::string to_csv() const {
    std::string out = csv_header();
    out += '\n';
    char buf[256];
    for (const auto& r : rounds) {
      std::snprintf(buf, sizeof(buf), "%d,%lld,%.17g,%.17g,%.17g,%.17g,%lld\n", r.round,
                    r.lexicon_size, r.cost.prior_nats, r.cost.likelihood_nats,
                    r.cost.weighted_total, r.alpha, r.pruned);
      out += buf;
    }
    return out;
  }
};

// Estimated cost change if one subword is removed and its expected count
// redistributed over its Viterbi replacement. Protected subwords carry the
// +inf sentinel in both parts.
struct RemovalDelta {
  double d_prior = 0.0;
  double d_likelihood = 0.0;
};

constexpr double kNeverPrune = std::numeric_limits<double>::infinity();

// Per-round progress hook; receives each history row as it is recorded.
using RoundCallback = std::function<void(const RoundRecord&)>;

namespace detail {

inline double xlogp(double c, double nu) { return c > 0.0 ? c * std::log(c / nu) : 0.0; }

// Delta estimation for a single subword, given the lattice of its own
// surface string with the subword itself masked out.
inline RemovalDelta one_removal_delta(double c_z, double nu, long long mu, double spell_z,
                                      const LatticeArc* arcs, size_t n_arcs, int len,
                                      const double* lp_by_base, const std::uint8_t* alive,
                                      std::int32_t skip_base_id,
                                      const std::int32_t* base_to_current,
                                      const std::vector<double>& counts,
                                      const PriorConfig& prior, ViterbiScratch& vs,
                                      std::vector<std::int32_t>& path) {
  if (!viterbi_packed(arcs, n_arcs, len, lp_by_base, alive, skip_base_id, vs))
    return {kNeverPrune, kNeverPrune};
  extract_path(arcs, len, vs, path);
  const long long k = static_cast<long long>(path.size());
  const double nu_after = nu + static_cast<double>(k - 1) * c_z;

  // scope: the removed subword plus the distinct morphs of its replacement,
  // with occurrence multiplicities
  double nll_before = -xlogp(c_z, nu);
  double nll_after = 0.0;
  for (size_t i = 0; i < path.size(); ++i) {
    bool first = true;
    int occ = 0;
    for (size_t j = 0; j < path.size(); ++j) {
      if (path[j] == path[i]) {
        if (j < i) first = false;
        ++occ;
      }
    }
    if (!first) continue;  // count each distinct morph once
    const std::int32_t cur = base_to_current ? base_to_current[path[i]] : path[i];
    const double c_m = counts[cur];
    nll_before -= xlogp(c_m, nu);
    nll_after -= xlogp(c_m + occ * c_z, nu_after);
  }
  RemovalDelta d;
  d.d_likelihood = nll_after - nll_before;
  d.d_prior = 0.0;
  if (prior.has_form()) d.d_prior += std::log(static_cast<double>(mu)) - spell_z;
  if (prior.has_freq_distribution())
    d.d_prior += freq_distribution_prior(nu_after, mu - 1) - freq_distribution_prior(nu, mu);
  return d;
}

// Removal candidates with finite weighted delta, sorted ascending by
// (weighted delta, id). When negative_only, stops at the first nonnegative
// delta ("until the estimated cost starts rising"); always capped by
// max_removals.
inline std::vector<std::int32_t> select_removals(const std::vector<RemovalDelta>& deltas,
                                                 double alpha, long long max_removals,
                                                 bool negative_only) {
  std::vector<std::pair<double, std::int32_t>> order;
  order.reserve(deltas.size());
  for (std::int32_t id = 0; id < static_cast<std::int32_t>(deltas.size()); ++id) {
    const double w = deltas[id].d_prior + alpha * deltas[id].d_likelihood;
    if (!std::isfinite(w)) continue;
    if (negative_only && !(w < 0.0)) continue;
    order.emplace_back(w, id);
  }
  std::sort(order.begin(), order.end());
  if (static_cast<long long>(order.size()) > max_removals)
    order.resize(static_cast<size_t>(std::max<long long>(max_removals, 0)));
  std::vector<std::int32_t> ids;
  ids.reserve(order.size());
  for (const auto& [w, id] : order) ids.push_back(id);
  return ids;
}

inline long long quota_cap(double quota, long long size) {
  return static_cast<long long>(std::floor(quota * static_cast<double>(size)));
}

}  // namespace detail

// Renormalized model over the survivors after removing the given subwords.
inline UnigramModel apply_removals(const UnigramModel& model,
                                   const std::vector<std::int32_t>& removed) {
  if (removed.empty()) return model;
  std::vector<std::uint8_t> dead(model.lexicon().size(), 0);
  for (std::int32_t id : removed) dead[id] = 1;
  double lse = kNegInf;
  for (std::int32_t id = 0; id < model.lexicon().size(); ++id)
    if (!dead[id]) lse = log_add_exp(lse, model.logprob(id));
  std::vector<std::u32string> subwords;
  std::vector<double> lp;
  for (std::int32_t id = 0; id < model.lexicon().size(); ++id) {
    if (dead[id]) continue;
    subwords.push_back(model.lexicon().at(id));
    lp.push_back(model.logprob(id) - lse);
  }
  auto lexicon = std::make_shared<SubwordLexicon>(SubwordLexicon::from_subwords(std::move(subwords)));
  return UnigramModel(std::move(lexicon), std::move(lp));
}

// alpha-weighted MDL pruning: remove in ascending order of estimated
// weighted delta while the estimate stays negative, bounded by the quota.
inline UnigramModel prune_mdl(const UnigramModel& model, const std::vector<RemovalDelta>& deltas,
                              double alpha, double quota) {
  if (static_cast<std::int32_t>(deltas.size()) != model.lexicon().size())
    throw ValidationError("deltas do not match the model lexicon");
  const long long cap = detail::quota_cap(quota, model.lexicon().size());
  return apply_removals(model, detail::select_removals(deltas, alpha, cap, true));
}

struct AutotuneResult {
  double alpha = 1.0;
  // False when no alpha makes MDL pruning stop at the requested count.
  bool exact = false;
};

// Choose alpha so that MDL pruning removes exactly
// min(current_size - target_size, max_removals) subwords. A subword with
// opposite-signed delta parts is removed iff alpha is on the removal side of
// its threshold -d_prior/d_likelihood; same-signed subwords are removed
// always or never, independent of alpha.
inline AutotuneResult autotune_alpha(const std::vector<RemovalDelta>& deltas,
                                     long long target_size, long long current_size,
                                     long long max_removals) {
  if (target_size < 1) throw ValidationError("target size must be >= 1");
  const long long wanted = std::min(current_size - target_size, max_removals);

  long long always = 0;
  std::vector<double> dec;  // removed iff alpha < threshold
  std::vector<double> inc;  // removed iff alpha > threshold
  for (const auto& d : deltas) {
    if (!std::isfinite(d.d_prior) || !std::isfinite(d.d_likelihood)) continue;  // never pruned
    if (d.d_prior < 0.0 && d.d_likelihood <= 0.0) {
      ++always;
    } else if (d.d_prior <= 0.0 && d.d_likelihood < 0.0) {
      ++always;
    } else if (d.d_prior >= 0.0 && d.d_likelihood >= 0.0) {
      // always kept
    } else if (d.d_prior < 0.0) {
      dec.push_back(-d.d_prior / d.d_likelihood);
    } else {
      inc.push_back(-d.d_prior / d.d_likelihood);
    }
  }
  std::sort(dec.begin(), dec.end());
  std::sort(inc.begin(), inc.end());

  auto removed_at = [&](double alpha) -> long long {
    const long long from_dec =
        dec.end() - std::upper_bound(dec.begin(), dec.end(), alpha);  // thresholds > alpha
    const long long from_inc =
        std::lower_bound(inc.begin(), inc.end(), alpha) - inc.begin();  // thresholds < alpha
    return always + from_dec + from_inc;
  };

  // removed_at is piecewise constant; probe every threshold and the open
  // intervals around them
  std::vector<double> candidates;
  candidates.reserve(2 * (dec.size() + inc.size()) + 2);
  std::vector<double> thresholds;
  thresholds.insert(thresholds.end(), dec.begin(), dec.end());
  thresholds.insert(thresholds.end(), inc.begin(), inc.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  if (thresholds.empty()) return {1.0, always >= wanted};
  candidates.push_back(thresholds.front() > 0 ? thresholds.front() / 2.0 : 1e-12);
  for (size_t i = 0; i < thresholds.size(); ++i) {
    candidates.push_back(thresholds[i]);
    const double next =
        i + 1 < thresholds.size() ? thresholds[i + 1] : thresholds[i] * 2.0 + 1.0;
    candidates.push_back((thresholds[i] + next) / 2.0);
  }

  double best_alpha = candidates.front();
  long long best_removed = removed_at(best_alpha);
  for (double a : candidates) {
    if (!(a > 0.0)) continue;
    const long long r = removed_at(a);
    if (r == wanted) return {a, true};
    // prefer the smallest overshoot: the per-round cap trims it back down
    const bool better = (r >= wanted && (best_removed < wanted || r < best_removed)) ||
                        (r < wanted && best_removed < wanted && r > best_removed);
    if (better) {
      best_alpha = a;
      best_removed = r;
    }
  }
  return {best_alpha, best_removed >= wanted};
}

// ---------------------------------------------------------------------------
// Trainer internals: a long-lived state holding lattices built once against
// the seed lexicon. Pruning only shrinks the current lexicon view; all
// public-op semantics (E-step, M-step, costs) are reproduced bit-exactly on
// the masked arrays.
// ---------------------------------------------------------------------------

namespace detail {

struct TrainerState {
  WordCountTable data;  // with the configured dampening applied
  CorpusLattices lattices;
  LexiconPtr base;
  std::vector<double> spell_by_base;
  std::vector<LatticeArc> sub_arcs;  // lattice arcs of each base subword's own string
  std::vector<size_t> sub_arc_off;
  CharDistribution chars;

  LexiconPtr current;
  std::vector<std::int32_t> base_to_current;
  std::vector<std::int32_t> current_to_base;
  std::vector<double> lp_by_base;
  std::vector<std::uint8_t> alive;
  int threads = 1;

  static TrainerState create(const WordCountTable& raw, const UnigramModel& seed_model,
                             Dampening dampening, int threads) {
    TrainerState st;
    st.data = WordCountTable::from_entries(raw.entries(), dampening);
    st.base = seed_model.lexicon_ptr();
    st.lattices = CorpusLattices::build(st.data, *st.base);
    st.chars = corpus_char_distribution(st.data);
    st.threads = threads;

    const std::int32_t n = st.base->size();
    st.spell_by_base.resize(n);
    st.sub_arc_off.assign(n + 1, 0);
    for (std::int32_t id = 0; id < n; ++id) {
      const std::u32string& s = st.base->at(id);
      st.spell_by_base[id] = st.chars.spell_cost(s);
      if (s.size() >= 2) append_word_arcs(s, *st.base, st.sub_arcs);
      st.sub_arc_off[id + 1] = st.sub_arcs.size();
    }

    st.current = st.base;
    st.base_to_current.resize(n);
    st.current_to_base.resize(n);
    for (std::int32_t id = 0; id < n; ++id) {
      st.base_to_current[id] = id;
      st.current_to_base[id] = id;
    }
    st.lp_by_base = seed_model.logprobs();
    st.alive.assign(n, 1);
    return st;
  }

  UnigramModel current_model() const {
    std::vector<double> lp(current->size());
    for (std::int32_t cur = 0; cur < current->size(); ++cur)
      lp[cur] = lp_by_base[current_to_base[cur]];
    return UnigramModel(current, std::move(lp));
  }

  void set_current_logprobs(const UnigramModel& m) {
    for (std::int32_t cur = 0; cur < current->size(); ++cur)
      lp_by_base[current_to_base[cur]] = m.logprob(cur);
  }

  ExpectedCounts estep(bool hard) const {
    CorpusPassOptions opt;
    opt.logprob_by_base = lp_by_base.data();
    opt.alive = alive.data();
    opt.base_to_current = base_to_current.data();
    opt.current_size = current->size();
    opt.threads = threads;
    opt.viterbi = hard;
    return corpus_pass(lattices, data, opt);
  }

  // Removes the given current-ids, renormalizing survivor parameters.
  void apply_removals_state(const std::vector<std::int32_t>& removed) {
    if (removed.empty()) return;
    std::vector<std::uint8_t> dead(current->size(), 0);
    for (std::int32_t id : removed) dead[id] = 1;
    double lse = kNegInf;
    for (std::int32_t cur = 0; cur < current->size(); ++cur)
      if (!dead[cur]) lse = log_add_exp(lse, lp_by_base[current_to_base[cur]]);
    std::vector<std::u32string> survivors;
    survivors.reserve(current->size() - removed.size());
    for (std::int32_t cur = 0; cur < current->size(); ++cur) {
      const std::int32_t b = current_to_base[cur];
      if (dead[cur]) {
        alive[b] = 0;
        base_to_current[b] = -1;
      } else {
        survivors.push_back(current->at(cur));
        lp_by_base[b] -= lse;
      }
    }
    current = std::make_shared<SubwordLexicon>(SubwordLexicon::from_subwords(std::move(survivors)));
    current_to_base.assign(current->size(), -1);
    for (std::int32_t b = 0; b < base->size(); ++b) {
      if (!alive[b]) continue;
      const std::int32_t cur = current->id_of(base->at(b));
      base_to_current[b] = cur;
      current_to_base[cur] = b;
    }
  }

  ExpectedCounts em_round_state(const TrainConfig& config) {
    const bool bayesian = config.prior.bayesian_m_step();
    for (int s = 0; s < config.sub_iterations; ++s) {
      ExpectedCounts counts = estep(false);
      UnigramModel m = bayesian ? m_step_bayesian(current, counts) : m_step_plain(current, counts);
      set_current_logprobs(m);
    }
    switch (config.em_variant) {
      case EmVariant::em:
        return estep(false);
      case EmVariant::lateen: {
        ExpectedCounts hard = estep(true);
        UnigramModel m = bayesian ? m_step_bayesian(current, hard) : m_step_plain(current, hard);
        set_current_logprobs(m);
        return hard;
      }
      case EmVariant::viterbi_prune:
        return estep(true);
    }
    throw Error("unreachable");
  }

  std::vector<RemovalDelta> removal_deltas_state(const ExpectedCounts& counts,
                                                 const PriorConfig& prior) const {
    const std::int32_t n = current->size();
    const long long mu = n;
    const double nu = counts.total;
    std::vector<RemovalDelta> out(n);
    constexpr std::int32_t kBlock = 1024;
    const size_t n_blocks = (n + kBlock - 1) / kBlock;
    run_blocks(n_blocks, threads, [&](size_t blk) {
      ViterbiScratch vs;
      std::vector<std::int32_t> path;
      const std::int32_t lo = static_cast<std::int32_t>(blk) * kBlock;
      const std::int32_t hi = std::min(lo + kBlock, n);
      for (std::int32_t cur = lo; cur < hi; ++cur) {
        if (current->is_protected(cur)) {
          out[cur] = {kNeverPrune, kNeverPrune};
          continue;
        }
        const std::int32_t b = current_to_base[cur];
        out[cur] = one_removal_delta(
            counts.counts[cur], nu, mu, spell_by_base[b], sub_arcs.data() + sub_arc_off[b],
            sub_arc_off[b + 1] - sub_arc_off[b], static_cast<int>(base->at(b).size()),
            lp_by_base.data(), alive.data(), b, base_to_current.data(), counts.counts, prior, vs,
            path);
      }
    });
    return out;
  }

  CostBreakdown cost_of(const ExpectedCounts& counts, const PriorConfig& prior) const {
    const double likelihood = -counts.data_loglik;
    double prior_nats = 0.0;
    if (prior.has_form()) {
      double sum_spell = 0.0;
      for (std::int32_t cur = 0; cur < current->size(); ++cur)
        sum_spell += spell_by_base[current_to_base[cur]];
      prior_nats += form_prior_from_sum(sum_spell, current->size());
    }
    if (prior.has_freq_distribution())
      prior_nats += freq_distribution_prior(counts.total, current->size());
    return CostBreakdown::make(prior_nats, likelihood, prior.alpha);
  }
};

}  // namespace detail

// One EM round: sub-iterations of E+M, then the variant-specific final pass
// whose counts feed the pruning decision.
inline std::pair<UnigramModel, ExpectedCounts> em_round(const UnigramModel& model,
                                                        const WordCountTable& data,
                                                        const TrainConfig& config) {
  auto st = detail::TrainerState::create(data, model, config.dampening, config.threads);
  ExpectedCounts counts = st.em_round_state(config);
  return {st.current_model(), std::move(counts)};
}

// Estimated per-subword removal deltas against the current expected counts.
inline std::vector<RemovalDelta> removal_deltas(const UnigramModel& model,
                                                const ExpectedCounts& counts,
                                                const PriorConfig& prior,
                                                const CharDistribution& chars) {
  if (static_cast<std::int32_t>(counts.counts.size()) != model.lexicon().size())
    throw ValidationError("counts do not match the model lexicon");
  const SubwordLexicon& lex = model.lexicon();
  std::vector<RemovalDelta> out(lex.size());
  detail::ViterbiScratch vs;
  std::vector<std::int32_t> path;
  std::vector<LatticeArc> arcs;
  for (std::int32_t id = 0; id < lex.size(); ++id) {
    if (lex.is_protected(id)) {
      out[id] = {kNeverPrune, kNeverPrune};
      continue;
    }
    arcs.clear();
    detail::append_word_arcs(lex.at(id), lex, arcs);
    out[id] = detail::one_removal_delta(counts.counts[id], counts.total, lex.size(),
                                        chars.spell_cost(lex.at(id)), arcs.data(), arcs.size(),
                                        static_cast<int>(lex.at(id).size()),
                                        model.logprobs().data(), nullptr, id, nullptr,
                                        counts.counts, prior, vs, path);
  }
  return out;
}

inline TrainConfig sentencepiece_preset(long long target_size) {
  if (target_size < 1) throw ValidationError("target lexicon size must be >= 1");
  TrainConfig c;
  c.em_variant = EmVariant::viterbi_prune;
  c.sub_iterations = 2;
  c.criterion = PruneCriterion::lexicon_size;
  c.target_size = target_size;
  c.prior.variant = PriorVariant::noprior;
  c.prior.alpha = 1.0;
  c.dampening = Dampening::none;
  c.seed.forcesplit = ForceSplitRule{};
  c.seed.prepruning = false;
  c.stop_cost_rel_threshold = 0.0;  // run to the target size
  c.max_rounds = 100;
  return c;
}

// Full EM+Prune training: seed, then rounds of EM and pruning until the
// stopping condition, with one final EM round to polish the parameters.
inline std::pair<UnigramModel, TrainHistory> train(const WordCountTable& data,
                                                   const TrainConfig& config,
                                                   const RoundCallback& on_round = {}) {
  config.validate();
  UnigramModel seed_model = build_seed(
      WordCountTable::from_entries(data.entries(), config.dampening), config.seed);
  auto st = detail::TrainerState::create(data, seed_model, config.dampening, config.threads);

  TrainHistory history;
  double prev_weighted = std::numeric_limits<double>::quiet_NaN();
  int round = 0;
  while (round < config.max_rounds) {
    ++round;
    ExpectedCounts counts = st.em_round_state(config);
    const CostBreakdown cost = st.cost_of(counts, config.prior);
    const std::vector<RemovalDelta> deltas = st.removal_deltas_state(counts, config.prior);

    const long long size_before = st.current->size();
    const long long quota_max = detail::quota_cap(config.pruning_quota, size_before);
    double alpha_eff = config.prior.alpha;
    long long cap = quota_max;
    bool negative_only = true;
    bool quota_capped = false;
    switch (config.criterion) {
      case PruneCriterion::mdl:
        break;
      case PruneCriterion::autotune: {
        cap = std::min(quota_max, std::max<long long>(size_before - config.target_size, 0));
        quota_capped = size_before - config.target_size > quota_max;
        alpha_eff = autotune_alpha(deltas, config.target_size, size_before, cap).alpha;
        break;
      }
      case PruneCriterion::lexicon_size: {
        cap = std::min(quota_max, std::max<long long>(size_before - config.target_size, 0));
        quota_capped = size_before - config.target_size > quota_max;
        negative_only = false;
        break;
      }
    }
    const std::vector<std::int32_t> removed =
        detail::select_removals(deltas, alpha_eff, cap, negative_only);
    st.apply_removals_state(removed);

    RoundRecord rec;
    rec.round = round;
    rec.lexicon_size = st.current->size();
    rec.cost = cost;
    rec.pruned = static_cast<long long>(removed.size());
    rec.alpha = alpha_eff;
    rec.quota_capped = quota_capped;
    history.rounds.push_back(rec);
    if (on_round) on_round(rec);

    const bool target_reached = (config.criterion == PruneCriterion::autotune ||
                                 config.criterion == PruneCriterion::lexicon_size) &&
                                st.current->size() <= config.target_size;
    const bool converged =
        !std::isnan(prev_weighted) && config.stop_cost_rel_threshold > 0.0 &&
        std::abs(cost.weighted_total - prev_weighted) <
            config.stop_cost_rel_threshold * std::abs(prev_weighted);
    if (target_reached || converged || removed.empty()) break;
    prev_weighted = cost.weighted_total;
  }

  // final polish round over the pruned lexicon
  ExpectedCounts counts = st.em_round_state(config);
  RoundRecord rec;
  rec.round = round + 1;
  rec.lexicon_size = st.current->size();
  rec.cost = st.cost_of(counts, config.prior);
  rec.pruned = 0;
  rec.alpha = history.rounds.empty() ? config.prior.alpha : history.rounds.back().alpha;
  history.rounds.push_back(rec);
  if (on_round) on_round(rec);

  return {st.current_model(), std::move(history)};
}

}  // namespace subseg

#endif
