#ifndef SUBSEG_BASELINE_HPP
#define SUBSEG_BASELINE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "subseg/corpus_io.hpp"
#include "subseg/emprune.hpp"
#include "subseg/errors.hpp"
#include "subseg/model.hpp"
#include "subseg/prior.hpp"
#include "subseg/seed.hpp"

namespace subseg {

struct BaselineConfig {
  PriorConfig prior;
  ForceSplitRule forcesplit;
  Dampening dampening = Dampening::ones;
  std::uint64_t rng_seed = 0;
  double convergence_threshold = 1e-4;  // relative cost improvement per epoch
  int max_epochs = 100;

  void validate() const {
    prior.validate();
    if (!(convergence_threshold >= 0.0))
      throw ValidationError("convergence_threshold must be >= 0");
    if (max_epochs < 1) throw ValidationError("max_epochs must be >= 1");
  }
};

struct BaselineResult {
  UnigramModel model;
  TrainHistory history;
  SegmentedCorpus segmentation;  // the store's final analysis of every word
};

namespace detail {

// Portable bounded draw (rejection sampling), so shuffles do not depend on
// the standard library's distribution implementations.
inline std::uint64_t bounded_uniform(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = bound * (UINT64_MAX / bound);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

inline void shuffle_indices(std::vector<std::uint32_t>& idx, std::mt19937_64& rng) {
  for (size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[bounded_uniform(rng, i)]);
}

// Current best analysis of one word-like unit: a recursive binary split.
struct SplitTree {
  int split = 0;  // code points in the left child; 0 = leaf
  std::unique_ptr<SplitTree> left, right;
};

inline void collect_leaves(const SplitTree& t, std::u32string_view text,
                           std::vector<std::u32string_view>& out) {
  if (t.split == 0) {
    out.push_back(text);
    return;
  }
  collect_leaves(*t.left, text.substr(0, t.split), out);
  collect_leaves(*t.right, text.substr(t.split), out);
}

inline double xlogx(double c) { return c > 0.0 ? c * std::log(c) : 0.0; }

// Greedy local search over recursive binary splits, with incrementally
// maintained morph counts and cost aggregates.
class BaselineSearch {
public:
  BaselineSearch(const PriorConfig& prior, const CharDistribution& chars)
      : prior_(prior), chars_(chars) {}

  void add(std::u32string_view morph, double c) {
    auto it = counts_.find(morph);
    if (it == counts_.end()) it = counts_.emplace(std::u32string(morph), 0.0).first;
    double& cnt = it->second;
    if (cnt <= 0.0) {
      ++mu_;
      sum_spell_ += spell(it->first);
    }
    sum_clogc_ += xlogx(cnt + c) - xlogx(cnt);
    cnt += c;
    nu_ += c;
  }

  void remove(std::u32string_view morph, double c) {
    auto it = counts_.find(morph);
    const double cnt = it->second;
    const double next = cnt - c;
    if (next < 1e-9) {
      // genuinely zero: counts are sums of effective counts >= 1
      sum_clogc_ -= xlogx(cnt);
      nu_ -= cnt;
      --mu_;
      sum_spell_ -= spell(it->first);
      counts_.erase(it);
    } else {
      sum_clogc_ += xlogx(next) - xlogx(cnt);
      it->second = next;
      nu_ -= c;
    }
  }

  double cost() const {
    double prior_nats = 0.0;
    if (prior_.has_form()) prior_nats += form_prior_from_sum(sum_spell_, mu_);
    if (prior_.has_freq_distribution() && nu_ > 0.0 && mu_ >= 1)
      prior_nats += freq_distribution_prior(nu_, mu_);
    const double likelihood = nu_ > 0.0 ? nu_ * std::log(nu_) - sum_clogc_ : 0.0;
    return prior_nats + prior_.alpha * likelihood;
  }

  CostBreakdown cost_breakdown() const {
    double prior_nats = 0.0;
    if (prior_.has_form()) prior_nats += form_prior_from_sum(sum_spell_, mu_);
    if (prior_.has_freq_distribution() && nu_ > 0.0 && mu_ >= 1)
      prior_nats += freq_distribution_prior(nu_, mu_);
    const double likelihood = nu_ > 0.0 ? nu_ * std::log(nu_) - sum_clogc_ : 0.0;
    return CostBreakdown::make(prior_nats, likelihood, prior_.alpha);
  }

  long long lexicon_size() const { return mu_; }

  // Rebuild aggregates from a deterministic ordering of the counts to squash
  // incremental floating-point drift at epoch boundaries.
  void recompute_from(const std::vector<std::pair<std::u32string, double>>& sorted_counts) {
    counts_.clear();
    nu_ = sum_clogc_ = sum_spell_ = 0.0;
    mu_ = 0;
    for (const auto& [m, c] : sorted_counts) {
      counts_.emplace(m, c);
      nu_ += c;
      sum_clogc_ += xlogx(c);
      sum_spell_ += spell_no_insert(m);
      ++mu_;
    }
  }

  const U32Map<double>& counts() const { return counts_; }

  // Best analysis of `text` carrying count c, by recursive binary splitting.
  // On return the chosen leaves have been added to the counts.
  SplitTree resegment(std::u32string_view text, double c) {
    SplitTree node;
    add(text, c);
    double best_cost = cost();
    int best_split = 0;
    const int L = static_cast<int>(text.size());
    for (int i = 1; i < L; ++i) {
      remove(text, c);
      add(text.substr(0, i), c);
      add(text.substr(i), c);
      const double split_cost = cost();
      remove(text.substr(0, i), c);
      remove(text.substr(i), c);
      add(text, c);
      if (split_cost < best_cost) {
        best_cost = split_cost;
        best_split = i;
      }
    }
    if (best_split == 0) return node;
    remove(text, c);
    node.split = best_split;
    node.left = std::make_unique<SplitTree>(resegment(text.substr(0, best_split), c));
    node.right = std::make_unique<SplitTree>(resegment(text.substr(best_split), c));
    return node;
  }

private:
  double spell(std::u32string_view morph) {
    auto it = spell_cache_.find(morph);
    if (it == spell_cache_.end())
      it = spell_cache_.emplace(std::u32string(morph), chars_.spell_cost(morph)).first;
    return it->second;
  }
  double spell_no_insert(std::u32string_view morph) {
    auto it = spell_cache_.find(morph);
    return it != spell_cache_.end() ? it->second : chars_.spell_cost(morph);
  }

  PriorConfig prior_;
  const CharDistribution& chars_;
  U32Map<double> counts_;
  U32Map<double> spell_cache_;
  double nu_ = 0.0;
  double sum_clogc_ = 0.0;
  double sum_spell_ = 0.0;
  long long mu_ = 0;
};

}  // namespace detail

// Baseline local search: whole-word (or whole-fragment, under forced
// splitting) initialization, then epochs of resegmentation in seeded random
// order until the cost improvement falls under the threshold.
inline BaselineResult train_baseline(const WordCountTable& data, const BaselineConfig& config,
                                     const RoundCallback& on_round = {}) {
  config.validate();
  if (data.empty()) throw ValidationError("cannot train on an empty corpus");
  const WordCountTable corpus = WordCountTable::from_entries(data.entries(), config.dampening);
  const CharDistribution chars = corpus_char_distribution(corpus);

  // force-split points are applied up front: fragments train as independent
  // word-like units
  struct Unit {
    std::u32string text;
    double count = 0.0;
  };
  std::vector<Unit> units;
  {
    U32Map<double> unit_counts;
    for (size_t i = 0; i < corpus.size(); ++i) {
      const std::u32string& w = corpus.entry(i).word;
      const double eff = corpus.effective_count(i);
      const auto bounds = config.forcesplit.mandated_boundaries(w);
      int prev = 0;
      for (int b : bounds) {
        unit_counts[w.substr(prev, b - prev)] += eff;
        prev = b;
      }
      unit_counts[w.substr(prev)] += eff;
    }
    units.reserve(unit_counts.size());
    for (auto& [t, c] : unit_counts) units.push_back({t, c});
    std::sort(units.begin(), units.end(),
              [](const Unit& a, const Unit& b) { return a.text < b.text; });
  }

  detail::BaselineSearch search(config.prior, chars);
  std::vector<detail::SplitTree> store(units.size());
  for (const auto& u : units) search.add(u.text, u.count);

  TrainHistory history;
  {
    RoundRecord rec;
    rec.round = 0;
    rec.lexicon_size = search.lexicon_size();
    rec.cost = search.cost_breakdown();
    rec.alpha = config.prior.alpha;
    history.rounds.push_back(rec);
    if (on_round) on_round(rec);
  }

  std::mt19937_64 rng(config.rng_seed);
  std::vector<std::uint32_t> order(units.size());
  std::iota(order.begin(), order.end(), 0u);
  double prev_cost = search.cost();
  std::vector<std::u32string_view> leaves;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    detail::shuffle_indices(order, rng);
    for (std::uint32_t ui : order) {
      const Unit& u = units[ui];
      const double cost_before = search.cost();
      leaves.clear();
      detail::collect_leaves(store[ui], u.text, leaves);
      for (auto m : leaves) search.remove(m, u.count);
      detail::SplitTree candidate = search.resegment(u.text, u.count);
      if (search.cost() > cost_before) {
        // local search keeps the status quo when no improvement was found
        std::vector<std::u32string_view> new_leaves;
        detail::collect_leaves(candidate, u.text, new_leaves);
        for (auto m : new_leaves) search.remove(m, u.count);
        for (auto m : leaves) search.add(m, u.count);
      } else {
        store[ui] = std::move(candidate);
      }
    }

    // deterministic epoch-end rebuild of the aggregates
    {
      U32Map<double> fresh;
      for (size_t ui = 0; ui < units.size(); ++ui) {
        leaves.clear();
        detail::collect_leaves(store[ui], units[ui].text, leaves);
        for (auto m : leaves) fresh[std::u32string(m)] += units[ui].count;
      }
      std::vector<std::pair<std::u32string, double>> sorted(fresh.begin(), fresh.end());
      std::sort(sorted.begin(), sorted.end());
      search.recompute_from(sorted);
    }

    const double cur_cost = search.cost();
    RoundRecord rec;
    rec.round = epoch;
    rec.lexicon_size = search.lexicon_size();
    rec.cost = search.cost_breakdown();
    rec.alpha = config.prior.alpha;
    history.rounds.push_back(rec);
    if (on_round) on_round(rec);
    if (prev_cost - cur_cost < config.convergence_threshold * std::abs(prev_cost)) break;
    prev_cost = cur_cost;
  }

  // final model: normalized morph counts, with any missing corpus code
  // points floored in to keep the open-vocabulary guarantee
  std::vector<std::pair<std::u32string, double>> final_counts(search.counts().begin(),
                                                              search.counts().end());
  std::sort(final_counts.begin(), final_counts.end());
  {
    U32Map<char> have;
    for (const auto& [m, c] : final_counts)
      if (m.size() == 1) have.emplace(m, 1);
    std::vector<std::u32string> missing;
    for (size_t i = 0; i < corpus.size(); ++i)
      for (char32_t c : corpus.entry(i).word) {
        std::u32string s(1, c);
        if (!have.count(s)) {
          have.emplace(s, 1);
          missing.push_back(std::move(s));
        }
      }
    for (auto& s : missing) final_counts.emplace_back(std::move(s), kCountFloor);
    std::sort(final_counts.begin(), final_counts.end());
  }
  double total = 0.0;
  for (const auto& [m, c] : final_counts) total += c;
  std::vector<std::u32string> subwords;
  subwords.reserve(final_counts.size());
  for (const auto& [m, c] : final_counts) subwords.push_back(m);
  auto lexicon = std::make_shared<SubwordLexicon>(SubwordLexicon::from_subwords(std::move(subwords)));
  std::vector<double> lp(lexicon->size());
  const double log_total = std::log(total);
  for (std::int32_t id = 0; id < lexicon->size(); ++id)
    lp[id] = std::min(std::log(final_counts[id].second) - log_total, 0.0);

  BaselineResult result{UnigramModel(std::move(lexicon), std::move(lp)), std::move(history), {}};

  // final per-word segmentations: concatenation of fragment analyses
  {
    U32Map<std::uint32_t> unit_index;
    for (std::uint32_t ui = 0; ui < units.size(); ++ui) unit_index.emplace(units[ui].text, ui);
    for (size_t i = 0; i < corpus.size(); ++i) {
      const std::u32string& w = corpus.entry(i).word;
      const auto bounds = config.forcesplit.mandated_boundaries(w);
      std::vector<std::u32string> morphs;
      int prev = 0;
      auto emit = [&](std::u32string_view frag) {
        const std::uint32_t ui = unit_index.find(frag)->second;
        leaves.clear();
        detail::collect_leaves(store[ui], frag, leaves);
        for (auto m : leaves) morphs.emplace_back(m);
      };
      for (int b : bounds) {
        emit(std::u32string_view(w).substr(prev, b - prev));
        prev = b;
      }
      emit(std::u32string_view(w).substr(prev));
      result.segmentation.add(std::move(morphs));
    }
  }
  return result;
}

}  // namespace subseg

#endif
