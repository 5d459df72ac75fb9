#ifndef SUBSEG_EVALUATION_HPP
#define SUBSEG_EVALUATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "subseg/corpus_io.hpp"
#include "subseg/errors.hpp"
#include "subseg/model.hpp"
#include "subseg/numeric.hpp"
#include "subseg/prior.hpp"

namespace subseg {

// Internal split positions (1..len-1) of a morph sequence.
inline std::vector<int> boundary_positions(const std::vector<std::u32string>& morphs) {
  std::vector<int> out;
  int pos = 0;
  for (size_t i = 0; i + 1 < morphs.size(); ++i) {
    pos += static_cast<int>(morphs[i].size());
    out.push_back(pos);
  }
  return out;
}

inline std::vector<int> boundary_positions(const GoldReference& ref) {
  std::vector<int> out;
  int pos = 0;
  for (size_t i = 0; i + 1 < ref.size(); ++i) {
    pos += static_cast<int>(ref[i].surface.size());
    out.push_back(pos);
  }
  return out;
}

// Re-score a fixed segmentation of the training corpus as if it were a
// trained model: tally morph counts, normalize, assemble the two-part cost.
inline CostBreakdown evaluate_cost(const SegmentedCorpus& segmentation,
                                   const WordCountTable& data, const PriorConfig& prior) {
  if (data.empty()) throw ValidationError("cannot evaluate over an empty corpus");
  U32Map<double> counts;
  for (size_t i = 0; i < data.size(); ++i) {
    const auto& word = data.entry(i).word;
    const auto* morphs = segmentation.find(word);
    if (!morphs)
      throw Error("word missing from segmentation: \"" + encode_utf8(word) + "\"");
    const double eff = data.effective_count(i);
    for (const auto& m : *morphs) counts[m] += eff;
  }
  std::vector<std::pair<std::u32string, double>> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end());

  const CharDistribution chars = corpus_char_distribution(data);
  double nu = 0.0, sum_clogc = 0.0, sum_spell = 0.0;
  for (const auto& [m, c] : sorted) {
    nu += c;
    sum_clogc += c * std::log(c);
    sum_spell += chars.spell_cost(m);
  }
  const double likelihood = nu * std::log(nu) - sum_clogc;
  double prior_nats = 0.0;
  if (prior.has_form())
    prior_nats += form_prior_from_sum(sum_spell, static_cast<long long>(sorted.size()));
  if (prior.has_freq_distribution())
    prior_nats += freq_distribution_prior(nu, static_cast<long long>(sorted.size()));
  return CostBreakdown::make(prior_nats, likelihood, prior.alpha);
}

struct BPRWordDetail {
  std::u32string word;
  int assigned = 0;   // hypothesis boundary count
  int correct = 0;    // boundaries shared with the best reference
  int reference = 0;  // best reference boundary count
  int best_reference = 0;
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;
};

struct BPRResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<BPRWordDetail> words;
};

namespace detail {

// Score one word against one reference. Vacuously empty sides score 1, so an
// unsplit hypothesis on an unsplit reference is a perfect match while a split
// hypothesis on an unsplit reference is penalized in precision only.
inline BPRWordDetail score_against(const std::vector<int>& hyp, const std::vector<int>& ref) {
  BPRWordDetail d;
  d.assigned = static_cast<int>(hyp.size());
  d.reference = static_cast<int>(ref.size());
  std::vector<int> inter;
  std::set_intersection(hyp.begin(), hyp.end(), ref.begin(), ref.end(), std::back_inserter(inter));
  d.correct = static_cast<int>(inter.size());
  d.precision = d.assigned ? static_cast<double>(d.correct) / d.assigned : 1.0;
  d.recall = d.reference ? static_cast<double>(d.correct) / d.reference : 1.0;
  d.f1 = (d.precision > 0.0 && d.recall > 0.0)
             ? 2.0 * d.precision * d.recall / (d.precision + d.recall)
             : 0.0;
  return d;
}

// Best-scoring reference per word; ties go to the first in file order.
inline BPRWordDetail score_word(const std::vector<int>& hyp, const GoldStandard::Entry& gold) {
  BPRWordDetail best;
  for (size_t r = 0; r < gold.references.size(); ++r) {
    BPRWordDetail d = score_against(hyp, boundary_positions(gold.references[r]));
    d.best_reference = static_cast<int>(r);
    if (r == 0 || d.f1 > best.f1) best = d;
  }
  best.word = gold.word;
  return best;
}

}  // namespace detail

// Boundary precision/recall/F1, macro-averaged over word types with the best
// reference chosen per word; F is the harmonic mean of the averaged P and R.
inline BPRResult boundary_prf(const SegmentedCorpus& hypothesis, const GoldStandard& gold) {
  if (gold.size() == 0) throw ValidationError("empty gold standard");
  BPRResult result;
  double sum_p = 0.0, sum_r = 0.0;
  for (const auto& entry : gold.entries()) {
    const auto* morphs = hypothesis.find(entry.word);
    if (!morphs)
      throw Error("word missing from hypothesis: \"" + encode_utf8(entry.word) + "\"");
    BPRWordDetail d = detail::score_word(boundary_positions(*morphs), entry);
    sum_p += d.precision;
    sum_r += d.recall;
    result.words.push_back(std::move(d));
  }
  result.precision = sum_p / static_cast<double>(gold.size());
  result.recall = sum_r / static_cast<double>(gold.size());
  result.f1 = (result.precision > 0.0 && result.recall > 0.0)
                  ? 2.0 * result.precision * result.recall / (result.precision + result.recall)
                  : 0.0;
  return result;
}

// Category pair of a missed boundary; pairs outside the attested five are
// folded into UNKNOWN, as is anything touching an unlabeled morph.
inline std::string under_segmentation_key(MorphCategory left, MorphCategory right) {
  const std::string key = std::string(to_string(left)) + "-" + to_string(right);
  static const char* kKnown[] = {"STM-SUF", "STM-STM", "SUF-SUF", "SUF-STM", "PRE-STM"};
  for (const char* k : kKnown)
    if (key == k) return key;
  return "UNKNOWN";
}

struct ErrorProfile {
  std::map<std::string, long long> over;   // by morph category
  std::map<std::string, long long> under;  // by category pair
  long long hypothesis_boundaries = 0;
  long long reference_boundaries = 0;
  long long matched_boundaries = 0;

  long long over_total() const {
    long long t = 0;
    for (const auto& [k, v] : over) t += v;
    return t;
  }
  long long under_total() const {
    long long t = 0;
    for (const auto& [k, v] : under) t += v;
    return t;
  }

  // Percentage of all errors of the kind; sums to 100 when errors exist.
  std::map<std::string, double> over_error_percentages() const {
    std::map<std::string, double> out;
    const double t = static_cast<double>(over_total());
    for (const auto& [k, v] : over) out[k] = t > 0 ? 100.0 * v / t : 0.0;
    return out;
  }
  std::map<std::string, double> under_error_percentages() const {
    std::map<std::string, double> out;
    const double t = static_cast<double>(under_total());
    for (const auto& [k, v] : under) out[k] = t > 0 ? 100.0 * v / t : 0.0;
    return out;
  }

  // Percentage of hypothesis boundaries that are correct.
  double precision_proxy() const {
    return hypothesis_boundaries ? 100.0 * matched_boundaries / hypothesis_boundaries : 100.0;
  }
  // Percentage of reference boundaries recovered.
  double recall_proxy() const {
    return reference_boundaries ? 100.0 * matched_boundaries / reference_boundaries : 100.0;
  }

  // Share of all hypothesis boundaries that are over-segmentation errors in
  // the given category (the table layout where error columns plus the
  // precision proxy sum to 100).
  double over_share(const std::string& key) const {
    auto it = over.find(key);
    const long long v = it == over.end() ? 0 : it->second;
    return hypothesis_boundaries ? 100.0 * v / hypothesis_boundaries : 0.0;
  }
  double under_share(const std::string& key) const {
    auto it = under.find(key);
    const long long v = it == under.end() ? 0 : it->second;
    return reference_boundaries ? 100.0 * v / reference_boundaries : 0.0;
  }
};

// Over-/under-segmentation analysis against the best reference of each word.
// An unmatched hypothesis boundary falls strictly inside one gold morph and
// is charged to that morph's category; a missed gold boundary is charged to
// the pair of categories around it.
inline ErrorProfile error_analysis(const SegmentedCorpus& hypothesis, const GoldStandard& gold) {
  ErrorProfile profile;
  for (const auto& entry : gold.entries()) {
    const auto* morphs = hypothesis.find(entry.word);
    if (!morphs)
      throw Error("word missing from hypothesis: \"" + encode_utf8(entry.word) + "\"");
    const std::vector<int> hyp = boundary_positions(*morphs);
    const BPRWordDetail d = detail::score_word(hyp, entry);
    const GoldReference& ref = entry.references[d.best_reference];
    const std::vector<int> refb = boundary_positions(ref);

    profile.hypothesis_boundaries += static_cast<long long>(hyp.size());
    profile.reference_boundaries += static_cast<long long>(refb.size());
    profile.matched_boundaries += d.correct;

    // morph spans of the best reference
    std::vector<std::pair<int, int>> spans;
    int pos = 0;
    for (const auto& m : ref) {
      spans.emplace_back(pos, pos + static_cast<int>(m.surface.size()));
      pos += static_cast<int>(m.surface.size());
    }
    for (int b : hyp) {
      if (std::binary_search(refb.begin(), refb.end(), b)) continue;
      for (size_t s = 0; s < spans.size(); ++s) {
        if (b > spans[s].first && b < spans[s].second) {
          profile.over[to_string(ref[s].category)]++;
          break;
        }
      }
    }
    for (size_t r = 0; r < refb.size(); ++r) {
      if (std::binary_search(hyp.begin(), hyp.end(), refb[r])) continue;
      profile.under[under_segmentation_key(ref[r].category, ref[r + 1].category)]++;
    }
  }
  return profile;
}

// ---------------------------------------------------------------------------
// Two-sided Wilcoxon signed-rank test with zero splitting: zero differences
// keep their ranks and contribute half to each side. Exact null distribution
// up to 25 pairs, tie-corrected normal approximation above.
// ---------------------------------------------------------------------------

struct WilcoxonResult {
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p_value = 1.0;
  size_t n = 0;
  bool exact = true;
};

inline WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& x,
                                           const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("paired samples differ in length");
  const size_t n = x.size();
  WilcoxonResult res;
  res.n = n;
  if (n == 0) return res;

  std::vector<double> d(n);
  for (size_t i = 0; i < n; ++i) d[i] = x[i] - y[i];
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return std::abs(d[a]) < std::abs(d[b]); });

  // average ranks over ties, quadrupled so half-ranks of zeros stay integral
  std::vector<long long> rank4(n, 0);
  double tie_correction = 0.0;
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j < n && std::abs(d[order[j]]) == std::abs(d[order[i]])) ++j;
    const long long avg2 = static_cast<long long>(i + 1 + j);  // 2x the average rank
    for (size_t k = i; k < j; ++k) rank4[order[k]] = 2 * avg2;
    const double t = static_cast<double>(j - i);
    tie_correction += (t * t * t - t) / 48.0;
    i = j;
  }

  long long wplus4 = 0, wminus4 = 0;
  for (size_t i = 0; i < n; ++i) {
    if (d[i] > 0)
      wplus4 += rank4[i];
    else if (d[i] < 0)
      wminus4 += rank4[i];
    else {
      wplus4 += rank4[i] / 2;
      wminus4 += rank4[i] / 2;
    }
  }
  res.w_plus = wplus4 / 4.0;
  res.w_minus = wminus4 / 4.0;

  if (n <= 25) {
    res.exact = true;
    // null distribution of 4*W+ over all 2^n sign assignments
    const long long total4 = 2 * static_cast<long long>(n) * (n + 1);
    std::vector<double> dp(total4 + 1, 0.0);
    dp[0] = 1.0;
    for (size_t i = 0; i < n; ++i) {
      const long long r = rank4[i];
      for (long long s = total4; s >= r; --s) dp[s] += dp[s - r];
    }
    const long long w_obs4 = std::min(wplus4, wminus4);
    double below = 0.0;
    for (long long s = 0; s <= w_obs4; ++s) below += dp[s];
    const double p = 2.0 * below / std::pow(2.0, static_cast<double>(n));
    res.p_value = std::min(p, 1.0);
  } else {
    res.exact = false;
    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_correction;
    if (var <= 0.0) {
      res.p_value = 1.0;
      return res;
    }
    const double z = (res.w_plus - mean) / std::sqrt(var);
    res.p_value = std::min(2.0 * normal_sf(std::abs(z)), 1.0);
  }
  return res;
}

}  // namespace subseg

#endif
