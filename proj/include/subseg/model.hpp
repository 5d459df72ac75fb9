#ifndef SUBSEG_MODEL_HPP
#define SUBSEG_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "subseg/errors.hpp"
#include "subseg/numeric.hpp"
#include "subseg/utf8.hpp"

namespace subseg {

struct U32Hash {
  using is_transparent = void;
  size_t operator()(std::u32string_view s) const noexcept {
    // FNV-1a over code points
    std::uint64_t h = 1469598103934665603ull;
    for (char32_t c : s) {
      h ^= static_cast<std::uint64_t>(c);
      h *= 1099511628211ull;
    }
    return static_cast<size_t>(h);
  }
  size_t operator()(const std::u32string& s) const noexcept {
    return (*this)(std::u32string_view(s));
  }
};

template <typename V>
using U32Map = std::unordered_map<std::u32string, V, U32Hash, std::equal_to<>>;

// Immutable set of subwords with dense ids. Ids follow code-point
// lexicographic order of the subwords, which keeps every derived artifact
// (model files, pruning tie-breaks) deterministic. Single-code-point entries
// are protected: they are never pruned, preserving open-vocabulary coverage
// of the training charset.
class SubwordLexicon {
public:
  SubwordLexicon() = default;

  static SubwordLexicon from_subwords(std::vector<std::u32string> subwords) {
    SubwordLexicon lex;
    std::sort(subwords.begin(), subwords.end());
    lex.entries_ = std::move(subwords);
    lex.index_.reserve(lex.entries_.size());
    for (std::int32_t id = 0; id < static_cast<std::int32_t>(lex.entries_.size()); ++id) {
      const std::u32string& s = lex.entries_[id];
      if (s.empty()) throw ValidationError("lexicon entries must be non-empty");
      if (id > 0 && s == lex.entries_[id - 1])
        throw ValidationError("duplicate lexicon entry: \"" + encode_utf8(s) + "\"");
      lex.max_len_ = std::max(lex.max_len_, static_cast<int>(s.size()));
      lex.index_.emplace(s, id);
    }
    return lex;
  }

  std::int32_t size() const { return static_cast<std::int32_t>(entries_.size()); }
  const std::u32string& at(std::int32_t id) const { return entries_[id]; }
  const std::vector<std::u32string>& entries() const { return entries_; }
  int max_len() const { return max_len_; }

  std::int32_t id_of(std::u32string_view s) const {
    auto it = index_.find(s);
    return it == index_.end() ? -1 : it->second;
  }
  bool contains(std::u32string_view s) const { return index_.find(s) != index_.end(); }
  bool is_protected(std::int32_t id) const { return entries_[id].size() == 1; }

  std::int32_t protected_count() const {
    std::int32_t n = 0;
    for (const auto& s : entries_) n += (s.size() == 1);
    return n;
  }

  bool operator==(const SubwordLexicon& other) const { return entries_ == other.entries_; }

private:
  std::vector<std::u32string> entries_;
  U32Map<std::int32_t> index_;
  int max_len_ = 0;
};

using LexiconPtr = std::shared_ptr<const SubwordLexicon>;

// Unigram language model: the lexicon plus one natural-log probability per
// subword. Immutable; copies share the lexicon.
class UnigramModel {
public:
  UnigramModel() = default;
  UnigramModel(LexiconPtr lexicon, std::vector<double> logprob)
      : lexicon_(std::move(lexicon)), logprob_(std::move(logprob)) {
    if (!lexicon_ || lexicon_->size() == 0)
      throw ValidationError("model requires a non-empty lexicon");
    if (static_cast<std::int32_t>(logprob_.size()) != lexicon_->size())
      throw ValidationError("logprob vector size does not match lexicon");
    min_logprob_ = 0.0;
    for (double lp : logprob_) {
      if (!std::isfinite(lp)) throw ValidationError("non-finite logprob in model");
      if (lp > 0.0) throw ValidationError("positive logprob in model");
      min_logprob_ = std::min(min_logprob_, lp);
    }
  }

  const SubwordLexicon& lexicon() const { return *lexicon_; }
  const LexiconPtr& lexicon_ptr() const { return lexicon_; }
  double logprob(std::int32_t id) const { return logprob_[id]; }
  const std::vector<double>& logprobs() const { return logprob_; }
  int max_len() const { return lexicon_->max_len(); }

  // Reserved score for OOV code points at segmentation time.
  double min_logprob() const { return min_logprob_; }

  double total_mass() const {
    double s = 0.0;
    for (double lp : logprob_) s += std::exp(lp);
    return s;
  }

  bool operator==(const UnigramModel& other) const {
    return lexicon() == other.lexicon() && logprob_ == other.logprob_;
  }

private:
  LexiconPtr lexicon_;
  std::vector<double> logprob_;
  double min_logprob_ = 0.0;
};

// Expected subword counts from an E-step (or hard counts from a Viterbi
// pass), indexed by lexicon id, plus the corpus log-likelihood under the
// model that produced them.
struct ExpectedCounts {
  std::vector<double> counts;
  double total = 0.0;
  double data_loglik = 0.0;

  ExpectedCounts() = default;
  explicit ExpectedCounts(std::int32_t lexicon_size)
      : counts(static_cast<size_t>(lexicon_size), 0.0) {}

  void add(std::int32_t id, double c) {
    counts[id] += c;
    total += c;
  }

  // Pointwise sum; associative and commutative, so E-step shards can be
  // reduced in any grouping.
  void merge(const ExpectedCounts& other) {
    if (counts.size() != other.counts.size())
      throw ValidationError("cannot merge counts over different lexicons");
    for (size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    total += other.total;
    data_loglik += other.data_loglik;
  }
};

// One segmentation of one word. Concatenation of the morphs always equals
// the word; checked at construction.
struct Segmentation {
  std::u32string word;
  std::vector<std::u32string> morphs;
  double logprob = 0.0;

  static Segmentation make(std::u32string word, std::vector<std::u32string> morphs,
                           double logprob) {
    std::u32string concat;
    for (const auto& m : morphs) concat += m;
    if (concat != word)
      throw ValidationError("morphs do not concatenate to the word: \"" +
                            encode_utf8(word) + "\"");
    return Segmentation{std::move(word), std::move(morphs), logprob};
  }

  bool operator==(const Segmentation& other) const {
    return word == other.word && morphs == other.morphs;
  }
};

// Plain maximum-likelihood M-step: p(z) = C_z / sum(C). Zero counts are
// floored rather than dropped, so EM alone never removes a subword from the
// lexicon; removal happens only in pruning.
inline UnigramModel m_step_plain(const LexiconPtr& lexicon, const ExpectedCounts& counts) {
  if (static_cast<std::int32_t>(counts.counts.size()) != lexicon->size())
    throw ValidationError("counts do not match lexicon");
  if (!(counts.total > 0.0)) throw DomainError("M-step needs a positive count total");
  double floored_total = 0.0;
  for (double c : counts.counts) floored_total += std::max(c, kCountFloor);
  const double log_total = std::log(floored_total);
  std::vector<double> lp(counts.counts.size());
  for (size_t i = 0; i < lp.size(); ++i)
    lp[i] = std::min(std::log(std::max(counts.counts[i], kCountFloor)) - log_total, 0.0);
  return UnigramModel(lexicon, std::move(lp));
}

// Bayesian EM M-step: p(z) = exp(psi(C_z) - psi(sum C)). The digamma
// normalization discounts small counts and leaves total mass below one;
// no renormalization is applied.
inline UnigramModel m_step_bayesian(const LexiconPtr& lexicon, const ExpectedCounts& counts) {
  if (static_cast<std::int32_t>(counts.counts.size()) != lexicon->size())
    throw ValidationError("counts do not match lexicon");
  if (!(counts.total > 0.0)) throw DomainError("M-step needs a positive count total");
  const double psi_total = digamma(counts.total);
  const double log_total = std::log(counts.total);
  std::vector<double> lp(counts.counts.size());
  for (size_t i = 0; i < lp.size(); ++i) {
    const double c = counts.counts[i];
    if (c >= kCountFloor) {
      lp[i] = std::min(digamma(c) - psi_total, 0.0);
    } else {
      lp[i] = std::log(kCountFloor) - log_total;
    }
  }
  return UnigramModel(lexicon, std::move(lp));
}

}  // namespace subseg

#endif
