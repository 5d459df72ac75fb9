#ifndef SUBSEG_SEED_HPP
#define SUBSEG_SEED_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "subseg/corpus_io.hpp"
#include "subseg/errors.hpp"
#include "subseg/model.hpp"

namespace subseg {

// Mandatory segmentation boundaries before and/or after given code points.
// A multi-character substring that would span such a boundary is banned from
// the seed lexicon; since EM+Prune never adds subwords, this alone
// guarantees the forced splits in every output segmentation.
struct ForceSplitRule {
  std::set<char32_t> before;
  std::set<char32_t> after;

  bool empty() const { return before.empty() && after.empty(); }

  // True when the substring contains a before-char past its first position
  // or an after-char before its last. Single characters never violate.
  bool violates(std::u32string_view s) const {
    for (size_t i = 0; i < s.size(); ++i) {
      if (i > 0 && before.count(s[i])) return true;
      if (i + 1 < s.size() && after.count(s[i])) return true;
    }
    return false;
  }

  // Boundary positions this rule mandates inside a word (1..len-1).
  std::vector<int> mandated_boundaries(std::u32string_view word) const {
    std::vector<int> out;
    for (size_t i = 0; i < word.size(); ++i) {
      if (i > 0 && before.count(word[i])) out.push_back(static_cast<int>(i));
      if (i + 1 < word.size() && after.count(word[i])) out.push_back(static_cast<int>(i) + 1);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

struct SeedConfig {
  long long max_seed_size = 1000000;
  int max_substring_len = 20;
  bool prepruning = true;
  ForceSplitRule forcesplit;

  void validate() const {
    if (max_seed_size < 1) throw ValidationError("max_seed_size must be >= 1");
    if (max_substring_len < 1) throw ValidationError("max_substring_len must be >= 1");
  }
};

// Every substring counted with effective-count weighting; overlapping
// occurrences within one word all count.
inline U32Map<double> enumerate_substrings(const WordCountTable& data, const SeedConfig& config) {
  if (data.empty()) throw ValidationError("cannot seed from an empty corpus");
  U32Map<double> counts;
  for (size_t i = 0; i < data.size(); ++i) {
    const std::u32string& w = data.entry(i).word;
    const double eff = data.effective_count(i);
    const int L = static_cast<int>(w.size());
    for (int start = 0; start < L; ++start) {
      const int max_end = std::min(L, start + config.max_substring_len);
      for (int end = start + 1; end <= max_end; ++end) {
        auto view = std::u32string_view(w).substr(start, end - start);
        auto it = counts.find(view);
        if (it == counts.end())
          counts.emplace(std::u32string(view), eff);
        else
          it->second += eff;
      }
    }
  }
  return counts;
}

// Redundancy pre-pruning: a multi-character substring whose count equals the
// count of one of its one-character extensions never occurs outside that
// extension, so it is dropped to make room for more useful candidates. Only
// initial and final substrings are checked, matching the extension walk.
inline U32Map<double> preprune_redundant(U32Map<double> counts) {
  std::vector<std::u32string> doomed;
  for (const auto& [x, c] : counts) {
    if (x.size() < 3) continue;
    const auto prefix = std::u32string_view(x).substr(0, x.size() - 1);
    const auto suffix = std::u32string_view(x).substr(1);
    if (auto it = counts.find(prefix); it != counts.end() && it->second == c)
      doomed.emplace_back(prefix);
    if (auto it = counts.find(suffix); it != counts.end() && it->second == c)
      doomed.emplace_back(suffix);
  }
  for (const auto& s : doomed) {
    auto it = counts.find(s);
    if (it != counts.end()) counts.erase(it);
  }
  return counts;
}

inline U32Map<double> apply_forcesplit(U32Map<double> counts, const ForceSplitRule& rule) {
  if (rule.empty()) return counts;
  for (auto it = counts.begin(); it != counts.end();) {
    if (rule.violates(it->first))
      it = counts.erase(it);
    else
      ++it;
  }
  return counts;
}

// Seed pipeline up to selection: enumerate, pre-prune, force-split filter,
// keep the most frequent candidates with all single characters admitted
// unconditionally. Returned entries are sorted lexicographically.
inline std::vector<std::pair<std::u32string, double>> select_seed(const WordCountTable& data,
                                                                  const SeedConfig& config) {
  config.validate();
  U32Map<double> counts = enumerate_substrings(data, config);
  if (config.prepruning) counts = preprune_redundant(std::move(counts));
  counts = apply_forcesplit(std::move(counts), config.forcesplit);

  std::vector<std::pair<std::u32string, double>> singles;
  std::vector<std::pair<std::u32string, double>> multi;
  for (auto& [s, c] : counts) {
    if (s.size() == 1)
      singles.emplace_back(s, c);
    else
      multi.emplace_back(s, c);
  }
  if (static_cast<long long>(singles.size()) > config.max_seed_size)
    throw ValidationError("max_seed_size is smaller than the corpus alphabet");

  const long long multi_budget = config.max_seed_size - static_cast<long long>(singles.size());
  if (static_cast<long long>(multi.size()) > multi_budget) {
    auto by_count = [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    };
    std::nth_element(multi.begin(), multi.begin() + multi_budget, multi.end(), by_count);
    multi.resize(multi_budget);
  }

  std::vector<std::pair<std::u32string, double>> selected = std::move(singles);
  selected.insert(selected.end(), std::make_move_iterator(multi.begin()),
                  std::make_move_iterator(multi.end()));
  std::sort(selected.begin(), selected.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return selected;
}

// Initial model: seed selection with counts normalized into probabilities.
inline UnigramModel build_seed(const WordCountTable& data, const SeedConfig& config) {
  const auto selected = select_seed(data, config);
  double total = 0.0;
  for (const auto& [s, c] : selected) total += c;
  std::vector<std::u32string> subwords;
  subwords.reserve(selected.size());
  for (const auto& [s, c] : selected) subwords.push_back(s);
  auto lexicon = std::make_shared<SubwordLexicon>(SubwordLexicon::from_subwords(std::move(subwords)));
  const double log_total = std::log(total);
  std::vector<double> lp(lexicon->size());
  // selected is sorted the same way as the lexicon, so indices line up
  for (std::int32_t id = 0; id < lexicon->size(); ++id)
    lp[id] = std::min(std::log(selected[id].second) - log_total, 0.0);
  return UnigramModel(std::move(lexicon), std::move(lp));
}

// Debug dump of a substring count table, most frequent first.
inline void write_substring_counts(std::vector<std::pair<std::u32string, double>> rows,
                                   const std::string& path) {
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open file for writing: " + path);
  char buf[64];
  for (const auto& [s, c] : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g", c);
    out << buf << '\t' << encode_utf8(s) << '\n';
  }
}

inline void dump_seed(const WordCountTable& data, const SeedConfig& config,
                      const std::string& path) {
  write_substring_counts(select_seed(data, config), path);
}

}  // namespace subseg

#endif
