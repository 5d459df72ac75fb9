#ifndef SUBSEG_CORPUS_IO_HPP
#define SUBSEG_CORPUS_IO_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "subseg/errors.hpp"
#include "subseg/model.hpp"
#include "subseg/utf8.hpp"

namespace subseg {

enum class Dampening { none, log, ones };

inline const char* to_string(Dampening d) {
  switch (d) {
    case Dampening::none: return "none";
    case Dampening::log: return "log";
    case Dampening::ones: return "ones";
  }
  return "?";
}

inline double dampen_count(long long raw, Dampening d) {
  switch (d) {
    case Dampening::none: return static_cast<double>(raw);
    case Dampening::log: return std::log(static_cast<double>(raw)) + 1.0;
    case Dampening::ones: return 1.0;
  }
  return 0.0;
}

// The training corpus: word types with raw counts plus a dampening mode.
// Raw counts are stored; effective counts are derived on access. Entries are
// kept sorted by word so iteration order is deterministic everywhere.
class WordCountTable {
public:
  struct Entry {
    std::u32string word;
    long long count;
  };

  static WordCountTable from_entries(std::vector<Entry> entries, Dampening dampening) {
    for (const auto& e : entries) {
      if (e.word.empty()) throw ValidationError("empty word in count table");
      for (char32_t c : e.word)
        if (is_ascii_space(c))
          throw ValidationError("word contains whitespace: \"" + encode_utf8(e.word) + "\"");
      if (e.count < 1) throw ValidationError("word count must be >= 1");
    }
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.word < b.word; });
    // merge duplicates
    std::vector<Entry> merged;
    merged.reserve(entries.size());
    for (auto& e : entries) {
      if (!merged.empty() && merged.back().word == e.word)
        merged.back().count += e.count;
      else
        merged.push_back(std::move(e));
    }
    WordCountTable t;
    t.entries_ = std::move(merged);
    t.dampening_ = dampening;
    t.total_tokens_ = 0.0;
    for (const auto& e : t.entries_) t.total_tokens_ += dampen_count(e.count, dampening);
    return t;
  }

  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Entry& entry(size_t i) const { return entries_[i]; }
  const std::vector<Entry>& entries() const { return entries_; }
  Dampening dampening() const { return dampening_; }
  double effective_count(size_t i) const { return dampen_count(entries_[i].count, dampening_); }
  double total_tokens() const { return total_tokens_; }

private:
  std::vector<Entry> entries_;
  Dampening dampening_ = Dampening::none;
  double total_tokens_ = 0.0;
};

namespace detail {

inline std::string chomp(std::string line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
  return line;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  return in;
}

}  // namespace detail

// Count file: one `<count><TAB or SPACE><word>` per line. Duplicate words
// are summed.
inline WordCountTable read_word_counts(const std::string& path, Dampening dampening) {
  std::ifstream in = detail::open_input(path);
  std::vector<WordCountTable::Entry> entries;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::chomp(line);
    if (line.empty()) continue;
    const size_t sep = line.find_first_of(" \t");
    if (sep == std::string::npos)
      throw ParseError("no separator between count and word", lineno);
    const std::string count_str = line.substr(0, sep);
    const std::string word_str = line.substr(sep + 1);
    if (word_str.empty()) throw ParseError("missing word", lineno);
    long long count = 0;
    try {
      size_t pos = 0;
      count = std::stoll(count_str, &pos);
      if (pos != count_str.size()) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      throw ParseError("count is not an integer: \"" + count_str + "\"", lineno);
    }
    if (count < 1) throw ParseError("count must be >= 1", lineno);
    std::u32string word = decode_utf8(word_str);
    for (char32_t c : word)
      if (is_ascii_space(c)) throw ParseError("word contains whitespace", lineno);
    entries.push_back({std::move(word), count});
  }
  return WordCountTable::from_entries(std::move(entries), dampening);
}

enum class MorphCategory { PRE, STM, SUF, UNKNOWN };

inline const char* to_string(MorphCategory c) {
  switch (c) {
    case MorphCategory::PRE: return "PRE";
    case MorphCategory::STM: return "STM";
    case MorphCategory::SUF: return "SUF";
    case MorphCategory::UNKNOWN: return "UNKNOWN";
  }
  return "?";
}

struct GoldMorph {
  std::u32string surface;
  MorphCategory category = MorphCategory::UNKNOWN;
};

using GoldReference = std::vector<GoldMorph>;

// Reference segmentations, possibly several per word, with optional
// PRE/STM/SUF category labels.
class GoldStandard {
public:
  struct Entry {
    std::u32string word;
    std::vector<GoldReference> references;
  };

  void add(std::u32string word, std::vector<GoldReference> refs) {
    if (refs.empty()) throw ValidationError("gold entry without references");
    for (const auto& ref : refs) {
      std::u32string concat;
      for (const auto& m : ref) concat += m.surface;
      if (concat != word)
        throw ValidationError("gold morphs do not concatenate to the word: \"" +
                              encode_utf8(word) + "\"");
    }
    auto it = index_.find(word);
    if (it != index_.end()) {
      auto& existing = entries_[it->second].references;
      existing.insert(existing.end(), refs.begin(), refs.end());
    } else {
      index_.emplace(word, static_cast<std::int32_t>(entries_.size()));
      entries_.push_back({std::move(word), std::move(refs)});
    }
  }

  size_t size() const { return entries_.size(); }
  const Entry& entry(size_t i) const { return entries_[i]; }
  const std::vector<Entry>& entries() const { return entries_; }

private:
  std::vector<Entry> entries_;
  U32Map<std::int32_t> index_;
};

namespace detail {

inline MorphCategory parse_category(std::string_view s, bool* known) {
  *known = true;
  if (s == "PRE") return MorphCategory::PRE;
  if (s == "STM") return MorphCategory::STM;
  if (s == "SUF") return MorphCategory::SUF;
  if (s == "UNKNOWN") return MorphCategory::UNKNOWN;
  *known = false;
  return MorphCategory::UNKNOWN;
}

inline std::string trim(std::string s) {
  size_t b = s.find_first_not_of(" \t");
  size_t e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// Gold file: `<word><TAB><analysis>{, <analysis>}*`, each analysis a list of
// space-separated morphs, each morph optionally `<surface>|<CAT>`.
inline GoldStandard read_gold_standard(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  GoldStandard gold;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::chomp(line);
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("no TAB between word and analyses", lineno);
    const std::u32string word = decode_utf8(line.substr(0, tab));
    if (word.empty()) throw ParseError("empty word", lineno);
    std::vector<GoldReference> refs;
    std::stringstream analyses(line.substr(tab + 1));
    std::string analysis;
    while (std::getline(analyses, analysis, ',')) {
      analysis = detail::trim(analysis);
      if (analysis.empty()) throw ParseError("empty analysis", lineno);
      GoldReference ref;
      std::stringstream morphs(analysis);
      std::string token;
      while (morphs >> token) {
        GoldMorph m;
        const size_t bar = token.rfind('|');
        bool known = false;
        if (bar != std::string::npos && bar > 0) {
          const MorphCategory cat = detail::parse_category(
              std::string_view(token).substr(bar + 1), &known);
          if (known) {
            m.surface = decode_utf8(token.substr(0, bar));
            m.category = cat;
          }
        }
        if (!known) m.surface = decode_utf8(token);
        if (m.surface.empty()) throw ParseError("empty morph", lineno);
        ref.push_back(std::move(m));
      }
      if (ref.empty()) throw ParseError("analysis without morphs", lineno);
      refs.push_back(std::move(ref));
    }
    try {
      gold.add(word, std::move(refs));
    } catch (const ValidationError& e) {
      throw ParseError(std::string(e.what()), lineno);
    }
  }
  return gold;
}

// Model file: one `<logprob><TAB><subword>` per line, sorted by subword.
// Logprobs are written with 17 significant digits so the round trip is
// bit-exact.
inline void write_model(const UnigramModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open file for writing: " + path);
  const SubwordLexicon& lex = model.lexicon();
  char buf[64];
  for (std::int32_t id = 0; id < lex.size(); ++id) {
    std::snprintf(buf, sizeof(buf), "%.17g", model.logprob(id));
    out << buf << '\t' << encode_utf8(lex.at(id)) << '\n';
  }
  if (!out) throw Error("failed writing model to: " + path);
}

inline UnigramModel read_model(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  std::vector<std::u32string> subwords;
  U32Map<double> logprob_of;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::chomp(line);
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("no TAB between logprob and subword", lineno);
    double lp = 0.0;
    try {
      size_t pos = 0;
      lp = std::stod(line.substr(0, tab), &pos);
      if (pos != tab) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      throw ParseError("logprob is not a number", lineno);
    }
    if (!std::isfinite(lp)) throw ParseError("non-finite logprob", lineno);
    if (lp > 0.0) throw ParseError("positive logprob", lineno);
    std::u32string subword = decode_utf8(line.substr(tab + 1));
    if (subword.empty()) throw ParseError("empty subword", lineno);
    if (!logprob_of.emplace(subword, lp).second)
      throw ParseError("duplicate subword: \"" + encode_utf8(subword) + "\"", lineno);
    subwords.push_back(std::move(subword));
  }
  if (subwords.empty()) throw Error("model file is empty: " + path);
  SubwordLexicon lex = SubwordLexicon::from_subwords(std::move(subwords));
  std::vector<double> lp(lex.size());
  for (std::int32_t id = 0; id < lex.size(); ++id) lp[id] = logprob_of.find(lex.at(id))->second;
  return UnigramModel(std::make_shared<SubwordLexicon>(std::move(lex)), std::move(lp));
}

// A segmentation of a set of word types: one word per line, morphs separated
// by single spaces, the word being the concatenation.
class SegmentedCorpus {
public:
  struct Entry {
    std::u32string word;
    std::vector<std::u32string> morphs;
  };

  void add(std::vector<std::u32string> morphs) {
    std::u32string word;
    for (const auto& m : morphs) {
      if (m.empty()) throw ValidationError("empty morph in segmentation");
      word += m;
    }
    if (word.empty()) throw ValidationError("empty segmentation entry");
    auto it = index_.find(word);
    if (it != index_.end()) {
      if (entries_[it->second].morphs != morphs)
        throw ValidationError("conflicting segmentations for word: \"" +
                              encode_utf8(word) + "\"");
      return;
    }
    index_.emplace(word, static_cast<std::int32_t>(entries_.size()));
    entries_.push_back({std::move(word), std::move(morphs)});
  }

  const std::vector<std::u32string>* find(std::u32string_view word) const {
    auto it = index_.find(word);
    return it == index_.end() ? nullptr : &entries_[it->second].morphs;
  }

  size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

private:
  std::vector<Entry> entries_;
  U32Map<std::int32_t> index_;
};

inline SegmentedCorpus read_segmentation(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  SegmentedCorpus corpus;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::chomp(line);
    if (line.empty()) continue;
    std::vector<std::u32string> morphs;
    std::stringstream ss(line);
    std::string token;
    while (ss >> token) morphs.push_back(decode_utf8(token));
    if (morphs.empty()) continue;
    try {
      corpus.add(std::move(morphs));
    } catch (const ValidationError& e) {
      throw ParseError(std::string(e.what()), lineno);
    }
  }
  return corpus;
}

}  // namespace subseg

#endif
