#ifndef SUBSEG_LATTICE_HPP
#define SUBSEG_LATTICE_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "subseg/corpus_io.hpp"
#include "subseg/errors.hpp"
#include "subseg/model.hpp"
#include "subseg/numeric.hpp"

namespace subseg {

// Segmentation lattice of one word: nodes are code-point positions 0..L,
// arcs cover every substring present in the lexicon. Arcs are kept sorted by
// (end, start); a single left-to-right sweep then visits each node's
// incoming arcs after all its predecessors are final, and the reversed sweep
// does the same for the backward pass.
struct LatticeArc {
  std::int32_t subword_id;
  std::uint16_t start;
  std::uint16_t end;
};

struct Lattice {
  std::u32string word;
  int length = 0;
  std::vector<LatticeArc> arcs;
};

namespace detail {

constexpr std::uint16_t kMaxWordLen = 60000;

inline void append_word_arcs(std::u32string_view word, const SubwordLexicon& lexicon,
                             std::vector<LatticeArc>& out) {
  const int L = static_cast<int>(word.size());
  if (L > kMaxWordLen) throw ValidationError("word too long to build a lattice");
  const int max_len = lexicon.max_len();
  // generate grouped by end so no sort is needed afterwards
  for (int end = 1; end <= L; ++end) {
    const int lo = std::max(0, end - max_len);
    for (int start = lo; start < end; ++start) {
      const std::int32_t id = lexicon.id_of(word.substr(start, end - start));
      if (id >= 0)
        out.push_back({id, static_cast<std::uint16_t>(start), static_cast<std::uint16_t>(end)});
    }
  }
}

}  // namespace detail

inline Lattice build_lattice(std::u32string word, const UnigramModel& model) {
  if (word.empty()) throw ValidationError("cannot build a lattice for an empty word");
  Lattice lat;
  lat.length = static_cast<int>(word.size());
  detail::append_word_arcs(word, model.lexicon(), lat.arcs);
  lat.word = std::move(word);
  return lat;
}

namespace detail {

// Forward pass over (end,start)-sorted arcs. alpha[j] = log sum over partial
// paths 0..j. Arcs whose subword is masked out are skipped.
inline void forward_pass(const LatticeArc* arcs, size_t n_arcs, int length, const double* logprob,
                         const std::uint8_t* alive, std::vector<double>& alpha) {
  alpha.assign(length + 1, kNegInf);
  alpha[0] = 0.0;
  for (size_t k = 0; k < n_arcs; ++k) {
    const LatticeArc& a = arcs[k];
    if (alive && !alive[a.subword_id]) continue;
    const double from = alpha[a.start];
    if (from == kNegInf) continue;
    alpha[a.end] = log_add_exp(alpha[a.end], from + logprob[a.subword_id]);
  }
}

inline void backward_pass(const LatticeArc* arcs, size_t n_arcs, int length, const double* logprob,
                          const std::uint8_t* alive, std::vector<double>& beta) {
  beta.assign(length + 1, kNegInf);
  beta[length] = 0.0;
  for (size_t k = n_arcs; k-- > 0;) {
    const LatticeArc& a = arcs[k];
    if (alive && !alive[a.subword_id]) continue;
    const double from = beta[a.end];
    if (from == kNegInf) continue;
    beta[a.start] = log_add_exp(beta[a.start], from + logprob[a.subword_id]);
  }
}

// Deterministic path ordering: higher logprob, then fewer morphs, then the
// longer first morph comparing left to right.
inline bool lens_better(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return a[i] > b[i];
  return false;
}

struct ViterbiScratch {
  std::vector<double> lp;
  std::vector<std::int32_t> count;
  std::vector<std::int32_t> back;  // arc index, -1 = none
  std::vector<int> lens_a, lens_b;

  void gather_lens(const LatticeArc* arcs, int node, std::vector<int>& out) const {
    out.clear();
    while (node > 0) {
      const LatticeArc& a = arcs[back[node]];
      out.push_back(a.end - a.start);
      node = a.start;
    }
    std::reverse(out.begin(), out.end());
  }
};

// Max-probability path with the deterministic tie-break. skip_id masks one
// subword out of the lattice (used when estimating removal deltas). Returns
// false when the final node is unreachable.
inline bool viterbi_packed(const LatticeArc* arcs, size_t n_arcs, int length,
                           const double* logprob, const std::uint8_t* alive,
                           std::int32_t skip_id, ViterbiScratch& s) {
  s.lp.assign(length + 1, kNegInf);
  s.count.assign(length + 1, 0);
  s.back.assign(length + 1, -1);
  s.lp[0] = 0.0;
  for (size_t k = 0; k < n_arcs; ++k) {
    const LatticeArc& a = arcs[k];
    if (a.subword_id == skip_id) continue;
    if (alive && !alive[a.subword_id]) continue;
    if (s.lp[a.start] == kNegInf) continue;
    const double cand_lp = s.lp[a.start] + logprob[a.subword_id];
    const std::int32_t cand_count = s.count[a.start] + 1;
    bool better;
    if (s.back[a.end] < 0 && s.lp[a.end] == kNegInf) {
      better = true;
    } else if (cand_lp != s.lp[a.end]) {
      better = cand_lp > s.lp[a.end];
    } else if (cand_count != s.count[a.end]) {
      better = cand_count < s.count[a.end];
    } else {
      s.gather_lens(arcs, a.start, s.lens_a);
      s.lens_a.push_back(a.end - a.start);
      s.gather_lens(arcs, a.end, s.lens_b);
      better = lens_better(s.lens_a, s.lens_b);
    }
    if (better) {
      s.lp[a.end] = cand_lp;
      s.count[a.end] = cand_count;
      s.back[a.end] = static_cast<std::int32_t>(k);
    }
  }
  return s.lp[length] != kNegInf;
}

// Walk the back pointers and emit arc subword ids left to right.
inline void extract_path(const LatticeArc* arcs, int length, const ViterbiScratch& s,
                         std::vector<std::int32_t>& ids) {
  ids.clear();
  int node = length;
  while (node > 0) {
    const LatticeArc& a = arcs[s.back[node]];
    ids.push_back(a.subword_id);
    node = a.start;
  }
  std::reverse(ids.begin(), ids.end());
}

}  // namespace detail

// Per-arc posterior expected counts plus the log marginal likelihood of the
// word under the model.
struct LatticePosteriors {
  std::vector<double> arc_posterior;  // aligned with lattice.arcs
  double log_marginal = 0.0;
};

inline LatticePosteriors forward_backward(const Lattice& lattice, const UnigramModel& model) {
  std::vector<double> alpha, beta;
  const double* lp = model.logprobs().data();
  detail::forward_pass(lattice.arcs.data(), lattice.arcs.size(), lattice.length, lp, nullptr, alpha);
  if (alpha[lattice.length] == kNegInf)
    throw UnsegmentableWordError(encode_utf8(lattice.word));
  detail::backward_pass(lattice.arcs.data(), lattice.arcs.size(), lattice.length, lp, nullptr, beta);
  LatticePosteriors post;
  post.log_marginal = alpha[lattice.length];
  post.arc_posterior.resize(lattice.arcs.size());
  for (size_t k = 0; k < lattice.arcs.size(); ++k) {
    const LatticeArc& a = lattice.arcs[k];
    if (alpha[a.start] == kNegInf || beta[a.end] == kNegInf) {
      post.arc_posterior[k] = 0.0;
      continue;
    }
    post.arc_posterior[k] =
        std::exp(alpha[a.start] + lp[a.subword_id] + beta[a.end] - post.log_marginal);
  }
  return post;
}

inline Segmentation viterbi(const Lattice& lattice, const UnigramModel& model) {
  detail::ViterbiScratch s;
  if (!detail::viterbi_packed(lattice.arcs.data(), lattice.arcs.size(), lattice.length,
                              model.logprobs().data(), nullptr, -1, s))
    throw UnsegmentableWordError(encode_utf8(lattice.word));
  std::vector<std::int32_t> ids;
  detail::extract_path(lattice.arcs.data(), lattice.length, s, ids);
  std::vector<std::u32string> morphs;
  morphs.reserve(ids.size());
  for (std::int32_t id : ids) morphs.push_back(model.lexicon().at(id));
  return Segmentation::make(lattice.word, std::move(morphs), s.lp[lattice.length]);
}

// Top-n distinct segmentations in the Viterbi ordering. Fewer are returned
// when the lattice has fewer paths.
inline std::vector<Segmentation> nbest(const Lattice& lattice, const UnigramModel& model, int n) {
  if (n < 1) throw ValidationError("nbest requires n >= 1");
  struct Entry {
    double lp;
    std::int32_t count;
    std::int32_t prev_node;
    std::int32_t prev_idx;
    std::int32_t arc;  // arc index into lattice.arcs
  };
  const auto& arcs = lattice.arcs;
  const double* lp = model.logprobs().data();
  std::vector<std::vector<Entry>> lists(lattice.length + 1);
  lists[0].push_back({0.0, 0, -1, -1, -1});

  auto gather_lens = [&](int node, int idx, std::vector<int>& out) {
    out.clear();
    while (node > 0) {
      const Entry& e = lists[node][idx];
      out.push_back(arcs[e.arc].end - arcs[e.arc].start);
      node = e.prev_node;
      idx = e.prev_idx;
    }
    std::reverse(out.begin(), out.end());
  };

  std::vector<int> la, lb;
  size_t k = 0;
  for (int node = 1; node <= lattice.length; ++node) {
    std::vector<Entry> cands;
    for (; k < arcs.size() && arcs[k].end == node; ++k) {
      const LatticeArc& a = arcs[k];
      const auto& src = lists[a.start];
      for (std::int32_t i = 0; i < static_cast<std::int32_t>(src.size()); ++i)
        cands.push_back({src[i].lp + lp[a.subword_id], src[i].count + 1, a.start, i,
                         static_cast<std::int32_t>(k)});
    }
    auto better = [&](const Entry& x, const Entry& y) {
      if (x.lp != y.lp) return x.lp > y.lp;
      if (x.count != y.count) return x.count < y.count;
      gather_lens(arcs[x.arc].start, x.prev_idx, la);
      la.push_back(arcs[x.arc].end - arcs[x.arc].start);
      gather_lens(arcs[y.arc].start, y.prev_idx, lb);
      lb.push_back(arcs[y.arc].end - arcs[y.arc].start);
      return detail::lens_better(la, lb);
    };
    std::sort(cands.begin(), cands.end(), better);
    if (static_cast<int>(cands.size()) > n) cands.resize(n);
    lists[node] = std::move(cands);
  }

  const auto& finals = lists[lattice.length];
  if (finals.empty()) throw UnsegmentableWordError(encode_utf8(lattice.word));
  std::vector<Segmentation> out;
  out.reserve(finals.size());
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(finals.size()); ++i) {
    std::vector<std::int32_t> ids;
    int node = lattice.length, idx = i;
    while (node > 0) {
      const Entry& e = lists[node][idx];
      ids.push_back(arcs[e.arc].subword_id);
      node = e.prev_node;
      idx = e.prev_idx;
    }
    std::reverse(ids.begin(), ids.end());
    std::vector<std::u32string> morphs;
    morphs.reserve(ids.size());
    for (std::int32_t id : ids) morphs.push_back(model.lexicon().at(id));
    out.push_back(Segmentation::make(lattice.word, std::move(morphs), finals[i].lp));
  }
  return out;
}

namespace detail {

// Uniform double in [0, 1) from the top 53 bits; avoids the distribution
// classes so sampling sequences are identical across standard libraries.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

// Forward-filtering backward-sampling: one exact draw from the posterior
// over segmentations of the word.
inline Segmentation sample_segmentation(const Lattice& lattice, const UnigramModel& model,
                                        std::mt19937_64& rng) {
  std::vector<double> alpha;
  const double* lp = model.logprobs().data();
  const auto& arcs = lattice.arcs;
  detail::forward_pass(arcs.data(), arcs.size(), lattice.length, lp, nullptr, alpha);
  if (alpha[lattice.length] == kNegInf)
    throw UnsegmentableWordError(encode_utf8(lattice.word));

  // arcs grouped by end node: locate each group once
  std::vector<size_t> group_begin(lattice.length + 2, 0);
  for (size_t k = 0; k < arcs.size(); ++k) group_begin[arcs[k].end + 1]++;
  for (int j = 1; j <= lattice.length + 1; ++j) group_begin[j] += group_begin[j - 1];

  std::vector<std::int32_t> ids;
  int node = lattice.length;
  while (node > 0) {
    const size_t lo = group_begin[node];
    const size_t hi = group_begin[node + 1];
    const double u = detail::uniform01(rng);
    double cum = 0.0;
    size_t chosen = hi;
    for (size_t k = lo; k < hi; ++k) {
      const LatticeArc& a = arcs[k];
      if (alpha[a.start] == kNegInf) continue;
      cum += std::exp(alpha[a.start] + lp[a.subword_id] - alpha[node]);
      chosen = k;
      if (u < cum) break;
    }
    // cum can fall short of 1 by rounding; the last viable arc absorbs it
    const LatticeArc& a = arcs[chosen];
    ids.push_back(a.subword_id);
    node = a.start;
  }
  std::reverse(ids.begin(), ids.end());
  std::vector<std::u32string> morphs;
  double total = 0.0;
  for (std::int32_t id : ids) {
    morphs.push_back(model.lexicon().at(id));
    total += lp[id];
  }
  return Segmentation::make(lattice.word, std::move(morphs), total);
}

// ---------------------------------------------------------------------------
// Corpus-level inference. Words are processed in fixed-size blocks; each
// block accumulates into its own map and blocks are reduced in index order,
// so results are bit-identical for any thread count.
// ---------------------------------------------------------------------------

// Pre-built lattices for every word of a corpus against a base lexicon.
// Training reuses these across rounds, masking out pruned subwords instead
// of rebuilding.
class CorpusLattices {
public:
  static CorpusLattices build(const WordCountTable& data, const SubwordLexicon& base) {
    CorpusLattices cl;
    cl.word_off_.reserve(data.size() + 1);
    cl.word_off_.push_back(0);
    for (size_t i = 0; i < data.size(); ++i) {
      detail::append_word_arcs(data.entry(i).word, base, cl.arcs_);
      cl.word_off_.push_back(cl.arcs_.size());
    }
    return cl;
  }

  const LatticeArc* word_arcs(size_t i) const { return arcs_.data() + word_off_[i]; }
  size_t word_arc_count(size_t i) const { return word_off_[i + 1] - word_off_[i]; }

private:
  std::vector<LatticeArc> arcs_;
  std::vector<size_t> word_off_;
};

namespace detail {

constexpr size_t kEstepBlockWords = 256;

template <class Fn>
inline void run_blocks(size_t n_blocks, int threads, Fn&& fn) {
  if (threads < 1) threads = 1;
  threads = static_cast<int>(std::min<size_t>(threads, n_blocks));
  if (threads <= 1) {
    for (size_t b = 0; b < n_blocks; ++b) fn(b);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (size_t b; (b = next.fetch_add(1)) < n_blocks;) fn(b);
    });
  for (auto& th : pool) th.join();
}

struct BlockResult {
  std::unordered_map<std::int32_t, double> counts;
  double loglik = 0.0;
  long long first_bad_word = -1;  // corpus index of first unsegmentable word
};

struct CorpusPassOptions {
  const double* logprob_by_base = nullptr;
  const std::uint8_t* alive = nullptr;              // nullable: all alive
  const std::int32_t* base_to_current = nullptr;    // nullable: identity
  std::int32_t current_size = 0;
  int threads = 1;
  bool viterbi = false;  // hard counts instead of posteriors
};

inline ExpectedCounts corpus_pass(const CorpusLattices& lattices, const WordCountTable& data,
                                  const CorpusPassOptions& opt) {
  const size_t n_blocks = (data.size() + kEstepBlockWords - 1) / kEstepBlockWords;
  std::vector<BlockResult> results(n_blocks);
  run_blocks(n_blocks, opt.threads, [&](size_t b) {
    BlockResult& res = results[b];
    std::vector<double> alpha, beta;
    ViterbiScratch vs;
    std::vector<std::int32_t> path;
    const size_t lo = b * kEstepBlockWords;
    const size_t hi = std::min(lo + kEstepBlockWords, data.size());
    for (size_t w = lo; w < hi; ++w) {
      const auto& entry = data.entry(w);
      const double eff = data.effective_count(w);
      const int L = static_cast<int>(entry.word.size());
      const LatticeArc* arcs = lattices.word_arcs(w);
      const size_t n_arcs = lattices.word_arc_count(w);
      if (opt.viterbi) {
        if (!viterbi_packed(arcs, n_arcs, L, opt.logprob_by_base, opt.alive, -1, vs)) {
          if (res.first_bad_word < 0) res.first_bad_word = static_cast<long long>(w);
          return;
        }
        extract_path(arcs, L, vs, path);
        for (std::int32_t id : path) {
          const std::int32_t cur = opt.base_to_current ? opt.base_to_current[id] : id;
          res.counts[cur] += eff;
        }
        res.loglik += eff * vs.lp[L];
      } else {
        forward_pass(arcs, n_arcs, L, opt.logprob_by_base, opt.alive, alpha);
        if (alpha[L] == kNegInf) {
          if (res.first_bad_word < 0) res.first_bad_word = static_cast<long long>(w);
          return;
        }
        backward_pass(arcs, n_arcs, L, opt.logprob_by_base, opt.alive, beta);
        const double log_z = alpha[L];
        for (size_t k = 0; k < n_arcs; ++k) {
          const LatticeArc& a = arcs[k];
          if (opt.alive && !opt.alive[a.subword_id]) continue;
          if (alpha[a.start] == kNegInf || beta[a.end] == kNegInf) continue;
          const double post =
              std::exp(alpha[a.start] + opt.logprob_by_base[a.subword_id] + beta[a.end] - log_z);
          const std::int32_t cur = opt.base_to_current ? opt.base_to_current[a.subword_id] : a.subword_id;
          res.counts[cur] += eff * post;
        }
        res.loglik += eff * log_z;
      }
    }
  });

  for (size_t b = 0; b < n_blocks; ++b)
    if (results[b].first_bad_word >= 0)
      throw UnsegmentableWordError(
          encode_utf8(data.entry(static_cast<size_t>(results[b].first_bad_word)).word));

  ExpectedCounts out(opt.current_size);
  for (size_t b = 0; b < n_blocks; ++b) {
    for (const auto& [id, c] : results[b].counts) {
      out.counts[id] += c;
      out.total += c;
    }
    out.data_loglik += results[b].loglik;
  }
  return out;
}

}  // namespace detail

// E-step over the whole corpus: per-word posteriors scaled by effective
// counts. Results are independent of the thread count.
inline ExpectedCounts corpus_estep(const WordCountTable& data, const UnigramModel& model,
                                   int threads = 1) {
  if (data.empty()) throw ValidationError("E-step over an empty corpus");
  CorpusLattices lattices = CorpusLattices::build(data, model.lexicon());
  detail::CorpusPassOptions opt;
  opt.logprob_by_base = model.logprobs().data();
  opt.current_size = model.lexicon().size();
  opt.threads = threads;
  return detail::corpus_pass(lattices, data, opt);
}

// Hard counts from per-word Viterbi paths; data_loglik is the sum of path
// log-probabilities (a lower bound on the marginal version).
inline ExpectedCounts corpus_viterbi_counts(const WordCountTable& data, const UnigramModel& model,
                                            int threads = 1) {
  if (data.empty()) throw ValidationError("Viterbi pass over an empty corpus");
  CorpusLattices lattices = CorpusLattices::build(data, model.lexicon());
  detail::CorpusPassOptions opt;
  opt.logprob_by_base = model.logprobs().data();
  opt.current_size = model.lexicon().size();
  opt.threads = threads;
  opt.viterbi = true;
  return detail::corpus_pass(lattices, data, opt);
}

// ---------------------------------------------------------------------------
// OOV-tolerant decoding. Code points absent from the lexicon become
// single-character morphs scored with the model's minimum logprob; the
// in-vocabulary spans between them are decoded normally.
// ---------------------------------------------------------------------------

namespace detail {

struct WordPiece {
  std::u32string text;
  bool oov = false;
};

inline std::vector<WordPiece> split_oov(const std::u32string& word, const SubwordLexicon& lex) {
  std::vector<WordPiece> pieces;
  std::u32string run;
  for (char32_t c : word) {
    if (lex.contains(std::u32string_view(&c, 1))) {
      run.push_back(c);
    } else {
      if (!run.empty()) pieces.push_back({std::move(run), false});
      run.clear();
      pieces.push_back({std::u32string(1, c), true});
    }
  }
  if (!run.empty()) pieces.push_back({std::move(run), false});
  return pieces;
}

}  // namespace detail

// Viterbi with the OOV fallback. Sets *had_oov when any fallback morph was
// emitted.
inline Segmentation segment_word(const UnigramModel& model, const std::u32string& word,
                                 bool* had_oov = nullptr) {
  if (had_oov) *had_oov = false;
  auto pieces = detail::split_oov(word, model.lexicon());
  if (pieces.size() == 1 && !pieces[0].oov)
    return viterbi(build_lattice(word, model), model);
  std::vector<std::u32string> morphs;
  double lp = 0.0;
  for (auto& p : pieces) {
    if (p.oov) {
      if (had_oov) *had_oov = true;
      morphs.push_back(p.text);
      lp += model.min_logprob();
    } else {
      Segmentation s = viterbi(build_lattice(p.text, model), model);
      for (auto& m : s.morphs) morphs.push_back(std::move(m));
      lp += s.logprob;
    }
  }
  return Segmentation::make(word, std::move(morphs), lp);
}

inline std::vector<Segmentation> nbest_word(const UnigramModel& model, const std::u32string& word,
                                            int n, bool* had_oov = nullptr) {
  if (had_oov) *had_oov = false;
  auto pieces = detail::split_oov(word, model.lexicon());
  if (pieces.size() == 1 && !pieces[0].oov)
    return nbest(build_lattice(word, model), model, n);

  // combine per-piece lists, keeping the global top n under the path order
  struct Cand {
    double lp;
    std::vector<std::u32string> morphs;
  };
  std::vector<Cand> acc{{0.0, {}}};
  for (auto& p : pieces) {
    std::vector<Cand> piece_cands;
    if (p.oov) {
      if (had_oov) *had_oov = true;
      piece_cands.push_back({model.min_logprob(), {p.text}});
    } else {
      for (auto& s : nbest(build_lattice(p.text, model), model, n)) {
        piece_cands.push_back({s.logprob, std::move(s.morphs)});
      }
    }
    std::vector<Cand> next;
    for (const auto& a : acc)
      for (const auto& b : piece_cands) {
        Cand c{a.lp + b.lp, a.morphs};
        c.morphs.insert(c.morphs.end(), b.morphs.begin(), b.morphs.end());
        next.push_back(std::move(c));
      }
    auto better = [](const Cand& x, const Cand& y) {
      if (x.lp != y.lp) return x.lp > y.lp;
      if (x.morphs.size() != y.morphs.size()) return x.morphs.size() < y.morphs.size();
      for (size_t i = 0; i < x.morphs.size(); ++i)
        if (x.morphs[i].size() != y.morphs[i].size()) return x.morphs[i].size() > y.morphs[i].size();
      return false;
    };
    std::sort(next.begin(), next.end(), better);
    if (static_cast<int>(next.size()) > n) next.resize(n);
    acc = std::move(next);
  }
  std::vector<Segmentation> out;
  out.reserve(acc.size());
  for (auto& c : acc) out.push_back(Segmentation::make(word, std::move(c.morphs), c.lp));
  return out;
}

inline Segmentation sample_word(const UnigramModel& model, const std::u32string& word,
                                std::mt19937_64& rng, bool* had_oov = nullptr) {
  if (had_oov) *had_oov = false;
  auto pieces = detail::split_oov(word, model.lexicon());
  if (pieces.size() == 1 && !pieces[0].oov)
    return sample_segmentation(build_lattice(word, model), model, rng);
  std::vector<std::u32string> morphs;
  double lp = 0.0;
  for (auto& p : pieces) {
    if (p.oov) {
      if (had_oov) *had_oov = true;
      morphs.push_back(p.text);
      lp += model.min_logprob();
    } else {
      Segmentation s = sample_segmentation(build_lattice(p.text, model), model, rng);
      for (auto& m : s.morphs) morphs.push_back(std::move(m));
      lp += s.logprob;
    }
  }
  return Segmentation::make(word, std::move(morphs), lp);
}

}  // namespace subseg

#endif
