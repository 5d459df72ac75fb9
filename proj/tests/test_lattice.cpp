#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>
#include <set>

#include "subseg/lattice.hpp"
#include "support/enumeration_oracle.hpp"
#include "support/test_util.hpp"

using namespace subseg;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using test_util::model_from_probs;

namespace {

const UnigramModel& toy_model() {
  static UnigramModel m = model_from_probs({{U"a", 0.6}, {U"aa", 0.4}});
  return m;
}

// random model over a small alphabet, with all singles plus a few longer
// subwords
UnigramModel random_model(std::mt19937_64& rng, int alphabet) {
  std::map<std::u32string, double> probs;
  std::set<std::u32string> subs;
  for (int i = 0; i < alphabet; ++i) subs.insert(std::u32string(1, U'a' + i));
  const int extra = 1 + static_cast<int>(rng() % 5);
  for (int i = 0; i < extra; ++i) {
    std::u32string s;
    const int len = 2 + static_cast<int>(rng() % 3);
    for (int k = 0; k < len; ++k) s.push_back(U'a' + static_cast<char32_t>(rng() % alphabet));
    subs.insert(s);
  }
  double total = 0.0;
  std::vector<double> w;
  for (size_t i = 0; i < subs.size(); ++i) {
    w.push_back(0.05 + (rng() % 1000) / 1000.0);
    total += w.back();
  }
  size_t i = 0;
  for (const auto& s : subs) probs[s] = w[i++] / total;
  return model_from_probs(probs);
}

std::u32string random_word(std::mt19937_64& rng, int alphabet, int max_len) {
  const int len = 1 + static_cast<int>(rng() % max_len);
  std::u32string w;
  for (int i = 0; i < len; ++i) w.push_back(U'a' + static_cast<char32_t>(rng() % alphabet));
  return w;
}

}  // namespace

TEST_CASE("lattice arcs for the toy word") {
  const Lattice lat = build_lattice(U"aaa", toy_model());
  std::set<std::tuple<int, int, std::u32string>> got;
  for (const auto& a : lat.arcs)
    got.insert({a.start, a.end, toy_model().lexicon().at(a.subword_id)});
  const std::set<std::tuple<int, int, std::u32string>> want = {
      {0, 1, U"a"}, {1, 2, U"a"}, {2, 3, U"a"}, {0, 2, U"aa"}, {1, 3, U"aa"}};
  REQUIRE(got == want);
}

TEST_CASE("lattice trivial cases") {
  const UnigramModel m = model_from_probs({{U"x", 1.0}});
  const Lattice lat = build_lattice(U"x", m);
  REQUIRE(lat.arcs.size() == 1);

  // OOV code point leaves the final node unreachable
  const Lattice bad = build_lattice(U"xy", m);
  REQUIRE_THROWS_AS(forward_backward(bad, m), UnsegmentableWordError);
  REQUIRE_THROWS_AS(viterbi(bad, m), UnsegmentableWordError);
}

TEST_CASE("forward-backward on the toy word matches enumeration") {
  const Lattice lat = build_lattice(U"aaa", toy_model());
  const LatticePosteriors post = forward_backward(lat, toy_model());
  REQUIRE_THAT(std::exp(post.log_marginal), WithinAbs(0.696, 1e-12));
  REQUIRE_THAT(post.log_marginal, WithinAbs(-0.36240, 1e-5));

  double e_a = 0.0, e_aa = 0.0;
  for (size_t k = 0; k < lat.arcs.size(); ++k) {
    if (toy_model().lexicon().at(lat.arcs[k].subword_id) == U"a")
      e_a += post.arc_posterior[k];
    else
      e_aa += post.arc_posterior[k];
  }
  REQUIRE_THAT(e_a, WithinAbs(47.0 / 29.0, 1e-12));
  REQUIRE_THAT(e_aa, WithinAbs(20.0 / 29.0, 1e-12));
  REQUIRE_THAT(e_a, WithinAbs(1.62069, 5e-6));
  REQUIRE_THAT(e_aa, WithinAbs(0.68966, 5e-6));
}

TEST_CASE("forward-backward single path cases") {
  const UnigramModel m = model_from_probs({{U"x", 1.0}});
  const LatticePosteriors post = forward_backward(build_lattice(U"x", m), m);
  REQUIRE_THAT(post.log_marginal, WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(post.arc_posterior[0], WithinAbs(1.0, 1e-15));

  const UnigramModel ab = model_from_probs({{U"a", 0.3}, {U"b", 0.7}});
  const LatticePosteriors p2 = forward_backward(build_lattice(U"ab", ab), ab);
  REQUIRE_THAT(std::exp(p2.log_marginal), WithinRel(0.21, 1e-12));
  for (double v : p2.arc_posterior) REQUIRE_THAT(v, WithinAbs(1.0, 1e-12));
}

TEST_CASE("viterbi tie-break picks the longer first morph") {
  // a.aa and aa.a tie at 0.24 with two morphs each
  const Segmentation seg = viterbi(build_lattice(U"aaa", toy_model()), toy_model());
  REQUIRE(seg.morphs == std::vector<std::u32string>{U"aa", U"a"});
  REQUIRE_THAT(std::exp(seg.logprob), WithinAbs(0.24, 1e-12));
}

TEST_CASE("viterbi dominance and singleton") {
  const UnigramModel m = model_from_probs({{U"a", 0.2}, {U"b", 0.2}, {U"ab", 0.6}});
  REQUIRE(viterbi(build_lattice(U"ab", m), m).morphs == std::vector<std::u32string>{U"ab"});
  const UnigramModel x = model_from_probs({{U"x", 1.0}});
  REQUIRE(viterbi(build_lattice(U"x", x), x).morphs == std::vector<std::u32string>{U"x"});
}

TEST_CASE("nbest on the toy word") {
  const auto segs = nbest(build_lattice(U"aaa", toy_model()), toy_model(), 3);
  REQUIRE(segs.size() == 3);
  REQUIRE(segs[0].morphs == std::vector<std::u32string>{U"aa", U"a"});
  REQUIRE(segs[1].morphs == std::vector<std::u32string>{U"a", U"aa"});
  REQUIRE(segs[2].morphs == std::vector<std::u32string>{U"a", U"a", U"a"});
  REQUIRE_THAT(std::exp(segs[2].logprob), WithinAbs(0.216, 1e-12));

  // asking for more than exist returns all paths
  REQUIRE(nbest(build_lattice(U"aaa", toy_model()), toy_model(), 10).size() == 3);
}

TEST_CASE("nbest first element equals viterbi on random instances") {
  std::mt19937_64 rng(23);
  for (int iter = 0; iter < 1000; ++iter) {
    const UnigramModel m = random_model(rng, 3);
    const std::u32string w = random_word(rng, 3, 6);
    const Lattice lat = build_lattice(w, m);
    const Segmentation v = viterbi(lat, m);
    const auto nb = nbest(lat, m, 1 + static_cast<int>(rng() % 4));
    REQUIRE(nb[0].morphs == v.morphs);
  }
}

TEST_CASE("lattice inference matches exhaustive enumeration") {
  std::mt19937_64 rng(41);
  for (int iter = 0; iter < 300; ++iter) {
    const UnigramModel m = random_model(rng, 3);
    const std::u32string w = random_word(rng, 3, 6);
    const auto oracle_res = oracle::enumerate_all(w, test_util::logprob_map(m));
    const Lattice lat = build_lattice(w, m);

    const LatticePosteriors post = forward_backward(lat, m);
    REQUIRE_THAT(post.log_marginal, WithinRel(oracle_res.log_marginal, 1e-9));

    std::map<std::u32string, double> counts;
    double morph_sum = 0.0;
    for (size_t k = 0; k < lat.arcs.size(); ++k) {
      counts[m.lexicon().at(lat.arcs[k].subword_id)] += post.arc_posterior[k];
      morph_sum += post.arc_posterior[k];
    }
    for (const auto& [s, c] : oracle_res.expected_counts)
      REQUIRE_THAT(counts[s], WithinRel(c, 1e-9));
    // sum rule: total expected counts equal the expected number of morphs
    REQUIRE_THAT(morph_sum, WithinRel(oracle_res.expected_morphs, 1e-9));

    const auto sorted = oracle::sorted_segs(oracle_res);
    const Segmentation v = viterbi(lat, m);
    REQUIRE(v.morphs == sorted[0].morphs);
    REQUIRE(v.logprob == sorted[0].logprob);  // same left-to-right accumulation

    const int n = 1 + static_cast<int>(rng() % 5);
    const auto nb = nbest(lat, m, n);
    REQUIRE(nb.size() == std::min<size_t>(n, sorted.size()));
    for (size_t i = 0; i < nb.size(); ++i) REQUIRE(nb[i].morphs == sorted[i].morphs);
  }
}

TEST_CASE("ffbs sampling is deterministic given the seed") {
  const Lattice lat = build_lattice(U"aaa", toy_model());
  std::mt19937_64 r1(99), r2(99);
  for (int i = 0; i < 50; ++i) {
    const Segmentation a = sample_segmentation(lat, toy_model(), r1);
    const Segmentation b = sample_segmentation(lat, toy_model(), r2);
    REQUIRE(a.morphs == b.morphs);
  }
}

TEST_CASE("ffbs on a single-path word always returns that path") {
  const UnigramModel m = model_from_probs({{U"a", 0.4}, {U"b", 0.6}});
  const Lattice lat = build_lattice(U"ab", m);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    REQUIRE(sample_segmentation(lat, m, rng).morphs ==
            std::vector<std::u32string>{U"a", U"b"});
  }
}

TEST_CASE("ffbs empirical distribution tracks the enumerated posterior") {
  // quick sanity version of the acceptance criterion, fewer samples
  const Lattice lat = build_lattice(U"aaa", toy_model());
  std::mt19937_64 rng(7);
  std::map<std::vector<std::u32string>, int> freq;
  const int n = 20000;
  for (int i = 0; i < n; ++i) freq[sample_segmentation(lat, toy_model(), rng).morphs]++;
  const std::vector<std::u32string> splat{U"a", U"a", U"a"};
  const std::vector<std::u32string> a_aa{U"a", U"aa"};
  const std::vector<std::u32string> aa_a{U"aa", U"a"};
  REQUIRE_THAT(freq[splat] / double(n), WithinAbs(0.3103, 0.02));
  REQUIRE_THAT(freq[a_aa] / double(n), WithinAbs(0.3448, 0.02));
  REQUIRE_THAT(freq[aa_a] / double(n), WithinAbs(0.3448, 0.02));
}

TEST_CASE("corpus E-step on the toy corpus") {
  const WordCountTable data = test_util::corpus({{U"aaa", 1}});
  const ExpectedCounts c = corpus_estep(data, toy_model());
  REQUIRE_THAT(c.counts[toy_model().lexicon().id_of(U"a")], WithinAbs(47.0 / 29.0, 1e-12));
  REQUIRE_THAT(c.counts[toy_model().lexicon().id_of(U"aa")], WithinAbs(20.0 / 29.0, 1e-12));
  REQUIRE_THAT(c.data_loglik, WithinAbs(std::log(0.696), 1e-12));
  REQUIRE_THAT(c.total, WithinRel(67.0 / 29.0, 1e-12));
}

TEST_CASE("corpus E-step is linear in effective counts") {
  const ExpectedCounts c1 = corpus_estep(test_util::corpus({{U"aaa", 1}}), toy_model());
  const ExpectedCounts c2 = corpus_estep(test_util::corpus({{U"aaa", 2}}), toy_model());
  for (size_t i = 0; i < c1.counts.size(); ++i)
    REQUIRE_THAT(c2.counts[i], WithinRel(2.0 * c1.counts[i], 1e-12));
  REQUIRE_THAT(c2.data_loglik, WithinRel(2.0 * c1.data_loglik, 1e-12));
}

TEST_CASE("corpus E-step names the unsegmentable word") {
  const WordCountTable data = test_util::corpus({{U"aaa", 1}, {U"xyz", 1}});
  try {
    corpus_estep(data, toy_model());
    FAIL("expected UnsegmentableWordError");
  } catch (const UnsegmentableWordError& e) {
    REQUIRE(e.word() == "xyz");
  }
}

TEST_CASE("corpus Viterbi counts on the toy corpus") {
  const WordCountTable data = test_util::corpus({{U"aaa", 1}});
  const ExpectedCounts c = corpus_viterbi_counts(data, toy_model());
  REQUIRE_THAT(c.counts[toy_model().lexicon().id_of(U"a")], WithinAbs(1.0, 1e-15));
  REQUIRE_THAT(c.counts[toy_model().lexicon().id_of(U"aa")], WithinAbs(1.0, 1e-15));
  REQUIRE_THAT(c.data_loglik, WithinAbs(std::log(0.24), 1e-12));

  const UnigramModel x = model_from_probs({{U"x", 1.0}});
  const ExpectedCounts cx = corpus_viterbi_counts(test_util::corpus({{U"x", 5}}), x);
  REQUIRE_THAT(cx.counts[0], WithinAbs(5.0, 1e-15));
}

TEST_CASE("viterbi log-likelihood never exceeds the marginal") {
  std::mt19937_64 rng(55);
  for (int iter = 0; iter < 100; ++iter) {
    const UnigramModel m = random_model(rng, 3);
    std::vector<WordCountTable::Entry> entries;
    for (int w = 0; w < 5; ++w)
      entries.push_back({random_word(rng, 3, 6), 1 + static_cast<long long>(rng() % 5)});
    const WordCountTable data = WordCountTable::from_entries(std::move(entries), Dampening::none);
    const double soft = corpus_estep(data, m).data_loglik;
    const double hard = corpus_viterbi_counts(data, m).data_loglik;
    REQUIRE(hard <= soft + 1e-12);
  }
}

TEST_CASE("corpus E-step results are identical for any thread count") {
  std::mt19937_64 rng(77);
  std::vector<WordCountTable::Entry> entries;
  for (int w = 0; w < 2000; ++w) {
    std::u32string word = random_word(rng, 3, 12);
    entries.push_back({std::move(word), 1 + static_cast<long long>(rng() % 9)});
  }
  const WordCountTable data = WordCountTable::from_entries(std::move(entries), Dampening::none);
  const UnigramModel m = random_model(rng, 3);
  const ExpectedCounts c1 = corpus_estep(data, m, 1);
  for (int threads : {2, 3, 8}) {
    const ExpectedCounts ct = corpus_estep(data, m, threads);
    REQUIRE(ct.counts == c1.counts);  // bit-identical
    REQUIRE(ct.data_loglik == c1.data_loglik);
    REQUIRE(ct.total == c1.total);
  }
}

TEST_CASE("oov fallback segmentation") {
  bool had_oov = false;
  const Segmentation s = segment_word(toy_model(), U"aaxa", &had_oov);
  REQUIRE(had_oov);
  REQUIRE(s.morphs == std::vector<std::u32string>{U"aa", U"x", U"a"});
  // the OOV morph is scored with the model's minimum logprob
  REQUIRE_THAT(s.logprob,
               WithinRel(std::log(0.4) + toy_model().min_logprob() + std::log(0.6), 1e-12));

  had_oov = true;
  const Segmentation clean = segment_word(toy_model(), U"aaa", &had_oov);
  REQUIRE(!had_oov);
  REQUIRE(clean.morphs == std::vector<std::u32string>{U"aa", U"a"});
}

TEST_CASE("oov fallback nbest and sampling stay consistent") {
  bool had_oov = false;
  const auto nb = nbest_word(toy_model(), U"aaxaa", 3, &had_oov);
  REQUIRE(had_oov);
  REQUIRE(!nb.empty());
  REQUIRE(nb[0].morphs == std::vector<std::u32string>{U"aa", U"x", U"aa"});
  for (const auto& s : nb) {
    std::u32string concat;
    for (const auto& m : s.morphs) concat += m;
    REQUIRE(concat == U"aaxaa");
  }
  std::mt19937_64 rng(3);
  const Segmentation sam = sample_word(toy_model(), U"axa", rng, &had_oov);
  REQUIRE(sam.morphs == std::vector<std::u32string>{U"a", U"x", U"a"});
}
