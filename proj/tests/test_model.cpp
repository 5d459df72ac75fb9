#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "subseg/model.hpp"
#include "support/test_util.hpp"

using namespace subseg;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

LexiconPtr lexicon_of(std::vector<std::u32string> subwords) {
  return std::make_shared<SubwordLexicon>(SubwordLexicon::from_subwords(std::move(subwords)));
}

ExpectedCounts counts_for(const LexiconPtr& lex,
                          const std::map<std::u32string, double>& values) {
  ExpectedCounts c(lex->size());
  for (const auto& [s, v] : values) c.add(lex->id_of(s), v);
  return c;
}

}  // namespace

TEST_CASE("lexicon ids are sorted and protected flags structural") {
  auto lex = lexicon_of({U"b", U"aa", U"a"});
  REQUIRE(lex->size() == 3);
  REQUIRE(lex->at(0) == U"a");
  REQUIRE(lex->at(1) == U"aa");
  REQUIRE(lex->at(2) == U"b");
  REQUIRE(lex->is_protected(0));
  REQUIRE(!lex->is_protected(1));
  REQUIRE(lex->protected_count() == 2);
  REQUIRE(lex->max_len() == 2);
  REQUIRE(lex->id_of(U"aa") == 1);
  REQUIRE(lex->id_of(U"zz") == -1);
}

TEST_CASE("lexicon rejects empty and duplicate entries") {
  REQUIRE_THROWS_AS(SubwordLexicon::from_subwords({U"a", U""}), ValidationError);
  REQUIRE_THROWS_AS(SubwordLexicon::from_subwords({U"a", U"a"}), ValidationError);
}

TEST_CASE("plain M-step on the toy expected counts") {
  // E-step on "aaa" with p(a)=0.6, p(aa)=0.4 gives counts 47/29 and 20/29
  auto lex = lexicon_of({U"a", U"aa"});
  auto counts = counts_for(lex, {{U"a", 47.0 / 29.0}, {U"aa", 20.0 / 29.0}});
  UnigramModel m = m_step_plain(lex, counts);
  REQUIRE_THAT(std::exp(m.logprob(lex->id_of(U"a"))), WithinAbs(47.0 / 67.0, 1e-12));
  REQUIRE_THAT(std::exp(m.logprob(lex->id_of(U"aa"))), WithinAbs(20.0 / 67.0, 1e-12));
  REQUIRE_THAT(std::exp(m.logprob(lex->id_of(U"a"))), WithinAbs(0.70150, 1e-5));
  REQUIRE_THAT(std::exp(m.logprob(lex->id_of(U"aa"))), WithinAbs(0.29850, 1e-5));
}

TEST_CASE("plain M-step trivial cases") {
  auto single = lexicon_of({U"x"});
  UnigramModel m1 = m_step_plain(single, counts_for(single, {{U"x", 1.0}}));
  REQUIRE(m1.logprob(0) == 0.0);

  auto pair = lexicon_of({U"a", U"b"});
  UnigramModel m2 = m_step_plain(pair, counts_for(pair, {{U"a", 2.0}, {U"b", 2.0}}));
  REQUIRE_THAT(std::exp(m2.logprob(0)), WithinAbs(0.5, 1e-12));
  REQUIRE_THAT(std::exp(m2.logprob(1)), WithinAbs(0.5, 1e-12));
}

TEST_CASE("plain M-step normalizes to one") {
  std::mt19937_64 rng(3);
  for (int iter = 0; iter < 100; ++iter) {
    const int n = 2 + static_cast<int>(rng() % 20);
    std::vector<std::u32string> subwords;
    for (int i = 0; i < n; ++i) subwords.push_back(U"s" + std::u32string(1, U'a' + i));
    auto lex = lexicon_of(std::move(subwords));
    ExpectedCounts c(lex->size());
    for (int i = 0; i < n; ++i) c.add(i, (rng() % 1000) / 10.0);
    if (!(c.total > 0)) continue;
    UnigramModel m = m_step_plain(lex, c);
    REQUIRE_THAT(m.total_mass(), WithinAbs(1.0, 1e-9));
  }
}

TEST_CASE("zero counts get the floor, not minus infinity") {
  auto lex = lexicon_of({U"a", U"b"});
  ExpectedCounts c(lex->size());
  c.add(0, 5.0);
  UnigramModel m = m_step_plain(lex, c);
  REQUIRE(std::isfinite(m.logprob(1)));
  REQUIRE(m.logprob(1) < m.logprob(0));
  REQUIRE_THAT(m.logprob(1), WithinRel(std::log(kCountFloor / (5.0 + kCountFloor)), 1e-9));
}

TEST_CASE("all-zero counts are a degenerate input") {
  auto lex = lexicon_of({U"a"});
  ExpectedCounts c(lex->size());
  REQUIRE_THROWS_AS(m_step_plain(lex, c), DomainError);
  REQUIRE_THROWS_AS(m_step_bayesian(lex, c), DomainError);
}

TEST_CASE("bayesian M-step: counts {1,1} give exactly exp(-1) each") {
  auto lex = lexicon_of({U"a", U"b"});
  UnigramModel m = m_step_bayesian(lex, counts_for(lex, {{U"a", 1.0}, {U"b", 1.0}}));
  // psi(1) - psi(2) = -gamma - (1 - gamma) = -1
  REQUIRE_THAT(m.logprob(0), WithinAbs(-1.0, 1e-12));
  REQUIRE_THAT(std::exp(m.logprob(0)), WithinAbs(std::exp(-1.0), 1e-12));
  REQUIRE_THAT(m.total_mass(), WithinAbs(2.0 * std::exp(-1.0), 1e-12));
  REQUIRE(m.total_mass() < 1.0);
}

TEST_CASE("bayesian M-step: single subword keeps probability one") {
  auto lex = lexicon_of({U"x"});
  UnigramModel m = m_step_bayesian(lex, counts_for(lex, {{U"x", 1000.0}}));
  REQUIRE(m.logprob(0) == 0.0);
}

TEST_CASE("bayesian discounting hits small counts harder") {
  auto lex = lexicon_of({U"a", U"b"});
  auto counts = counts_for(lex, {{U"a", 10.0}, {U"b", 1.0}});
  UnigramModel plain = m_step_plain(lex, counts);
  UnigramModel bayes = m_step_bayesian(lex, counts);
  const double ratio_plain = std::exp(plain.logprob(1) - plain.logprob(0));
  const double ratio_bayes = std::exp(bayes.logprob(1) - bayes.logprob(0));
  REQUIRE(ratio_bayes < ratio_plain);
}

TEST_CASE("bayesian mass never exceeds the plain share") {
  // exp(psi(C) - psi(S)) <= C/S for C <= S
  std::mt19937_64 rng(17);
  for (int iter = 0; iter < 200; ++iter) {
    const int n = 2 + static_cast<int>(rng() % 10);
    std::vector<double> c(n);
    double total = 0.0;
    for (auto& v : c) {
      v = 0.05 + (rng() % 10000) / 100.0;
      total += v;
    }
    for (double v : c) REQUIRE(std::exp(digamma(v) - digamma(total)) <= v / total + 1e-12);
  }
  // single-element case is the equality case
  REQUIRE_THAT(std::exp(digamma(42.0) - digamma(42.0)), WithinAbs(1.0, 1e-15));
}

TEST_CASE("bayesian total mass stays at or below one") {
  std::mt19937_64 rng(29);
  for (int iter = 0; iter < 100; ++iter) {
    const int n = 1 + static_cast<int>(rng() % 30);
    std::vector<std::u32string> subwords;
    for (int i = 0; i < n; ++i) subwords.push_back(std::u32string(1, U'a' + i) + U"x");
    auto lex = lexicon_of(std::move(subwords));
    ExpectedCounts c(lex->size());
    for (int i = 0; i < n; ++i) c.add(i, 0.01 + (rng() % 1000) / 7.0);
    UnigramModel m = m_step_bayesian(lex, c);
    REQUIRE(m.total_mass() <= 1.0 + 1e-6);
  }
}

TEST_CASE("expected counts merge is pointwise and commutative") {
  auto lex = lexicon_of({U"a", U"b", U"c"});
  ExpectedCounts x(lex->size()), y(lex->size());
  x.add(0, 1.5);
  x.add(2, 0.5);
  x.data_loglik = -2.0;
  y.add(1, 2.0);
  y.add(2, 1.0);
  y.data_loglik = -3.0;
  ExpectedCounts xy = x;
  xy.merge(y);
  ExpectedCounts yx = y;
  yx.merge(x);
  for (int i = 0; i < 3; ++i) REQUIRE_THAT(xy.counts[i], WithinAbs(yx.counts[i], 1e-15));
  REQUIRE_THAT(xy.total, WithinAbs(5.0, 1e-12));
  REQUIRE_THAT(xy.data_loglik, WithinAbs(-5.0, 1e-12));
}

TEST_CASE("segmentation construction checks concatenation") {
  REQUIRE_NOTHROW(Segmentation::make(U"abc", {U"ab", U"c"}, -1.0));
  REQUIRE_THROWS_AS(Segmentation::make(U"abc", {U"ab"}, -1.0), ValidationError);
  REQUIRE_THROWS_AS(Segmentation::make(U"abc", {U"ab", U"d"}, -1.0), ValidationError);
}

TEST_CASE("model validation") {
  auto lex = lexicon_of({U"a"});
  REQUIRE_THROWS_AS(UnigramModel(lex, {0.5}), ValidationError);   // positive
  REQUIRE_THROWS_AS(UnigramModel(lex, {kNegInf}), ValidationError);  // non-finite
  REQUIRE_THROWS_AS(UnigramModel(lex, {}), ValidationError);      // size mismatch
  REQUIRE_THROWS_AS(UnigramModel(nullptr, {}), ValidationError);  // empty lexicon
}
