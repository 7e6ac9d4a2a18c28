#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "succabs/lexicon.hpp"

using namespace succabs;

TEST(KnownWordDistribution, RelativeFrequenciesAndSupport) {
  const auto c = parse_corpus("run\tVB\nrun\tNN\nrun\tVB\nthe\tAT\n");
  const auto lex = build_lexicon(c);
  const auto d = known_word_distribution(lex, "run");
  ASSERT_TRUE(d);
  const auto vb = static_cast<std::size_t>(*c.tag_set.find("VB"));
  const auto nn = static_cast<std::size_t>(*c.tag_set.find("NN"));
  EXPECT_NEAR(d->probs[vb], 2.0 / 3, 1e-15);
  EXPECT_NEAR(d->probs[nn], 1.0 / 3, 1e-15);
  EXPECT_EQ(d->support.size(), 2u);
  EXPECT_FALSE(known_word_distribution(lex, "walk"));
}

namespace {

struct Fixture {
  Corpus corpus;
  UnknownWordModel model;
};

Fixture cat_and_is() {
  auto c = parse_corpus("cat\tNN\nis\tVB\n");
  const auto trie = build_suffix_trie(c, build_lexicon(c), {});
  auto m = UnknownWordModel::build(trie, RootMode::relative_frequency, {});
  return {std::move(c), std::move(m)};
}

}  // namespace

TEST(UnknownWordModel, LongerMatchMovesFurtherFromRoot) {
  const auto [c, m] = cat_and_is();
  const auto nn = static_cast<std::size_t>(*c.tag_set.find("NN"));
  const double root = m.root()[nn];
  EXPECT_DOUBLE_EQ(root, 0.5);
  // "mat" matches t, a; "cat" also matches c and the begin-of-word marker.
  EXPECT_EQ(m.suffix_chain("mat").size(), 2u);
  EXPECT_EQ(m.suffix_chain("cat").size(), 4u);
  const double mat = m.estimate("mat")[nn];
  const double cat = m.estimate("cat")[nn];
  EXPECT_GT(mat, root);
  EXPECT_GT(cat, mat);
}

TEST(UnknownWordModel, ChainMatchesOracle) {
  const auto [c, m] = cat_and_is();
  oracle::Vec p = oracle::to_long(m.root().probs());
  for (const auto& level : m.suffix_chain("mat")) p = oracle::eq1(oracle::to_long(level.freqs), p, level.count);
  const auto got = m.estimate("mat");
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], static_cast<double>(p[i]), 1e-12);
}

TEST(UnknownWordModel, NoMatchingSuffixGivesRoot) {
  const auto [c, m] = cat_and_is();
  EXPECT_TRUE(m.suffix_chain("xyz").empty());
  EXPECT_EQ(m.estimate("xyz"), m.root());
  EXPECT_THROW(unknown_word_distribution(m, ""), ValidationError);
}

TEST(UnknownWordModel, EstimatesArePositiveUnderEleRoot) {
  std::mt19937_64 rng(13);
  std::string text;
  for (int i = 0; i < 300; ++i) {
    std::string w;
    for (std::size_t l = 0; l < 1 + rng() % 7; ++l) w.push_back(static_cast<char>('a' + rng() % 5));
    text += w + "\tT" + std::to_string(rng() % 4) + "\n";
  }
  const auto c = parse_corpus(text);
  const RareWordPolicy policy{3, 4};
  const auto m = UnknownWordModel::build(build_suffix_trie(c, build_lexicon(c), policy), RootMode::ele, policy);
  for (int trial = 0; trial < 200; ++trial) {
    std::string w;
    for (std::size_t l = 0; l < 1 + rng() % 9; ++l) w.push_back(static_cast<char>('a' + rng() % 7));
    const auto chain = m.suffix_chain(w);
    EXPECT_LE(chain.size(), std::min<std::size_t>(w.size() + 1, policy.max_suffix_length));
    const auto d = m.estimate(w);
    double sum = 0.0;
    for (double x : d.probs()) {
      EXPECT_GT(x, 0.0);
      sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(LexicalFactor, Examples) {
  EXPECT_DOUBLE_EQ(lexical_factor(0.5, 0.25), 2.0);
  EXPECT_DOUBLE_EQ(lexical_factor(0.0, 0.0), 0.0);
  EXPECT_THROW(lexical_factor(0.1, 0.0), ValidationError);
  const LexicalDistribution d{{0.2, 0.8}, {}};
  const ConditionalDistribution unigram({0.4, 0.6});
  EXPECT_DOUBLE_EQ(lexical_factor(d, unigram, 0), 0.5);
}
