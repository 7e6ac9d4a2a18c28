#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "succabs/tagger.hpp"

using namespace succabs;

namespace {

SmoothedNGramModel toy_bigram() {
  SmoothedNGramModel m(2, ConditionalDistribution({0.5, 0.5}));
  m.set(Context{kBoundary}, ConditionalDistribution({0.6, 0.4}));
  m.set(Context{0}, ConditionalDistribution({0.3, 0.7}));
  m.set(Context{1}, ConditionalDistribution({0.8, 0.2}));
  return m;
}

LatticeColumn open_column(std::vector<double> factors) {
  LatticeColumn c;
  for (std::size_t t = 0; t < factors.size(); ++t) {
    c.tags.push_back(static_cast<TagId>(t));
    c.log_factor.push_back(std::log(factors[t]));
  }
  return c;
}

Corpus random_corpus(std::mt19937_64& rng, std::size_t tags, std::size_t vocab, std::size_t sentences) {
  std::string text;
  for (std::size_t s = 0; s < sentences; ++s) {
    for (std::size_t k = 0; k < 1 + rng() % 8; ++k) {
      const auto w = rng() % vocab;
      // Words lean toward one tag so that the lexicon is informative.
      const auto t = rng() % 3 ? w % tags : rng() % tags;
      text += "w" + std::to_string(w) + "x" + std::to_string(w % 3) + "\tT" + std::to_string(t) + "\n";
    }
    text += "\n";
  }
  return parse_corpus(text);
}

std::vector<std::string> random_words(std::mt19937_64& rng, std::size_t vocab, std::size_t len) {
  std::vector<std::string> words;
  for (std::size_t k = 0; k < len; ++k) {
    // Half a vocabulary beyond training produces unknown words.
    const auto w = rng() % (vocab + vocab / 2);
    words.push_back("w" + std::to_string(w) + "x" + std::to_string(w % 3));
  }
  return words;
}

}  // namespace

TEST(ViterbiDecode, HandComputedBigram) {
  const auto m = toy_bigram();
  // Paths: AA .18, AB .42, BA .32, BB .08.
  std::vector<LatticeColumn> flat{open_column({1, 1}), open_column({1, 1})};
  EXPECT_EQ(viterbi_decode(m, flat), (std::vector<TagId>{0, 1}));
  // With factors: AA .09, AB .105, BA .48, BB .06.
  std::vector<LatticeColumn> weighted{open_column({0.5, 1.5}), open_column({1, 0.5})};
  EXPECT_EQ(viterbi_decode(m, weighted), (std::vector<TagId>{1, 0}));
}

TEST(ViterbiDecode, EmptyAndSingleWord) {
  const auto m = toy_bigram();
  EXPECT_TRUE(viterbi_decode(m, std::vector<LatticeColumn>{}).empty());
  LatticeColumn only_b{{1}, {0.0}};
  EXPECT_EQ(viterbi_decode(m, std::vector<LatticeColumn>{only_b}), (std::vector<TagId>{1}));
}

TEST(ViterbiDecode, FullTieGoesToSmallestTags) {
  SmoothedNGramModel m(3, ConditionalDistribution::uniform(3));
  std::vector<LatticeColumn> lattice(4, open_column({1, 1, 1}));
  EXPECT_EQ(viterbi_decode(m, lattice), (std::vector<TagId>{0, 0, 0, 0}));
}

TEST(ViterbiDecode, ShiftingAColumnDoesNotChangeTheArgmax) {
  std::mt19937_64 rng(17);
  const auto m = toy_bigram();
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<LatticeColumn> lattice;
    for (std::size_t k = 0; k < 1 + rng() % 6; ++k)
      lattice.push_back(open_column({0.1 + (rng() % 100) / 50.0, 0.1 + (rng() % 100) / 50.0}));
    const auto base = viterbi_decode(m, lattice);
    auto shifted = lattice;
    for (auto& x : shifted[rng() % shifted.size()].log_factor) x += 3.0;
    EXPECT_EQ(viterbi_decode(m, shifted), base);
  }
}

TEST(ViterbiDecode, RejectsMalformedColumns) {
  const auto m = toy_bigram();
  EXPECT_THROW(viterbi_decode(m, std::vector<LatticeColumn>{LatticeColumn{}}), ValidationError);
}

TEST(ScoreSequence, Examples) {
  const auto c = parse_corpus("the\tAT\ncat\tNN\n\nthe\tAT\nrun\tVB\n");
  TrainingOptions opt;
  opt.order = 1;
  const auto m = train_model(c, opt);
  EXPECT_EQ(score_sequence(m, std::vector<std::string>{}, std::vector<TagId>{}), 0.0);
  // Order 1: P(T) * P(T|W) / P(T) = P(T|W) = 1 for "cat"/NN.
  const auto nn = *c.tag_set.find("NN");
  EXPECT_NEAR(score_sequence(m, std::vector<std::string>{"cat"}, std::vector<TagId>{nn}), 0.0, 1e-12);
  const auto vb = *c.tag_set.find("VB");
  EXPECT_EQ(score_sequence(m, std::vector<std::string>{"cat"}, std::vector<TagId>{vb}), kLogZero);
  EXPECT_THROW(score_sequence(m, std::vector<std::string>{"cat"}, std::vector<TagId>{}), ValidationError);
}

TEST(ScoreSequence, MatchesProbabilitySpaceProduct) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 30; ++trial) {
    const auto c = random_corpus(rng, 2 + rng() % 3, 20, 40);
    TrainingOptions opt;
    opt.order = 1 + rng() % 3;
    opt.policy = {3, 4};
    const auto m = train_model(c, opt);
    const auto words = random_words(rng, 20, 1 + rng() % 5);
    std::vector<TagId> tags;
    for (std::size_t k = 0; k < words.size(); ++k) tags.push_back(static_cast<TagId>(rng() % m.tag_set.size()));
    const long double p = oracle::sequence_product(m, words, tags);
    const double got = score_sequence(m, words, tags);
    if (p == 0) {
      EXPECT_EQ(got, kLogZero);
    } else {
      EXPECT_NEAR(got, static_cast<double>(std::log(p)), 1e-9);
    }
  }
}

TEST(ViterbiTag, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(23);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_corpus(rng, 2 + rng() % 3, 16, 30);
    TrainingOptions opt;
    opt.order = 1 + rng() % 3;
    opt.policy = {1 + rng() % 4, 1 + rng() % 5};
    opt.smoothing = static_cast<SmoothingKind>(rng() % 3);
    if (opt.smoothing == SmoothingKind::interp) {
      const auto grid = simplex_grid(opt.order, 0.25);
      opt.lambdas = grid[rng() % grid.size()];
    }
    opt.unknown_mode = rng() % 4 ? UnknownWordMode::suffix : UnknownWordMode::root_only;
    const auto m = train_model(c, opt);
    const auto words = random_words(rng, 16, 1 + rng() % 5);
    DecodeOptions dec{rng() % 4 == 0};

    std::vector<std::vector<TagId>> candidates;
    for (const auto& w : words) candidates.push_back(lattice_column(m, w, dec).tags);
    long double best = -1;
    oracle::for_each_sequence(candidates, [&](const std::vector<TagId>& seq) {
      best = std::max(best, oracle::sequence_product(m, words, seq));
    });
    const auto got = viterbi_tag(m, words, dec);
    const long double p = oracle::sequence_product(m, words, got);
    EXPECT_NEAR(static_cast<double>(p / best), 1.0, 1e-9) << "trial " << trial;
    ++checked;
  }
  EXPECT_EQ(checked, 200);
}

TEST(TagCorpus, ThreadsPreserveOrderAndOutput) {
  std::mt19937_64 rng(29);
  const auto c = random_corpus(rng, 4, 30, 100);
  const auto m = train_model(c, {});
  std::vector<std::vector<std::string>> sentences;
  for (int i = 0; i < 60; ++i) sentences.push_back(random_words(rng, 30, 1 + rng() % 12));
  sentences.push_back({});
  const auto serial = tag_corpus(m, sentences);
  EXPECT_EQ(tag_corpus(m, sentences, {}, 4), serial);
  EXPECT_TRUE(serial.back().empty());
  EXPECT_TRUE(tag_corpus(m, std::vector<std::vector<std::string>>{}, {}, 4).empty());
  // Each sentence is decoded independently.
  std::vector<std::vector<std::string>> reversed(sentences.rbegin(), sentences.rend());
  const auto r = tag_corpus(m, reversed);
  for (std::size_t i = 0; i < sentences.size(); ++i) EXPECT_EQ(r[sentences.size() - 1 - i], serial[i]);
}

TEST(TrainModel, OrderOneTransitionIsTheUnigram) {
  const auto c = parse_corpus("a\tX\nb\tX\nc\tY\n");
  TrainingOptions opt;
  opt.order = 1;
  opt.root_mode = RootMode::relative_frequency;
  const auto m = train_model(c, opt);
  EXPECT_NEAR(m.unigram()[0], 2.0 / 3, 1e-15);
  EXPECT_EQ(m.meta.training_tokens, 3u);
}

TEST(TrainModel, KnownWordsKeepTheirTags) {
  const auto c = parse_corpus("the\tAT\ndog\tNN\nbarks\tVB\n\nthe\tAT\ncat\tNN\n");
  const auto m = train_model(c, {});
  const std::vector<std::string> words{"the", "cat"};
  const auto tags = viterbi_tag(m, words);
  EXPECT_EQ(tags, (std::vector<TagId>{*c.tag_set.find("AT"), *c.tag_set.find("NN")}));
}

TEST(TrainModel, NoRareWordsUsesUnigramForUnknownWords) {
  std::string text;
  for (int i = 0; i < 12; ++i) text += "the\tAT\ndog\tNN\n\n";
  const auto c = parse_corpus(text);
  const auto m = train_model(c, {});
  EXPECT_EQ(m.unknown.root(), m.unigram());
  EXPECT_EQ(m.lexical_distribution("zebra").probs, m.unigram().probs());
}

TEST(TrainModel, RejectsBadOptions) {
  const auto c = parse_corpus("a\tX\n");
  TrainingOptions opt;
  opt.smoothing = SmoothingKind::interp;
  EXPECT_THROW(train_model(c, opt), ValidationError);
  opt.lambdas = InterpolationWeights({0.5, 0.5});
  EXPECT_THROW(train_model(c, opt), ValidationError);  // order 3 needs three weights
  TrainingOptions zero;
  zero.order = 0;
  EXPECT_THROW(train_model(c, zero), ValidationError);
  EXPECT_THROW(train_model(parse_corpus(""), {}), ValidationError);
}

TEST(TuneInterpolation, SearchesTheWholeGrid) {
  std::mt19937_64 rng(31);
  const auto train = random_corpus(rng, 3, 20, 80);
  const auto held = random_corpus(rng, 3, 20, 20);
  TrainingOptions opt;
  opt.order = 2;
  for (auto objective : {TuneObjective::accuracy, TuneObjective::log_likelihood}) {
    const auto r = tune_interpolation(train, opt, held, 0.05, objective);
    EXPECT_EQ(r.search.evaluated, 21u);
    EXPECT_EQ(r.model.meta.lambdas, r.search.best.values());
    EXPECT_EQ(r.model.meta.smoothing, SmoothingKind::interp);
    // The returned model scores what the search reported.
    const double score = objective == TuneObjective::accuracy ? tagging_accuracy(r.model, held)
                                                              : held_out_log_likelihood(r.model.transition, held);
    EXPECT_DOUBLE_EQ(score, r.search.objective);
  }
}

TEST(ParseOptions, Names) {
  EXPECT_EQ(parse_smoothing_kind("interp"), SmoothingKind::interp);
  EXPECT_EQ(parse_unknown_word_mode("root"), UnknownWordMode::root_only);
  EXPECT_EQ(parse_tune_objective("loglik"), TuneObjective::log_likelihood);
  EXPECT_THROW(parse_smoothing_kind("kn"), ValidationError);
}
