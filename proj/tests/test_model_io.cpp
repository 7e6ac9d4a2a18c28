#include <gtest/gtest.h>

#include <random>

#include "succabs/model_io.hpp"

using namespace succabs;

namespace {

Corpus small_corpus() {
  const SynthesisConfig cfg{4, 60, 2000, 10, 3, 1.5};
  return synthesize_corpus(cfg).train;
}

std::vector<Model> trained_models() {
  const auto c = small_corpus();
  std::vector<Model> out;
  TrainingOptions sa;
  out.push_back(train_model(c, sa));
  TrainingOptions interp;
  interp.smoothing = SmoothingKind::interp;
  interp.lambdas = InterpolationWeights({0.1, 0.3, 0.6});
  interp.root_mode = RootMode::relative_frequency;
  out.push_back(train_model(c, interp));
  TrainingOptions ele;
  ele.smoothing = SmoothingKind::ele;
  ele.order = 2;
  ele.unknown_mode = UnknownWordMode::root_only;
  ele.sigma_scale = 0.7;
  out.push_back(train_model(c, ele));
  return out;
}

}  // namespace

TEST(ModelIo, RoundTripIsExact) {
  for (const auto& m : trained_models()) {
    const auto text = model_to_string(m);
    const auto back = model_from_string(text);
    EXPECT_EQ(back, m);
    EXPECT_EQ(model_to_string(back), text);
  }
}

TEST(ModelIo, ReloadedModelAnswersQueriesIdentically) {
  std::mt19937_64 rng(43);
  for (const auto& m : trained_models()) {
    const auto back = model_from_string(model_to_string(m));
    for (int q = 0; q < 100; ++q) {
      std::string w;
      for (std::size_t l = 0; l < 1 + rng() % 8; ++l) w.push_back(static_cast<char>('a' + rng() % 26));
      EXPECT_EQ(back.lexical_distribution(w).probs, m.lexical_distribution(w).probs);
      Context ctx;
      for (std::size_t k = 0; k + 1 < m.order(); ++k)
        ctx.push_back(static_cast<TagId>(rng() % (m.tag_set.size() + 1)) - 1);
      EXPECT_EQ(back.transition.distribution(ctx), m.transition.distribution(ctx));
    }
  }
}

TEST(ModelIo, RejectsForeignFilesAndOtherVersions) {
  const auto text = model_to_string(trained_models().front());
  EXPECT_THROW(model_from_string("hello\n"), ParseError);
  EXPECT_THROW(model_from_string(""), ParseError);
  auto v2 = text;
  v2.replace(v2.find("\t1\n"), 3, "\t2\n");
  EXPECT_THROW(model_from_string(v2), ValidationError);
}

TEST(ModelIo, TruncatedFileReportsALine) {
  const auto text = model_to_string(trained_models().front());
  const auto cut = text.substr(0, text.find("[lexicon]") + 12);
  try {
    model_from_string(cut);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_GT(e.line(), 1u);
  }
}
