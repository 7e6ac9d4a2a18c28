#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "succabs/error.hpp"
#include "succabs/util.hpp"

namespace succabs {

// Index of a tag in a TagSet. Contexts use kBoundary for the sentence-start
// pseudo-tag, which never appears as an outcome.
using TagId = std::int32_t;
inline constexpr TagId kBoundary = -1;

class TagSet {
 public:
  TagSet() = default;

  explicit TagSet(std::vector<std::string> tags) : tags_(std::move(tags)) {
    index_.reserve(tags_.size());
    for (std::size_t i = 0; i < tags_.size(); ++i) {
      if (tags_[i].empty()) throw ValidationError("empty tag symbol");
      if (!index_.emplace(tags_[i], static_cast<TagId>(i)).second)
        throw ValidationError("duplicate tag symbol '" + tags_[i] + "'");
    }
  }

  std::size_t size() const noexcept { return tags_.size(); }
  bool empty() const noexcept { return tags_.empty(); }
  const std::vector<std::string>& symbols() const noexcept { return tags_; }
  const std::string& symbol(TagId id) const { return tags_.at(static_cast<std::size_t>(id)); }

  std::optional<TagId> find(std::string_view symbol) const {
    auto it = index_.find(std::string(symbol));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  TagId index(std::string_view symbol) const {
    if (auto id = find(symbol)) return *id;
    throw ValidationError("tag '" + std::string(symbol) + "' is not in the tag set");
  }

  friend bool operator==(const TagSet& a, const TagSet& b) { return a.tags_ == b.tags_; }

 private:
  std::vector<std::string> tags_;
  std::unordered_map<std::string, TagId> index_;
};

struct TaggedToken {
  std::string word;
  TagId tag = 0;

  friend bool operator==(const TaggedToken&, const TaggedToken&) = default;
};

using Sentence = std::vector<TaggedToken>;

struct Corpus {
  std::vector<Sentence> sentences;
  TagSet tag_set;

  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.size();
    return n;
  }

  std::vector<std::vector<std::string>> words() const {
    std::vector<std::vector<std::string>> out;
    out.reserve(sentences.size());
    for (const auto& s : sentences) {
      auto& w = out.emplace_back();
      w.reserve(s.size());
      for (const auto& tok : s) w.push_back(tok.word);
    }
    return out;
  }

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

// Reads the token-per-line format: "word<TAB>tag", a blank line ends a
// sentence, lines starting with '#' are comments. CRLF line ends are accepted.
// Without declared tags the tag set is the sorted set of observed tags.
inline Corpus parse_corpus(std::istream& in,
                           const std::optional<std::vector<std::string>>& declared_tags = std::nullopt) {
  struct RawToken {
    std::string word;
    std::string tag;
  };
  std::vector<std::vector<RawToken>> raw;
  std::vector<RawToken> current;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!current.empty()) raw.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (line.front() == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2) throw ParseError(line_no, "expected exactly two tab-separated fields");
    if (fields[0].empty()) throw ParseError(line_no, "empty word");
    if (fields[1].empty()) throw ParseError(line_no, "empty tag");
    current.push_back({std::string(fields[0]), std::string(fields[1])});
  }
  if (!current.empty()) raw.push_back(std::move(current));

  Corpus corpus;
  if (declared_tags) {
    corpus.tag_set = TagSet(*declared_tags);
  } else {
    std::set<std::string> seen;
    for (const auto& s : raw)
      for (const auto& t : s) seen.insert(t.tag);
    corpus.tag_set = TagSet(std::vector<std::string>(seen.begin(), seen.end()));
  }
  corpus.sentences.reserve(raw.size());
  for (auto& s : raw) {
    Sentence sentence;
    sentence.reserve(s.size());
    for (auto& t : s) {
      auto id = corpus.tag_set.find(t.tag);
      if (!id) throw ValidationError("tag '" + t.tag + "' is not among the declared tags");
      sentence.push_back({std::move(t.word), *id});
    }
    corpus.sentences.push_back(std::move(sentence));
  }
  return corpus;
}

inline Corpus parse_corpus(std::string_view text,
                           const std::optional<std::vector<std::string>>& declared_tags = std::nullopt) {
  std::istringstream in{std::string(text)};
  return parse_corpus(in, declared_tags);
}

inline void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& s : corpus.sentences) {
    for (const auto& tok : s) out << tok.word << '\t' << corpus.tag_set.symbol(tok.tag) << '\n';
    out << '\n';
  }
}

inline std::string corpus_to_string(const Corpus& corpus) {
  std::ostringstream out;
  write_corpus(out, corpus);
  return out.str();
}

// Sentence-level random split. The train part receives round(fraction * n)
// sentences, clamped so that both parts are non-empty; each part keeps the
// original sentence order.
inline std::pair<Corpus, Corpus> split_corpus(const Corpus& c, double train_fraction, std::uint64_t seed) {
  if (c.sentences.size() < 2) throw ValidationError("split_corpus needs at least 2 sentences");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValidationError("train fraction must lie in (0, 1)");
  const std::size_t n = c.sentences.size();
  auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<bool> in_train(n, false);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;

  Corpus train{{}, c.tag_set};
  Corpus test{{}, c.tag_set};
  for (std::size_t i = 0; i < n; ++i) (in_train[i] ? train : test).sentences.push_back(c.sentences[i]);
  return {std::move(train), std::move(test)};
}

struct SynthesisConfig {
  std::size_t num_tags = 8;
  std::size_t vocab_size = 500;
  std::size_t num_train_tokens = 50000;
  std::size_t num_test_tokens = 5000;
  std::uint64_t seed = 42;
  double zipf_exponent = 1.8;

  void validate() const {
    if (num_tags < 2) throw ValidationError("num_tags must be at least 2");
    if (vocab_size < num_tags) throw ValidationError("vocab_size must be at least num_tags");
    if (num_train_tokens == 0 || num_test_tokens == 0) throw ValidationError("token counts must be positive");
    if (!(zipf_exponent > 0.0)) throw ValidationError("zipf_exponent must be positive");
  }
};

// The hidden first-order chain a synthetic corpus was drawn from.
struct GeneratorSpec {
  std::vector<std::string> tags;
  std::vector<std::string> words;
  std::vector<TagId> primary_tag;               // per word
  std::vector<std::string> suffixes;            // per tag
  std::vector<double> initial;                  // P(t | sentence start)
  std::vector<std::vector<double>> transition;  // [prev][next]
  std::vector<std::vector<double>> emission;    // [tag][word]
};

struct SyntheticCorpora {
  Corpus train;
  Corpus test;
  GeneratorSpec spec;
};

namespace detail {

inline std::vector<double> normalized(std::vector<double> w) {
  double s = 0.0;
  for (double x : w) s += x;
  for (double& x : w) x /= s;
  return w;
}

inline Corpus sample_corpus(const GeneratorSpec& g, const TagSet& tags, std::size_t num_tokens, Rng& rng) {
  constexpr std::size_t kMinLen = 4;
  constexpr std::size_t kMaxLen = 20;
  const auto init_cum = cumulative_sums(g.initial);
  std::vector<std::vector<double>> trans_cum, emit_cum;
  for (const auto& row : g.transition) trans_cum.push_back(cumulative_sums(row));
  for (const auto& row : g.emission) emit_cum.push_back(cumulative_sums(row));

  Corpus c{{}, tags};
  std::size_t remaining = num_tokens;
  while (remaining > 0) {
    std::size_t len = kMinLen + static_cast<std::size_t>(rng.below(kMaxLen - kMinLen + 1));
    len = std::min(len, remaining);
    Sentence s;
    s.reserve(len);
    std::size_t tag = rng.categorical(init_cum);
    for (std::size_t k = 0; k < len; ++k) {
      if (k > 0) tag = rng.categorical(trans_cum[tag]);
      const std::size_t word = rng.categorical(emit_cum[tag]);
      s.push_back({g.words[word], static_cast<TagId>(tag)});
    }
    remaining -= len;
    c.sentences.push_back(std::move(s));
  }
  return c;
}

}  // namespace detail

// Samples a random hidden tag chain and draws train and test corpora from it.
// Each word has a primary tag whose two-letter suffix it carries, and some
// words can also be emitted by one secondary tag, so both the lexicon and the
// suffixes are informative but ambiguous. Word frequency follows a Zipf law
// over the word index.
inline SyntheticCorpora synthesize_corpus(const SynthesisConfig& cfg) {
  cfg.validate();
  constexpr double kSecondaryProb = 0.3;
  constexpr double kSecondaryWeight = 0.3;
  const std::size_t m = cfg.num_tags;
  const std::size_t v = cfg.vocab_size;
  Rng rng(cfg.seed);
  GeneratorSpec g;

  const std::size_t width = std::max<std::size_t>(2, std::to_string(m - 1).size());
  for (std::size_t t = 0; t < m; ++t) {
    std::string digits = std::to_string(t);
    g.tags.push_back("T" + std::string(width - digits.size(), '0') + digits);
  }

  const auto random_letters = [&rng](std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s.push_back(static_cast<char>('a' + rng.below(26)));
    return s;
  };

  const auto random_row = [&rng](std::size_t n) {
    std::vector<double> w(n);
    for (auto& x : w) {
      const double u = rng.uniform();
      x = 0.1 + u * u;
    }
    return detail::normalized(std::move(w));
  };
  g.initial = random_row(m);
  for (std::size_t t = 0; t < m; ++t) g.transition.push_back(random_row(m));

  std::set<std::string> used_suffixes;
  while (g.suffixes.size() < m) {
    auto s = random_letters(2);
    if (used_suffixes.insert(s).second) g.suffixes.push_back(s);
  }

  std::set<std::string> used_words;
  g.emission.assign(m, std::vector<double>(v, 0.0));
  for (std::size_t w = 0; w < v; ++w) {
    const auto primary = w < m ? w : static_cast<std::size_t>(rng.below(m));
    std::string form;
    do {
      form = random_letters(3 + static_cast<std::size_t>(rng.below(4))) + g.suffixes[primary];
    } while (!used_words.insert(form).second);
    g.words.push_back(form);
    g.primary_tag.push_back(static_cast<TagId>(primary));

    const double base = std::pow(static_cast<double>(w + 1), -cfg.zipf_exponent);
    g.emission[primary][w] = base;
    if (rng.uniform() < kSecondaryProb) {
      auto secondary = static_cast<std::size_t>(rng.below(m - 1));
      if (secondary >= primary) ++secondary;
      g.emission[secondary][w] = kSecondaryWeight * base;
    }
  }
  for (auto& row : g.emission) row = detail::normalized(std::move(row));

  TagSet tags(g.tags);
  Corpus train = detail::sample_corpus(g, tags, cfg.num_train_tokens, rng);
  Corpus test = detail::sample_corpus(g, tags, cfg.num_test_tokens, rng);
  return {std::move(train), std::move(test), std::move(g)};
}

}  // namespace succabs
