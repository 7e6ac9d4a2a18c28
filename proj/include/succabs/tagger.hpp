#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "succabs/corpus.hpp"
#include "succabs/counts.hpp"
#include "succabs/lexicon.hpp"
#include "succabs/smoothing.hpp"

namespace succabs {

enum class SmoothingKind { sa, interp, ele };
enum class UnknownWordMode { suffix, root_only };

inline std::string to_string(SmoothingKind k) {
  switch (k) {
    case SmoothingKind::sa: return "sa";
    case SmoothingKind::interp: return "interp";
    case SmoothingKind::ele: return "ele";
  }
  return "?";
}

inline SmoothingKind parse_smoothing_kind(std::string_view s) {
  if (s == "sa") return SmoothingKind::sa;
  if (s == "interp") return SmoothingKind::interp;
  if (s == "ele") return SmoothingKind::ele;
  throw ValidationError("unknown smoothing '" + std::string(s) + "' (expected sa, interp or ele)");
}

inline std::string to_string(UnknownWordMode m) { return m == UnknownWordMode::suffix ? "suffix" : "root"; }

inline UnknownWordMode parse_unknown_word_mode(std::string_view s) {
  if (s == "suffix") return UnknownWordMode::suffix;
  if (s == "root") return UnknownWordMode::root_only;
  throw ValidationError("unknown unknown-word mode '" + std::string(s) + "' (expected suffix or root)");
}

struct TrainingOptions {
  std::size_t order = 3;
  RareWordPolicy policy;
  RootMode root_mode = RootMode::ele;
  double sigma_scale = 1.0;
  SmoothingKind smoothing = SmoothingKind::sa;
  std::optional<InterpolationWeights> lambdas;
  // root_only ignores suffixes: unknown words get the rare-word tag distribution.
  UnknownWordMode unknown_mode = UnknownWordMode::suffix;
};

struct ModelMetadata {
  std::size_t order = 3;
  RareWordPolicy policy;
  RootMode root_mode = RootMode::ele;
  double sigma_scale = 1.0;
  SmoothingKind smoothing = SmoothingKind::sa;
  std::vector<double> lambdas;
  UnknownWordMode unknown_mode = UnknownWordMode::suffix;
  std::uint64_t corpus_digest = 0;
  std::uint64_t training_tokens = 0;

  friend bool operator==(const ModelMetadata&, const ModelMetadata&) = default;
};

struct Model {
  TagSet tag_set;
  SmoothedNGramModel transition;
  Lexicon lexicon;
  UnknownWordModel unknown;
  ModelMetadata meta;

  const ConditionalDistribution& unigram() const noexcept { return transition.root(); }
  std::size_t order() const noexcept { return transition.order(); }

  LexicalDistribution lexical_distribution(const std::string& word) const {
    if (auto known = known_word_distribution(lexicon, word)) return std::move(*known);
    if (meta.unknown_mode == UnknownWordMode::root_only) return {unknown.root().probs(), {}};
    return unknown_word_distribution(unknown, word);
  }

  friend bool operator==(const Model&, const Model&) = default;
};

inline std::uint64_t corpus_digest(const Corpus& c) {
  std::uint64_t h = fnv1a64("tags");
  for (const auto& t : c.tag_set.symbols()) h = fnv1a64(t + "\n", h);
  return fnv1a64(corpus_to_string(c), h);
}

inline Model train_model(const Corpus& c, const TrainingOptions& opt) {
  if (opt.order < 1) throw ValidationError("n-gram order must be at least 1");
  if (c.token_count() == 0) throw ValidationError("training corpus has no tokens");
  opt.policy.validate();
  if (!(opt.sigma_scale > 0.0)) throw ValidationError("sigma scale must be positive");

  Model m;
  m.tag_set = c.tag_set;
  const auto counts = count_ngrams(c, opt.order);
  switch (opt.smoothing) {
    case SmoothingKind::sa:
      m.transition = build_sa_ngram_model(counts, opt.root_mode, opt.sigma_scale);
      break;
    case SmoothingKind::interp:
      if (!opt.lambdas) throw ValidationError("interpolation smoothing needs lambdas");
      m.transition = build_interpolated_ngram_model(counts, *opt.lambdas, opt.root_mode);
      m.meta.lambdas = opt.lambdas->values();
      break;
    case SmoothingKind::ele:
      m.transition = build_ele_ngram_model(counts, opt.root_mode);
      break;
  }

  m.lexicon = build_lexicon(c);
  auto trie = build_suffix_trie(c, m.lexicon, opt.policy);
  if (trie.node(SuffixTrie::root()).total == 0) {
    // No rare words: the chain has nothing to start from but the global tag
    // distribution.
    m.unknown = UnknownWordModel(std::move(trie), m.unigram(), opt.policy, opt.sigma_scale);
  } else {
    m.unknown = UnknownWordModel::build(std::move(trie), opt.root_mode, opt.policy, opt.sigma_scale);
  }

  m.meta.order = opt.order;
  m.meta.policy = opt.policy;
  m.meta.root_mode = opt.root_mode;
  m.meta.sigma_scale = opt.sigma_scale;
  m.meta.smoothing = opt.smoothing;
  m.meta.unknown_mode = opt.unknown_mode;
  m.meta.corpus_digest = corpus_digest(c);
  m.meta.training_tokens = c.token_count();
  return m;
}

struct DecodeOptions {
  // Let known words take any tag instead of only the tags seen with them.
  bool open_lattice = false;
};

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline double safe_log(double x) { return x > 0.0 ? std::log(x) : kLogZero; }

// ln of prod_k P(T_k | context_k) * P(T_k | W_k) / P(T_k); kLogZero when any
// factor vanishes.
inline double score_sequence(const Model& m, std::span<const std::string> words, std::span<const TagId> tags) {
  if (words.size() != tags.size()) throw ValidationError("words and tags differ in length");
  const std::size_t h = m.order() - 1;
  std::vector<TagId> history(h, kBoundary);
  double score = 0.0;
  for (std::size_t k = 0; k < words.size(); ++k) {
    const TagId t = tags[k];
    if (t < 0 || static_cast<std::size_t>(t) >= m.tag_set.size()) throw ValidationError("tag index out of range");
    const double trans = m.transition.distribution(history)[static_cast<std::size_t>(t)];
    const double lex = lexical_factor(m.lexical_distribution(words[k]), m.unigram(), t);
    score += safe_log(trans) + safe_log(lex);
    if (h > 0) {
      history.erase(history.begin());
      history.push_back(t);
    }
  }
  return score;
}

// Candidate tags for one word with the log of their lexical factors.
struct LatticeColumn {
  std::vector<TagId> tags;         // ascending
  std::vector<double> log_factor;  // aligned with tags
};

inline LatticeColumn lattice_column(const Model& m, const std::string& word, const DecodeOptions& opt = {}) {
  const auto dist = m.lexical_distribution(word);
  LatticeColumn col;
  if (!dist.support.empty() && !opt.open_lattice) {
    col.tags = dist.support;
  } else {
    col.tags.resize(m.tag_set.size());
    for (std::size_t t = 0; t < col.tags.size(); ++t) col.tags[t] = static_cast<TagId>(t);
  }
  for (TagId t : col.tags) col.log_factor.push_back(safe_log(lexical_factor(dist, m.unigram(), t)));
  return col;
}

/// Highest-scoring path through a lattice, where a path scores
/// sum_k ln P(T_k | context_k) + log_factor_k(T_k), found by dynamic
/// programming over states holding the last max(N-1, 1) tags.
///
/// States are keyed by a base-(M+1) code with the oldest tag most significant
/// (the boundary pseudo-tag is digit 0), so ascending key order is
/// lexicographic tag order. Cells keep the first best candidate in that order,
/// which breaks every tie toward the smallest tag index.
inline std::vector<TagId> viterbi_decode(const SmoothedNGramModel& transition, std::span<const LatticeColumn> lattice) {
  const std::size_t n = lattice.size();
  if (n == 0) return {};
  const std::size_t h = transition.order() - 1;
  const std::size_t s = std::max<std::size_t>(h, 1);
  const std::uint64_t base = transition.num_tags() + 1;
  std::uint64_t top = 1;  // base^(s-1)
  for (std::size_t i = 1; i < s; ++i) top *= base;

  struct Cell {
    double score;
    std::uint64_t back;
  };
  std::vector<std::map<std::uint64_t, Cell>> cells(n + 1);
  cells[0].emplace(0, Cell{0.0, 0});

  std::unordered_map<std::uint64_t, const ConditionalDistribution*> trans_cache;
  std::vector<TagId> ctx(h);
  const auto distribution = [&](std::uint64_t state) -> const ConditionalDistribution& {
    auto it = trans_cache.find(state);
    if (it != trans_cache.end()) return *it->second;
    std::uint64_t code = state;
    for (std::size_t i = 0; i < h; ++i) {
      ctx[h - 1 - i] = static_cast<TagId>(code % base) - 1;
      code /= base;
    }
    const auto* d = &transition.distribution(ctx);
    trans_cache.emplace(state, d);
    return *d;
  };

  for (std::size_t k = 0; k < n; ++k) {
    const auto& col = lattice[k];
    if (col.tags.empty() || col.tags.size() != col.log_factor.size())
      throw ValidationError("malformed lattice column");
    auto& next = cells[k + 1];
    for (const auto& [state, cell] : cells[k]) {
      const auto& dist = distribution(state);
      for (std::size_t i = 0; i < col.tags.size(); ++i) {
        const TagId t = col.tags[i];
        const double sc = cell.score + safe_log(dist[static_cast<std::size_t>(t)]) + col.log_factor[i];
        const std::uint64_t code = (state % top) * base + static_cast<std::uint64_t>(t + 1);
        auto [it, inserted] = next.try_emplace(code, Cell{sc, state});
        if (!inserted && sc > it->second.score) it->second = Cell{sc, state};
      }
    }
  }

  auto best = cells[n].begin();
  for (auto it = cells[n].begin(); it != cells[n].end(); ++it)
    if (it->second.score > best->second.score) best = it;

  std::vector<TagId> tags(n);
  std::uint64_t state = best->first;
  for (std::size_t k = n; k > 0; --k) {
    tags[k - 1] = static_cast<TagId>(state % base) - 1;
    state = cells[k].at(state).back;
  }
  return tags;
}

// A sequence maximizing score_sequence over the words' lattice: known words
// take the tags seen with them in training, unknown words any tag.
inline std::vector<TagId> viterbi_tag(const Model& m, std::span<const std::string> words,
                                      const DecodeOptions& opt = {}) {
  std::vector<LatticeColumn> lattice;
  lattice.reserve(words.size());
  for (const auto& w : words) lattice.push_back(lattice_column(m, w, opt));
  return viterbi_decode(m.transition, lattice);
}

// Decodes sentences independently; `threads` > 1 spreads them over a worker
// pool without changing the output order.
inline std::vector<std::vector<TagId>> tag_corpus(const Model& m, std::span<const std::vector<std::string>> sentences,
                                                  const DecodeOptions& opt = {}, unsigned threads = 1) {
  std::vector<std::vector<TagId>> out(sentences.size());
  if (threads <= 1 || sentences.size() < 2) {
    for (std::size_t i = 0; i < sentences.size(); ++i) out[i] = viterbi_tag(m, sentences[i], opt);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(threads);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < sentences.size(); i = next++) out[i] = viterbi_tag(m, sentences[i], opt);
      } catch (...) {
        failures[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);
  return out;
}

// Fraction of tokens tagged correctly.
inline double tagging_accuracy(const Model& m, const Corpus& gold, const DecodeOptions& opt = {}) {
  const auto words = gold.words();
  const auto predicted = tag_corpus(m, words, opt);
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    for (std::size_t k = 0; k < predicted[i].size(); ++k) {
      correct += predicted[i][k] == gold.sentences[i][k].tag;
      ++total;
    }
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

enum class TuneObjective { accuracy, log_likelihood };

inline TuneObjective parse_tune_objective(std::string_view s) {
  if (s == "accuracy") return TuneObjective::accuracy;
  if (s == "loglik") return TuneObjective::log_likelihood;
  throw ValidationError("unknown tuning objective '" + std::string(s) + "' (expected accuracy or loglik)");
}

struct TunedInterpolation {
  Model model;
  GridSearchResult search;
};

/// Chooses context-independent interpolation weights by exhaustive grid
/// search against a held-out corpus: either its tagging accuracy or the log
/// likelihood of its tag sequences under the transition model.
inline TunedInterpolation tune_interpolation(const Corpus& train, TrainingOptions opt, const Corpus& held_out,
                                             double step, TuneObjective objective, const DecodeOptions& decode = {}) {
  opt.smoothing = SmoothingKind::interp;
  std::vector<double> first(opt.order, 0.0);
  first.back() = 1.0;
  opt.lambdas = InterpolationWeights(first);
  Model model = train_model(train, opt);
  const auto counts = count_ngrams(train, opt.order);

  auto search = grid_search_lambdas(opt.order, step, [&](const InterpolationWeights& w) {
    model.transition = build_interpolated_ngram_model(counts, w, opt.root_mode);
    return objective == TuneObjective::accuracy ? tagging_accuracy(model, held_out, decode)
                                                : held_out_log_likelihood(model.transition, held_out);
  });
  model.transition = build_interpolated_ngram_model(counts, search.best, opt.root_mode);
  model.meta.lambdas = search.best.values();
  return {std::move(model), std::move(search)};
}

}  // namespace succabs
