#pragma once

#include <optional>
#include <string>
#include <vector>

#include "succabs/counts.hpp"
#include "succabs/smoothing.hpp"

namespace succabs {

struct LexicalDistribution {
  std::vector<double> probs;
  // Tags observed with the word in training; empty for unknown words, which
  // may take any tag.
  std::vector<TagId> support;
};

inline std::optional<LexicalDistribution> known_word_distribution(const Lexicon& lex, const std::string& word) {
  const auto* e = lex.find(word);
  if (e == nullptr) return std::nullopt;
  LexicalDistribution d{relative_frequencies(e->outcomes), {}};
  for (std::size_t t = 0; t < e->outcomes.size(); ++t)
    if (e->outcomes[t] > 0) d.support.push_back(static_cast<TagId>(t));
  return d;
}

// Tag distribution for unseen words, estimated from the endings of rare
// training words. The chain starts at the trie root (all rare words) and
// specializes one letter at a time from the end of the word, finishing with
// the begin-of-word marker when the whole word matched.
class UnknownWordModel {
 public:
  UnknownWordModel() = default;
  UnknownWordModel(SuffixTrie trie, ConditionalDistribution root, RareWordPolicy policy, double sigma_scale = 1.0)
      : trie_(std::move(trie)), root_(std::move(root)), policy_(policy), sigma_scale_(sigma_scale) {
    policy_.validate();
    if (root_.size() != trie_.num_tags()) throw ValidationError("unknown-word root has wrong dimension");
  }

  static UnknownWordModel build(SuffixTrie trie, RootMode root_mode, RareWordPolicy policy, double sigma_scale = 1.0) {
    auto root = root_distribution(trie.node(SuffixTrie::root()).counts, root_mode);
    return UnknownWordModel(std::move(trie), std::move(root), policy, sigma_scale);
  }

  const SuffixTrie& trie() const noexcept { return trie_; }
  const ConditionalDistribution& root() const noexcept { return root_; }
  const RareWordPolicy& policy() const noexcept { return policy_; }
  double sigma_scale() const noexcept { return sigma_scale_; }

  // The (frequencies, count) levels a word's reversed letters match, most
  // general first, excluding the root.
  std::vector<ChainLevel> suffix_chain(const std::string& word) const {
    std::vector<ChainLevel> chain;
    auto key = reversed_suffix_key(word);
    if (key.size() > policy_.max_suffix_length) key.resize(policy_.max_suffix_length);
    auto node = SuffixTrie::root();
    for (char32_t letter : key) {
      auto next = trie_.child(node, letter);
      if (!next) break;
      node = *next;
      const auto& n = trie_.node(node);
      chain.push_back({relative_frequencies(n.counts), n.total});
    }
    return chain;
  }

  ConditionalDistribution estimate(const std::string& word) const {
    const auto chain = suffix_chain(word);
    if (chain.empty()) return root_;
    auto levels = smooth_linear_chain(chain, root_, sigma_scale_);
    return std::move(levels.back());
  }

  friend bool operator==(const UnknownWordModel&, const UnknownWordModel&) = default;

 private:
  SuffixTrie trie_;
  ConditionalDistribution root_;
  RareWordPolicy policy_;
  double sigma_scale_ = 1.0;
};

inline LexicalDistribution unknown_word_distribution(const UnknownWordModel& m, const std::string& word) {
  if (word.empty()) throw ValidationError("cannot estimate tags of an empty word");
  return {m.estimate(word).probs(), {}};
}

/// P(T|W) / P(T), the per-word factor of the tagging objective once the
/// constant P(W) terms are dropped.
inline double lexical_factor(double p_tag_given_word, double p_tag) {
  if (p_tag_given_word == 0.0) return 0.0;
  if (!(p_tag > 0.0))
    throw ValidationError("tag has zero unigram probability but nonzero lexical probability; use root mode ele");
  return p_tag_given_word / p_tag;
}

inline double lexical_factor(const LexicalDistribution& dist, const ConditionalDistribution& unigram, TagId tag) {
  const auto t = static_cast<std::size_t>(tag);
  return lexical_factor(dist.probs.at(t), unigram[t]);
}

}  // namespace succabs
