#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "succabs/corpus.hpp"
#include "succabs/error.hpp"
#include "succabs/util.hpp"

namespace succabs {

using Count = std::uint64_t;

// Conditioning tags, oldest first. May contain kBoundary.
using Context = std::vector<TagId>;

struct OutcomeCounts {
  std::vector<Count> outcomes;
  Count total = 0;

  friend bool operator==(const OutcomeCounts&, const OutcomeCounts&) = default;
};

// Tag n-gram statistics for every order 1..N. Level L holds the contexts of
// length L (the (L+1)-gram table); level 0 has the single empty context whose
// outcome vector is the unigram tag distribution.
class NGramCountTable {
 public:
  NGramCountTable(std::size_t order, std::size_t num_tags)
      : order_(order), num_tags_(num_tags), levels_(order) {
    if (order < 1) throw ValidationError("n-gram order must be at least 1");
  }

  std::size_t order() const noexcept { return order_; }
  std::size_t num_tags() const noexcept { return num_tags_; }

  const std::map<Context, OutcomeCounts>& level(std::size_t context_length) const {
    return levels_.at(context_length);
  }

  void add(std::span<const TagId> context, TagId outcome, Count n = 1) {
    auto& entry = levels_.at(context.size())[Context(context.begin(), context.end())];
    if (entry.outcomes.empty()) entry.outcomes.assign(num_tags_, 0);
    entry.outcomes.at(static_cast<std::size_t>(outcome)) += n;
    entry.total += n;
  }

  const OutcomeCounts* find(std::span<const TagId> context) const {
    if (context.size() >= order_) return nullptr;
    const auto& lvl = levels_[context.size()];
    auto it = lvl.find(Context(context.begin(), context.end()));
    return it == lvl.end() ? nullptr : &it->second;
  }

  // Counts for a context; the zero vector when it was never observed.
  OutcomeCounts lookup(std::span<const TagId> context) const {
    check_length(context);
    if (const auto* e = find(context)) return *e;
    return {std::vector<Count>(num_tags_, 0), 0};
  }

  // |C|: how often the context occurred as a conditioning context.
  Count context_count(std::span<const TagId> context) const {
    check_length(context);
    const auto* e = find(context);
    return e ? e->total : 0;
  }

  // Tables built over disjoint sentence shards combine by addition.
  void merge(const NGramCountTable& other) {
    if (other.order_ != order_ || other.num_tags_ != num_tags_)
      throw ValidationError("cannot merge count tables of different shape");
    for (std::size_t l = 0; l < order_; ++l) {
      for (const auto& [ctx, counts] : other.levels_[l]) {
        auto& entry = levels_[l][ctx];
        if (entry.outcomes.empty()) entry.outcomes.assign(num_tags_, 0);
        for (std::size_t t = 0; t < num_tags_; ++t) entry.outcomes[t] += counts.outcomes[t];
        entry.total += counts.total;
      }
    }
  }

  friend bool operator==(const NGramCountTable&, const NGramCountTable&) = default;

 private:
  void check_length(std::span<const TagId> context) const {
    if (context.size() >= order_)
      throw ValidationError("context of length " + std::to_string(context.size()) +
                            " is too long for an order-" + std::to_string(order_) + " table");
  }

  std::size_t order_;
  std::size_t num_tags_;
  std::vector<std::map<Context, OutcomeCounts>> levels_;
};

// Every position k of each sentence contributes one event per order: the
// outcome tag with each suffix of its (order-1)-tag history, the history being
// left-padded with kBoundary at the sentence start.
inline NGramCountTable count_ngrams(const Corpus& c, std::size_t order) {
  NGramCountTable table(order, c.tag_set.size());
  const std::size_t h = order - 1;
  std::vector<TagId> history;
  for (const auto& s : c.sentences) {
    history.assign(h, kBoundary);
    for (const auto& tok : s) {
      std::span<const TagId> full(history);
      for (std::size_t len = 0; len <= h; ++len) table.add(full.subspan(h - len), tok.tag);
      if (h > 0) {
        history.erase(history.begin());
        history.push_back(tok.tag);
      }
    }
  }
  return table;
}

class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::size_t num_tags) : num_tags_(num_tags) {}

  void add(const std::string& word, TagId tag, Count n = 1) {
    auto& e = entries_[word];
    if (e.outcomes.empty()) e.outcomes.assign(num_tags_, 0);
    e.outcomes.at(static_cast<std::size_t>(tag)) += n;
    e.total += n;
  }

  const OutcomeCounts* find(const std::string& word) const {
    auto it = entries_.find(word);
    return it == entries_.end() ? nullptr : &it->second;
  }

  bool contains(const std::string& word) const { return entries_.count(word) > 0; }
  std::size_t num_tags() const noexcept { return num_tags_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::map<std::string, OutcomeCounts>& entries() const noexcept { return entries_; }

  friend bool operator==(const Lexicon&, const Lexicon&) = default;

 private:
  std::size_t num_tags_ = 0;
  std::map<std::string, OutcomeCounts> entries_;
};

inline Lexicon build_lexicon(const Corpus& c) {
  Lexicon lex(c.tag_set.size());
  for (const auto& s : c.sentences)
    for (const auto& tok : s) lex.add(tok.word, tok.tag);
  return lex;
}

struct RareWordPolicy {
  Count frequency_threshold = 10;
  std::size_t max_suffix_length = 10;

  void validate() const {
    if (frequency_threshold == 0) throw ValidationError("rare-word threshold must be positive");
    if (max_suffix_length == 0) throw ValidationError("maximum suffix length must be positive");
  }

  friend bool operator==(const RareWordPolicy&, const RareWordPolicy&) = default;
};

// Letter that marks the beginning of a word on a reversed-suffix path.
inline constexpr char32_t kBeginOfWord = U'\0';

// The key a word is filed under: its letters last to first, then the
// begin-of-word marker.
inline std::vector<char32_t> reversed_suffix_key(std::string_view word) {
  auto letters = decode_utf8(word);
  std::vector<char32_t> key(letters.rbegin(), letters.rend());
  key.push_back(kBeginOfWord);
  return key;
}

// Tree over reversed suffixes. Node 0 is the root (empty suffix); a node at
// depth j stands for the last j letters of a word, or for the whole word when
// its incoming letter is kBeginOfWord.
class SuffixTrie {
 public:
  using NodeId = std::uint32_t;

  struct Node {
    char32_t letter = 0;
    NodeId parent = 0;
    std::map<char32_t, NodeId> children;
    std::vector<Count> counts;
    Count total = 0;

    friend bool operator==(const Node&, const Node&) = default;
  };

  SuffixTrie() : SuffixTrie(0) {}
  explicit SuffixTrie(std::size_t num_tags) : num_tags_(num_tags) {
    nodes_.push_back(Node{0, 0, {}, std::vector<Count>(num_tags, 0), 0});
  }

  static constexpr NodeId root() noexcept { return 0; }
  std::size_t num_tags() const noexcept { return num_tags_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

  std::optional<NodeId> child(NodeId id, char32_t letter) const {
    const auto& ch = nodes_.at(id).children;
    auto it = ch.find(letter);
    if (it == ch.end()) return std::nullopt;
    return it->second;
  }

  // Adds n occurrences of tag along the path spelled by key (root included).
  void insert(std::span<const char32_t> key, TagId tag, Count n = 1) {
    NodeId cur = root();
    bump(cur, tag, n);
    for (char32_t letter : key) {
      auto next = child(cur, letter);
      if (!next) next = add_node(cur, letter);
      cur = *next;
      bump(cur, tag, n);
    }
  }

  // Appends a node; used when reading a serialized trie, where nodes arrive
  // parent-first with their counts already aggregated.
  NodeId add_node(NodeId parent, char32_t letter, std::vector<Count> counts = {}) {
    if (parent >= nodes_.size()) throw ValidationError("suffix trie parent out of range");
    if (counts.empty()) counts.assign(num_tags_, 0);
    if (counts.size() != num_tags_) throw ValidationError("suffix trie count vector has wrong size");
    Count total = 0;
    for (Count c : counts) total += c;
    const auto id = static_cast<NodeId>(nodes_.size());
    if (!nodes_[parent].children.emplace(letter, id).second)
      throw ValidationError("duplicate suffix trie edge");
    nodes_.push_back(Node{letter, parent, {}, std::move(counts), total});
    return id;
  }

  void set_root_counts(std::vector<Count> counts) {
    if (counts.size() != num_tags_) throw ValidationError("suffix trie count vector has wrong size");
    Count total = 0;
    for (Count c : counts) total += c;
    nodes_[0].counts = std::move(counts);
    nodes_[0].total = total;
  }

  // Every node's counts dominate the sum of its children's (the difference
  // being words that end there) and totals match vector sums.
  bool aggregation_holds() const {
    for (const auto& n : nodes_) {
      Count sum = 0;
      for (Count c : n.counts) sum += c;
      if (sum != n.total) return false;
      std::vector<Count> children(num_tags_, 0);
      for (const auto& [letter, id] : n.children)
        for (std::size_t t = 0; t < num_tags_; ++t) children[t] += nodes_[id].counts[t];
      for (std::size_t t = 0; t < num_tags_; ++t)
        if (children[t] > n.counts[t]) return false;
    }
    return true;
  }

  friend bool operator==(const SuffixTrie&, const SuffixTrie&) = default;

 private:
  void bump(NodeId id, TagId tag, Count n) {
    nodes_[id].counts.at(static_cast<std::size_t>(tag)) += n;
    nodes_[id].total += n;
  }

  std::size_t num_tags_;
  std::vector<Node> nodes_;
};

// Collects the tag counts of rare-word tokens (lexicon total below the
// threshold) along their reversed-suffix paths, truncated to
// max_suffix_length edges.
inline SuffixTrie build_suffix_trie(const Corpus& c, const Lexicon& lex, const RareWordPolicy& policy) {
  policy.validate();
  SuffixTrie trie(c.tag_set.size());
  for (const auto& s : c.sentences) {
    for (const auto& tok : s) {
      const auto* e = lex.find(tok.word);
      if (e == nullptr) throw ValidationError("word '" + tok.word + "' missing from the lexicon");
      if (e->total >= policy.frequency_threshold) continue;
      auto key = reversed_suffix_key(tok.word);
      if (key.size() > policy.max_suffix_length) key.resize(policy.max_suffix_length);
      trie.insert(key, tok.tag);
    }
  }
  return trie;
}

}  // namespace succabs
