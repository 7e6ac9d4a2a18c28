#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "succabs/error.hpp"
#include "succabs/tagger.hpp"
#include "succabs/util.hpp"

// Model file layout (UTF-8, LF, fields separated by TAB):
//
//   SUCCABS <version>
//   [metadata]            key<TAB>value lines
//   [tags] <M>            one symbol per line, index order
//   [unigram]             M probabilities
//   [transitions] <K>     context<TAB>M probabilities; context is comma-joined
//                         tag indices, oldest first, -1 = sentence boundary
//   [lexicon] <W>         word<TAB>tag:count ...
//   [suffix_trie] <S>     parent<TAB>letter<TAB>tag:count ... in node order;
//                         the first line is the root (parent and letter 0);
//                         letter is a code point, 0 = begin of word
//   [unknown_root]        M probabilities
//   [end]
//
// Probabilities carry 17 significant digits so that reading a model back
// reproduces every stored double exactly.

namespace succabs {

inline constexpr std::string_view kModelMagic = "SUCCABS";
inline constexpr int kModelVersion = 1;

namespace detail {

inline void write_probs(std::ostream& out, const std::vector<double>& p) {
  for (std::size_t i = 0; i < p.size(); ++i) out << (i ? "\t" : "") << format_double(p[i]);
}

inline void write_sparse_counts(std::ostream& out, const std::vector<Count>& counts) {
  for (std::size_t t = 0; t < counts.size(); ++t)
    if (counts[t] > 0) out << '\t' << t << ':' << counts[t];
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::string next() {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError(line_no_ + 1, "unexpected end of model file");
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  std::size_t line() const noexcept { return line_no_; }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_no_, what); }

  // Reads "[name]" or "[name]<TAB>count" and returns the count (0 if absent).
  std::size_t section(std::string_view name) {
    const auto line = next();
    const auto fields = split(line, '\t');
    if (fields[0] != "[" + std::string(name) + "]") fail("expected section [" + std::string(name) + "]");
    if (fields.size() == 1) return 0;
    return number<std::size_t>(fields[1]);
  }

  template <typename Int>
  Int number(std::string_view s) const {
    try {
      return parse_integer<Int>(s);
    } catch (const ValidationError& e) {
      fail(e.what());
    }
  }

  double real(std::string_view s) const {
    try {
      return parse_double(s);
    } catch (const ValidationError& e) {
      fail(e.what());
    }
  }

  std::vector<double> probs(std::span<const std::string_view> fields, std::size_t m) const {
    if (fields.size() != m) fail("expected " + std::to_string(m) + " probabilities");
    std::vector<double> p;
    p.reserve(m);
    for (auto f : fields) p.push_back(real(f));
    return p;
  }

  std::vector<Count> sparse_counts(std::span<const std::string_view> fields, std::size_t m) const {
    std::vector<Count> counts(m, 0);
    for (auto f : fields) {
      const auto colon = f.find(':');
      if (colon == std::string_view::npos) fail("expected tag:count");
      const auto t = number<std::size_t>(f.substr(0, colon));
      if (t >= m) fail("tag index out of range");
      counts[t] = number<Count>(f.substr(colon + 1));
    }
    return counts;
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

}  // namespace detail

inline void write_model(std::ostream& out, const Model& m) {
  const auto& meta = m.meta;
  out << kModelMagic << '\t' << kModelVersion << '\n';
  out << "[metadata]\n";
  out << "order\t" << meta.order << '\n';
  out << "smoothing\t" << to_string(meta.smoothing) << '\n';
  out << "root_mode\t" << to_string(meta.root_mode) << '\n';
  out << "sigma_scale\t" << format_double(meta.sigma_scale) << '\n';
  out << "rare_threshold\t" << meta.policy.frequency_threshold << '\n';
  out << "max_suffix\t" << meta.policy.max_suffix_length << '\n';
  out << "unknown_mode\t" << to_string(meta.unknown_mode) << '\n';
  out << "lambdas";
  for (double l : meta.lambdas) out << '\t' << format_double(l);
  out << '\n';
  out << "corpus_digest\t" << std::hex << meta.corpus_digest << std::dec << '\n';
  out << "training_tokens\t" << meta.training_tokens << '\n';

  out << "[tags]\t" << m.tag_set.size() << '\n';
  for (const auto& t : m.tag_set.symbols()) out << t << '\n';

  out << "[unigram]\n";
  detail::write_probs(out, m.unigram().probs());
  out << '\n';

  std::size_t num_contexts = 0;
  for (std::size_t len = 1; len < m.transition.order(); ++len) num_contexts += m.transition.level(len).size();
  out << "[transitions]\t" << num_contexts << '\n';
  for (std::size_t len = 1; len < m.transition.order(); ++len) {
    for (const auto& [ctx, dist] : m.transition.level(len)) {
      for (std::size_t i = 0; i < ctx.size(); ++i) out << (i ? "," : "") << ctx[i];
      out << '\t';
      detail::write_probs(out, dist.probs());
      out << '\n';
    }
  }

  out << "[lexicon]\t" << m.lexicon.size() << '\n';
  for (const auto& [word, e] : m.lexicon.entries()) {
    out << word;
    detail::write_sparse_counts(out, e.outcomes);
    out << '\n';
  }

  const auto& trie = m.unknown.trie();
  out << "[suffix_trie]\t" << trie.size() << '\n';
  for (const auto& node : trie.nodes()) {
    out << node.parent << '\t' << static_cast<std::uint32_t>(node.letter);
    detail::write_sparse_counts(out, node.counts);
    out << '\n';
  }

  out << "[unknown_root]\n";
  detail::write_probs(out, m.unknown.root().probs());
  out << "\n[end]\n";
}

inline std::string model_to_string(const Model& m) {
  std::ostringstream out;
  write_model(out, m);
  return out.str();
}

inline Model read_model(std::istream& in) {
  detail::LineReader r(in);
  {
    const auto header = r.next();
    const auto f = split(header, '\t');
    if (f.size() != 2 || f[0] != kModelMagic) r.fail("not a model file (missing SUCCABS header)");
    const int version = r.number<int>(f[1]);
    if (version != kModelVersion)
      throw ValidationError("unsupported model format version " + std::to_string(version) + " (expected " +
                            std::to_string(kModelVersion) + ")");
  }

  ModelMetadata meta;
  r.section("metadata");
  const auto expect = [&r](std::string_view key) {
    const auto line = r.next();
    auto f = split(line, '\t');
    if (f[0] != key) r.fail("expected metadata key '" + std::string(key) + "'");
    return std::pair{line, f.size()};
  };
  const auto value = [&](std::string_view key) {
    auto [line, n] = expect(key);
    if (n != 2) r.fail("metadata key '" + std::string(key) + "' needs one value");
    return line.substr(key.size() + 1);
  };
  try {
    meta.order = r.number<std::size_t>(value("order"));
    meta.smoothing = parse_smoothing_kind(value("smoothing"));
    meta.root_mode = parse_root_mode(value("root_mode"));
    meta.sigma_scale = r.real(value("sigma_scale"));
    meta.policy.frequency_threshold = r.number<Count>(value("rare_threshold"));
    meta.policy.max_suffix_length = r.number<std::size_t>(value("max_suffix"));
    meta.unknown_mode = parse_unknown_word_mode(value("unknown_mode"));
    {
      auto [line, n] = expect("lambdas");
      const auto f = split(line, '\t');
      for (std::size_t i = 1; i < f.size(); ++i) meta.lambdas.push_back(r.real(f[i]));
    }
    const auto digest = value("corpus_digest");
    std::uint64_t d = 0;
    auto res = std::from_chars(digest.data(), digest.data() + digest.size(), d, 16);
    if (res.ec != std::errc{} || res.ptr != digest.data() + digest.size()) r.fail("bad corpus digest");
    meta.corpus_digest = d;
    meta.training_tokens = r.number<std::uint64_t>(value("training_tokens"));
  } catch (const ValidationError& e) {
    r.fail(e.what());
  }
  if (meta.order < 1) r.fail("order must be at least 1");

  const std::size_t m = r.section("tags");
  std::vector<std::string> symbols;
  for (std::size_t i = 0; i < m; ++i) symbols.push_back(r.next());
  Model model;
  model.tag_set = TagSet(std::move(symbols));

  r.section("unigram");
  {
    const auto line = r.next();
    model.transition = SmoothedNGramModel(meta.order, ConditionalDistribution(r.probs(split(line, '\t'), m)));
  }

  const std::size_t num_contexts = r.section("transitions");
  for (std::size_t i = 0; i < num_contexts; ++i) {
    const auto line = r.next();
    const auto f = split(line, '\t');
    Context ctx;
    for (auto c : split(f[0], ',')) {
      const auto t = r.number<TagId>(c);
      if (t < kBoundary || t >= static_cast<TagId>(m)) r.fail("context tag out of range");
      ctx.push_back(t);
    }
    if (ctx.empty() || ctx.size() >= meta.order) r.fail("context length out of range");
    model.transition.set(ctx, ConditionalDistribution(r.probs(std::span(f).subspan(1), m)));
  }

  const std::size_t num_words = r.section("lexicon");
  model.lexicon = Lexicon(m);
  for (std::size_t i = 0; i < num_words; ++i) {
    const auto line = r.next();
    const auto f = split(line, '\t');
    if (f[0].empty()) r.fail("empty word in lexicon");
    const auto counts = r.sparse_counts(std::span(f).subspan(1), m);
    for (std::size_t t = 0; t < m; ++t)
      if (counts[t] > 0) model.lexicon.add(std::string(f[0]), static_cast<TagId>(t), counts[t]);
  }

  const std::size_t num_nodes = r.section("suffix_trie");
  if (num_nodes == 0) r.fail("suffix trie needs a root node");
  SuffixTrie trie(m);
  for (std::size_t i = 0; i < num_nodes; ++i) {
    const auto line = r.next();
    const auto f = split(line, '\t');
    if (f.size() < 2) r.fail("bad suffix trie node");
    const auto parent = r.number<SuffixTrie::NodeId>(f[0]);
    const auto letter = static_cast<char32_t>(r.number<std::uint32_t>(f[1]));
    auto counts = r.sparse_counts(std::span(f).subspan(2), m);
    if (i == 0) {
      trie.set_root_counts(std::move(counts));
    } else {
      if (parent >= i) r.fail("suffix trie nodes must follow their parent");
      trie.add_node(parent, letter, std::move(counts));
    }
  }

  r.section("unknown_root");
  {
    const auto line = r.next();
    model.unknown = UnknownWordModel(std::move(trie), ConditionalDistribution(r.probs(split(line, '\t'), m)),
                                     meta.policy, meta.sigma_scale);
  }
  r.section("end");
  model.meta = std::move(meta);
  return model;
}

inline Model model_from_string(const std::string& text) {
  std::istringstream in(text);
  return read_model(in);
}

}  // namespace succabs
