#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "succabs/corpus.hpp"
#include "succabs/error.hpp"

namespace succabs {

struct EvalReport {
  std::uint64_t total_tokens = 0;
  std::uint64_t errors = 0;
  double error_rate = 0.0;
  std::uint64_t unknown_tokens = 0;
  std::uint64_t unknown_errors = 0;
  double unknown_error_rate = 0.0;
  double unknown_fraction = 0.0;
  // confusion[gold][predicted]
  std::vector<std::vector<std::uint64_t>> confusion;
};

template <typename KnownWords>
concept WordSet = requires(const KnownWords& k, const std::string& w) {
  { k.contains(w) } -> std::convertible_to<bool>;
};

// Token-level exact match; a token is unknown when its word is not in
// known_words.
template <WordSet KnownWords>
EvalReport evaluate(const Corpus& gold, std::span<const std::vector<TagId>> predicted, const KnownWords& known_words) {
  if (predicted.size() != gold.sentences.size()) throw ValidationError("prediction and gold differ in sentence count");
  const std::size_t m = gold.tag_set.size();
  EvalReport r;
  r.confusion.assign(m, std::vector<std::uint64_t>(m, 0));
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& g = gold.sentences[i];
    const auto& p = predicted[i];
    if (g.size() != p.size()) throw ValidationError("prediction and gold differ in length at sentence " + std::to_string(i));
    for (std::size_t k = 0; k < g.size(); ++k) {
      const TagId pred = p[k];
      if (pred < 0 || static_cast<std::size_t>(pred) >= m) throw ValidationError("predicted tag index out of range");
      const bool wrong = pred != g[k].tag;
      const bool unknown = !known_words.contains(g[k].word);
      ++r.total_tokens;
      r.errors += wrong;
      r.unknown_tokens += unknown;
      r.unknown_errors += wrong && unknown;
      ++r.confusion[static_cast<std::size_t>(g[k].tag)][static_cast<std::size_t>(pred)];
    }
  }
  if (r.total_tokens > 0) {
    r.error_rate = static_cast<double>(r.errors) / static_cast<double>(r.total_tokens);
    r.unknown_fraction = static_cast<double>(r.unknown_tokens) / static_cast<double>(r.total_tokens);
  }
  if (r.unknown_tokens > 0)
    r.unknown_error_rate = static_cast<double>(r.unknown_errors) / static_cast<double>(r.unknown_tokens);
  return r;
}

// Critical values of the two-sided normal test at the 10% and 5% levels.
inline constexpr double kZ10 = 1.645;
inline constexpr double kZ5 = 1.96;

/// Smallest difference in error rate that is significant for an error rate p
/// measured on n tokens: z * sqrt(p (1 - p) / n), the normal approximation to
/// the binomial standard error. At p in {0.04, 0.05} and n = 10000 this gives
/// 0.38-0.43% for z = 1.96 and 0.32-0.36% for z = 1.645.
inline double significance_threshold(double error_rate, double sample_size, double z) {
  if (!(error_rate > 0.0 && error_rate < 1.0)) throw ValidationError("error rate must lie in (0, 1)");
  if (!(sample_size > 0.0)) throw ValidationError("sample size must be positive");
  if (!(z > 0.0)) throw ValidationError("critical value must be positive");
  return z * std::sqrt(error_rate * (1.0 - error_rate) / sample_size);
}

struct PairComparison {
  std::size_t a = 0;
  std::size_t b = 0;
  double difference = 0.0;  // rate(a) - rate(b)
  double threshold10 = 0.0;
  double threshold5 = 0.0;
  bool significant10 = false;
  bool significant5 = false;
};

struct Comparison {
  std::vector<std::pair<std::string, EvalReport>> systems;
  double sample_size = 0.0;
  std::vector<PairComparison> pairs;
};

/// Pairwise error-rate differences. The threshold for a pair uses the mean
/// of its two error rates as p; a difference is significant when its
/// magnitude strictly exceeds the threshold.
inline Comparison compare(std::vector<std::pair<std::string, EvalReport>> reports, double sample_size) {
  if (reports.size() < 2) throw ValidationError("comparison needs at least two systems");
  for (const auto& [name, r] : reports)
    if (r.total_tokens != reports.front().second.total_tokens ||
        r.unknown_tokens != reports.front().second.unknown_tokens)
      throw ValidationError("system '" + name + "' was evaluated on a different test set");
  Comparison c;
  c.sample_size = sample_size;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (std::size_t j = i + 1; j < reports.size(); ++j) {
      const double ra = reports[i].second.error_rate;
      const double rb = reports[j].second.error_rate;
      PairComparison p;
      p.a = i;
      p.b = j;
      p.difference = ra - rb;
      const double pooled = 0.5 * (ra + rb);
      if (pooled > 0.0 && pooled < 1.0) {
        p.threshold10 = significance_threshold(pooled, sample_size, kZ10);
        p.threshold5 = significance_threshold(pooled, sample_size, kZ5);
        p.significant10 = std::abs(p.difference) > p.threshold10;
        p.significant5 = std::abs(p.difference) > p.threshold5;
      }
      c.pairs.push_back(p);
    }
  }
  c.systems = std::move(reports);
  return c;
}

namespace detail {

inline std::string percent(double x, int decimals) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(decimals) << 100.0 * x;
  return s.str();
}

}  // namespace detail

// Plain-text table, one column per system.
inline void render_table(std::ostream& out, const std::vector<std::pair<std::string, EvalReport>>& systems) {
  constexpr int kLabel = 24;
  constexpr int kCol = 12;
  const auto row = [&](const std::string& label, auto&& cell) {
    out << std::left << std::setw(kLabel) << label << std::right;
    for (const auto& [name, r] : systems) out << std::setw(kCol) << cell(name, r);
    out << '\n';
  };
  row("Tagger", [](const std::string& name, const EvalReport&) { return name; });
  row("Error rate (%)", [](const std::string&, const EvalReport& r) { return detail::percent(r.error_rate, 2); });
  row("- unknown words", [](const std::string&, const EvalReport& r) {
    return detail::percent(r.total_tokens ? static_cast<double>(r.unknown_errors) / static_cast<double>(r.total_tokens) : 0.0, 2);
  });
  row("Unknown words (%)", [](const std::string&, const EvalReport& r) { return detail::percent(r.unknown_fraction, 2); });
  row("Unknown error rate (%)", [](const std::string&, const EvalReport& r) { return detail::percent(r.unknown_error_rate, 1); });
  row("Tokens", [](const std::string&, const EvalReport& r) { return std::to_string(r.total_tokens); });
}

// One "name<TAB>value" line per metric, plus confusion cells as
// "confusion<TAB>gold<TAB>predicted<TAB>count" for nonzero off-diagonal cells.
inline void render_kv(std::ostream& out, const EvalReport& r, const TagSet& tags, const std::string& prefix = "") {
  out << prefix << "total_tokens\t" << r.total_tokens << '\n';
  out << prefix << "errors\t" << r.errors << '\n';
  out << prefix << "error_rate\t" << format_double(r.error_rate) << '\n';
  out << prefix << "unknown_tokens\t" << r.unknown_tokens << '\n';
  out << prefix << "unknown_errors\t" << r.unknown_errors << '\n';
  out << prefix << "unknown_error_rate\t" << format_double(r.unknown_error_rate) << '\n';
  out << prefix << "unknown_fraction\t" << format_double(r.unknown_fraction) << '\n';
  for (std::size_t g = 0; g < r.confusion.size(); ++g)
    for (std::size_t p = 0; p < r.confusion[g].size(); ++p)
      if (g != p && r.confusion[g][p] > 0)
        out << prefix << "confusion\t" << tags.symbol(static_cast<TagId>(g)) << '\t'
            << tags.symbol(static_cast<TagId>(p)) << '\t' << r.confusion[g][p] << '\n';
}

inline void render_comparison(std::ostream& out, const Comparison& c) {
  render_table(out, c.systems);
  out << '\n'
      << "Pairwise differences (n = " << static_cast<std::uint64_t>(c.sample_size)
      << "; threshold z*sqrt(p(1-p)/n), p = mean of the two error rates)\n";
  for (const auto& p : c.pairs) {
    out << "  " << c.systems[p.a].first << " - " << c.systems[p.b].first << ": "
        << detail::percent(p.difference, 2) << "%"
        << "  [10%: thr " << detail::percent(p.threshold10, 2) << "% " << (p.significant10 ? "significant" : "not significant")
        << "]  [5%: thr " << detail::percent(p.threshold5, 2) << "% " << (p.significant5 ? "significant" : "not significant")
        << "]\n";
  }
}

inline void render_comparison_kv(std::ostream& out, const Comparison& c) {
  for (const auto& [name, r] : c.systems) out << name << ".error_rate\t" << format_double(r.error_rate) << '\n';
  for (const auto& p : c.pairs) {
    const std::string key = c.systems[p.a].first + "-" + c.systems[p.b].first;
    out << key << ".difference\t" << format_double(p.difference) << '\n';
    out << key << ".significant_10\t" << (p.significant10 ? 1 : 0) << '\n';
    out << key << ".significant_5\t" << (p.significant5 ? 1 : 0) << '\n';
  }
}

}  // namespace succabs
