#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "succabs/corpus.hpp"
#include "succabs/counts.hpp"
#include "succabs/error.hpp"

namespace succabs {

inline const double kSqrt12 = std::sqrt(12.0);

// Tolerance on the total mass of a stored probability vector.
inline constexpr double kSumTolerance = 1e-9;

/// Entropy in nats, -sum p ln p with 0 ln 0 = 0.
///
/// Rejects negative entries and vectors whose sum is more than 1e-6 away from
/// one.
inline double entropy(std::span<const double> p) {
  double sum = 0.0;
  double h = 0.0;
  for (double x : p) {
    if (x < 0.0 || std::isnan(x)) throw ValidationError("probability entry is negative or NaN");
    sum += x;
    if (x > 0.0) h -= x * std::log(x);
  }
  if (std::abs(sum - 1.0) > 1e-6) throw ValidationError("probabilities do not sum to one");
  return std::max(h, 0.0);
}

// A normalized probability vector over the tag set with its entropy cached.
class ConditionalDistribution {
 public:
  ConditionalDistribution() = default;

  explicit ConditionalDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    double sum = 0.0;
    for (double x : probs_) {
      if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("probability entry outside [0, 1]");
      sum += x;
    }
    if (std::abs(sum - 1.0) > kSumTolerance)
      throw ValidationError("distribution sums to " + format_double(sum) + ", not 1");
    entropy_ = entropy(probs_);
  }

  static ConditionalDistribution uniform(std::size_t n) {
    return ConditionalDistribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  const std::vector<double>& probs() const noexcept { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::size_t size() const noexcept { return probs_.size(); }
  double entropy_nats() const noexcept { return entropy_; }

  friend bool operator==(const ConditionalDistribution& a, const ConditionalDistribution& b) {
    return a.probs_ == b.probs_;
  }

 private:
  std::vector<double> probs_;
  double entropy_ = 0.0;
};

inline std::vector<double> relative_frequencies(std::span<const Count> counts) {
  Count total = 0;
  for (Count c : counts) total += c;
  std::vector<double> f(counts.size(), 0.0);
  if (total == 0) return f;
  for (std::size_t i = 0; i < counts.size(); ++i)
    f[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  return f;
}

/// Inverse standard deviation used to weigh the relative frequencies of a
/// context against the estimate of its generalization:
///
///   sigma^-1 = sqrt(12) * sqrt(count) * exp(-parent_entropy)
///
/// e^H is the size of the uniform distribution with the same entropy as the
/// parent estimate, whose standard deviation is that size over sqrt(12), and
/// averaging `count` observations shrinks it by sqrt(count). `scale` multiplies
/// the per-observation factor sqrt(12) e^-H; 1 is the unmodified weighting.
inline double sigma_inverse(Count context_count, double parent_entropy, double scale = 1.0) {
  if (parent_entropy < 0.0) throw ValidationError("entropy must be nonnegative");
  if (context_count == 0) return 0.0;
  return scale * kSqrt12 * std::sqrt(static_cast<double>(context_count)) * std::exp(-parent_entropy);
}

namespace detail {

inline ConditionalDistribution blend(std::span<const double> f, std::span<const double> backoff, double sigma_inv) {
  std::vector<double> out(f.size());
  const double denom = sigma_inv + 1.0;
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = (sigma_inv * f[i] + backoff[i]) / denom;
  return ConditionalDistribution(std::move(out));
}

inline void check_frequencies(std::span<const double> f, Count count) {
  double sum = 0.0;
  for (double x : f) {
    if (x < 0.0) throw ValidationError("negative relative frequency");
    sum += x;
  }
  if (count > 0 && std::abs(sum - 1.0) > kSumTolerance)
    throw ValidationError("relative frequencies of an observed context must sum to one");
  if (count == 0 && sum != 0.0) throw ValidationError("an unobserved context must have zero frequencies");
}

}  // namespace detail

/// One step of successive abstraction: blends the relative frequencies `f` of
/// a context seen `context_count` times with the estimate for its one-step
/// generalization,
///
///   P(x|C_k) = (sigma^-1 f(x|C_k) + P(x|C_{k-1})) / (sigma^-1 + 1).
///
/// An unobserved context returns the parent estimate unchanged.
inline ConditionalDistribution smooth_step(std::span<const double> f, const ConditionalDistribution& parent,
                                           Count context_count, double sigma_scale = 1.0) {
  if (f.size() != parent.size()) throw ValidationError("dimension mismatch between frequencies and parent");
  detail::check_frequencies(f, context_count);
  if (context_count == 0) return parent;
  const double s = sigma_inverse(context_count, parent.entropy_nats(), sigma_scale);
  return detail::blend(f, parent.probs(), s);
}

struct ChainLevel {
  std::vector<double> freqs;
  Count count = 0;
};

// Folds smooth_step along a chain of contexts ordered from most general to
// most specific; element k of the result is the estimate for chain[k].
inline std::vector<ConditionalDistribution> smooth_linear_chain(std::span<const ChainLevel> chain,
                                                                const ConditionalDistribution& root,
                                                                double sigma_scale = 1.0) {
  std::vector<ConditionalDistribution> out;
  out.reserve(chain.size());
  const ConditionalDistribution* prev = &root;
  for (const auto& level : chain) {
    out.push_back(smooth_step(level.freqs, *prev, level.count, sigma_scale));
    prev = &out.back();
  }
  return out;
}

/// Partial successive abstraction: the context has several one-step
/// generalizations. The back-off term is their unweighted mean, and sigma^-1
/// is taken from the most concentrated parent (smallest entropy, i.e. the
/// smallest per-observation standard deviation).
inline ConditionalDistribution smooth_partial(std::span<const double> f, Count count,
                                              std::span<const ConditionalDistribution> parents,
                                              double sigma_scale = 1.0) {
  if (parents.empty()) throw ValidationError("partial abstraction needs at least one parent");
  const std::size_t dim = f.size();
  for (const auto& p : parents)
    if (p.size() != dim) throw ValidationError("dimension mismatch between frequencies and parent");
  detail::check_frequencies(f, count);

  std::vector<double> mean(dim, 0.0);
  double h_min = std::numeric_limits<double>::infinity();
  for (const auto& p : parents) {
    for (std::size_t i = 0; i < dim; ++i) mean[i] += p[i];
    h_min = std::min(h_min, p.entropy_nats());
  }
  const double m = static_cast<double>(parents.size());
  for (double& x : mean) x /= m;
  if (count == 0) return ConditionalDistribution(std::move(mean));
  return detail::blend(f, mean, sigma_inverse(count, h_min, sigma_scale));
}

// A node of a generalization DAG. Parents are the one-step generalizations of
// the node's context; exactly one node (the "no information" root) has none.
struct GeneralizationNode {
  std::vector<std::size_t> parents;
  Count count = 0;
  std::vector<double> freqs;
};

struct GeneralizationDag {
  std::vector<GeneralizationNode> nodes;
  ConditionalDistribution root_distribution;
};

namespace detail {

inline std::size_t dag_root(const GeneralizationDag& dag) {
  std::optional<std::size_t> root;
  for (std::size_t i = 0; i < dag.nodes.size(); ++i) {
    for (std::size_t p : dag.nodes[i].parents)
      if (p >= dag.nodes.size() || p == i) throw ValidationError("invalid parent index in generalization DAG");
    if (dag.nodes[i].parents.empty()) {
      if (root) throw ValidationError("generalization DAG has more than one root");
      root = i;
    }
  }
  if (!root) throw ValidationError("generalization DAG has no root (cycle detected)");
  return *root;
}

}  // namespace detail

// Kahn's algorithm, always releasing the smallest ready index first.
inline std::vector<std::size_t> topological_order(const GeneralizationDag& dag) {
  detail::dag_root(dag);
  const std::size_t n = dag.nodes.size();
  std::vector<std::size_t> pending(n);
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t i = 0; i < n; ++i) {
    pending[i] = dag.nodes[i].parents.size();
    for (std::size_t p : dag.nodes[i].parents) children[p].push_back(i);
  }
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (pending[i] == 0) ready.push_back(i);
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    auto it = std::min_element(ready.begin(), ready.end());
    const std::size_t v = *it;
    ready.erase(it);
    order.push_back(v);
    for (std::size_t c : children[v])
      if (--pending[c] == 0) ready.push_back(c);
  }
  if (order.size() != n) throw ValidationError("cycle detected in generalization DAG");
  return order;
}

/// Estimates every node of a generalization DAG, visiting nodes in `order`,
/// which must list each node once with parents before children. Single-parent
/// nodes use smooth_step, the others smooth_partial; the root takes
/// dag.root_distribution.
inline std::vector<ConditionalDistribution> smooth_dag(const GeneralizationDag& dag,
                                                       std::span<const std::size_t> order,
                                                       double sigma_scale = 1.0) {
  const std::size_t root = detail::dag_root(dag);
  const std::size_t n = dag.nodes.size();
  if (order.size() != n) throw ValidationError("evaluation order must list every node once");
  std::vector<std::optional<ConditionalDistribution>> done(n);
  for (std::size_t v : order) {
    if (v >= n || done[v]) throw ValidationError("evaluation order must list every node once");
    const auto& node = dag.nodes[v];
    if (v == root) {
      done[v] = dag.root_distribution;
      continue;
    }
    std::vector<ConditionalDistribution> parents;
    parents.reserve(node.parents.size());
    for (std::size_t p : node.parents) {
      if (!done[p]) throw ValidationError("evaluation order visits a node before its parent (cycle detected?)");
      parents.push_back(*done[p]);
    }
    done[v] = parents.size() == 1 ? smooth_step(node.freqs, parents.front(), node.count, sigma_scale)
                                  : smooth_partial(node.freqs, node.count, parents, sigma_scale);
  }
  std::vector<ConditionalDistribution> out;
  out.reserve(n);
  for (auto& d : done) out.push_back(std::move(*d));
  return out;
}

inline std::vector<ConditionalDistribution> smooth_dag(const GeneralizationDag& dag, double sigma_scale = 1.0) {
  const auto order = topological_order(dag);
  return smooth_dag(dag, order, sigma_scale);
}

// Expected likelihood estimation: half a count added to every outcome.
inline ConditionalDistribution ele_estimate(std::span<const Count> counts) {
  if (counts.empty()) throw ValidationError("ELE needs at least one outcome");
  double total = 0.0;
  for (Count c : counts) total += static_cast<double>(c);
  const double denom = total + 0.5 * static_cast<double>(counts.size());
  std::vector<double> p(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) p[i] = (static_cast<double>(counts[i]) + 0.5) / denom;
  return ConditionalDistribution(std::move(p));
}

class InterpolationWeights {
 public:
  InterpolationWeights() = default;
  explicit InterpolationWeights(std::vector<double> lambdas) : lambdas_(std::move(lambdas)) {
    if (lambdas_.empty()) throw ValidationError("interpolation needs at least one weight");
    double sum = 0.0;
    for (double l : lambdas_) {
      if (!(l >= 0.0)) throw ValidationError("interpolation weights must be nonnegative");
      sum += l;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("interpolation weights must sum to one");
  }

  const std::vector<double>& values() const noexcept { return lambdas_; }
  std::size_t size() const noexcept { return lambdas_.size(); }
  double operator[](std::size_t i) const { return lambdas_[i]; }

  friend bool operator==(const InterpolationWeights&, const InterpolationWeights&) = default;

 private:
  std::vector<double> lambdas_;
};

/// Linear interpolation sum_j lambda_j f_j over relative-frequency vectors
/// ordered from the unigram up. A zero vector marks an unseen context; its
/// weight is dropped and the remaining weights are rescaled to sum to one.
inline ConditionalDistribution interpolate(std::span<const std::vector<double>> freqs_per_order,
                                           const InterpolationWeights& lambdas) {
  if (freqs_per_order.size() != lambdas.size())
    throw ValidationError("need one interpolation weight per order");
  if (freqs_per_order.empty()) throw ValidationError("nothing to interpolate");
  const std::size_t dim = freqs_per_order.front().size();
  std::vector<double> out(dim, 0.0);
  double mass = 0.0;
  for (std::size_t j = 0; j < freqs_per_order.size(); ++j) {
    const auto& f = freqs_per_order[j];
    if (f.size() != dim) throw ValidationError("dimension mismatch between interpolated orders");
    const bool seen = std::any_of(f.begin(), f.end(), [](double x) { return x != 0.0; });
    if (!seen) continue;
    mass += lambdas[j];
    for (std::size_t i = 0; i < dim; ++i) out[i] += lambdas[j] * f[i];
  }
  if (!(mass > 0.0)) throw ValidationError("all interpolation weight falls on unseen contexts");
  if (mass != 1.0)
    for (double& x : out) x /= mass;
  return ConditionalDistribution(std::move(out));
}

// All weight vectors with `num_orders` entries that are multiples of `step`
// and sum to one, in lexicographic order of their integer numerators.
inline std::vector<InterpolationWeights> simplex_grid(std::size_t num_orders, double step) {
  if (num_orders == 0) throw ValidationError("need at least one order");
  if (!(step > 0.0 && step <= 1.0)) throw ValidationError("grid step must lie in (0, 1]");
  const double units_real = 1.0 / step;
  const auto units = static_cast<std::size_t>(std::llround(units_real));
  if (units == 0 || std::abs(units_real - static_cast<double>(units)) > 1e-9)
    throw ValidationError("grid step must divide 1");

  std::vector<InterpolationWeights> out;
  std::vector<std::size_t> parts(num_orders, 0);
  const std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t left) {
    if (pos + 1 == num_orders) {
      parts[pos] = left;
      std::vector<double> l(num_orders);
      for (std::size_t j = 0; j < num_orders; ++j)
        l[j] = static_cast<double>(parts[j]) / static_cast<double>(units);
      out.emplace_back(std::move(l));
      return;
    }
    for (std::size_t k = 0; k <= left; ++k) {
      parts[pos] = k;
      rec(pos + 1, left - k);
    }
  };
  rec(0, units);
  return out;
}

struct GridSearchResult {
  InterpolationWeights best;
  double objective = -std::numeric_limits<double>::infinity();
  std::size_t evaluated = 0;
};

// Exhaustive search over simplex_grid for the weights maximizing `objective`;
// ties go to the lexicographically largest weight vector.
template <typename Objective>
GridSearchResult grid_search_lambdas(std::size_t num_orders, double step, Objective&& objective) {
  GridSearchResult result;
  bool have = false;
  for (const auto& w : simplex_grid(num_orders, step)) {
    const double score = objective(w);
    ++result.evaluated;
    if (!have || score > result.objective ||
        (score == result.objective && w.values() > result.best.values())) {
      result.best = w;
      result.objective = score;
      have = true;
    }
  }
  return result;
}

enum class RootMode { relative_frequency, ele };

inline std::string to_string(RootMode m) { return m == RootMode::ele ? "ele" : "rf"; }

inline RootMode parse_root_mode(std::string_view s) {
  if (s == "rf") return RootMode::relative_frequency;
  if (s == "ele") return RootMode::ele;
  throw ValidationError("unknown root mode '" + std::string(s) + "' (expected rf or ele)");
}

inline ConditionalDistribution root_distribution(std::span<const Count> counts, RootMode mode) {
  if (mode == RootMode::ele) return ele_estimate(counts);
  Count total = 0;
  for (Count c : counts) total += c;
  if (total == 0) throw ValidationError("cannot take relative frequencies of an empty sample");
  return ConditionalDistribution(relative_frequencies(counts));
}

// Transition distributions per observed context. A query for an unobserved
// context resolves to its longest observed generalization (oldest tags
// stripped first), ending at the root.
class SmoothedNGramModel {
 public:
  SmoothedNGramModel() = default;
  SmoothedNGramModel(std::size_t order, ConditionalDistribution root)
      : order_(order), root_(std::move(root)), levels_(order > 0 ? order - 1 : 0) {
    if (order < 1) throw ValidationError("n-gram order must be at least 1");
  }

  std::size_t order() const noexcept { return order_; }
  std::size_t num_tags() const noexcept { return root_.size(); }
  const ConditionalDistribution& root() const noexcept { return root_; }

  void set(const Context& context, ConditionalDistribution dist) {
    if (context.empty() || context.size() >= order_) throw ValidationError("context length out of range");
    if (dist.size() != root_.size()) throw ValidationError("dimension mismatch in stored distribution");
    levels_[context.size() - 1].insert_or_assign(context, std::move(dist));
  }

  // Stored contexts of length L >= 1.
  const std::map<Context, ConditionalDistribution>& level(std::size_t context_length) const {
    return levels_.at(context_length - 1);
  }

  const ConditionalDistribution* find_exact(std::span<const TagId> context) const {
    if (context.empty()) return &root_;
    if (context.size() >= order_) return nullptr;
    const auto& lvl = levels_[context.size() - 1];
    auto it = lvl.find(Context(context.begin(), context.end()));
    return it == lvl.end() ? nullptr : &it->second;
  }

  const ConditionalDistribution& distribution(std::span<const TagId> context) const {
    if (context.size() >= order_) context = context.subspan(context.size() - (order_ - 1));
    while (!context.empty()) {
      if (const auto* d = find_exact(context)) return *d;
      context = context.subspan(1);
    }
    return root_;
  }

  friend bool operator==(const SmoothedNGramModel&, const SmoothedNGramModel&) = default;

 private:
  std::size_t order_ = 0;
  ConditionalDistribution root_;
  std::vector<std::map<Context, ConditionalDistribution>> levels_;
};

/// Successive-abstraction n-gram model: each observed context (T_{k-j}, ...,
/// T_{k-1}) is smoothed against the estimate for (T_{k-j+1}, ..., T_{k-1}),
/// so the chain runs from the root up by re-attaching one older tag at a time.
inline SmoothedNGramModel build_sa_ngram_model(const NGramCountTable& counts, RootMode root_mode,
                                               double sigma_scale = 1.0) {
  SmoothedNGramModel model(counts.order(), root_distribution(counts.lookup({}).outcomes, root_mode));
  for (std::size_t len = 1; len < counts.order(); ++len) {
    for (const auto& [ctx, oc] : counts.level(len)) {
      const auto* parent = model.find_exact(std::span<const TagId>(ctx).subspan(1));
      if (parent == nullptr) throw ValidationError("count table is missing a generalized context");
      model.set(ctx, smooth_step(relative_frequencies(oc.outcomes), *parent, oc.total, sigma_scale));
    }
  }
  return model;
}

// Context-independent linear interpolation of relative frequencies. The
// unigram term is the root distribution. A context of length L stands in for
// longer unseen contexts, so it interpolates orders 1..L+1 with the weights
// renormalized over those orders; when they carry no weight it falls back to
// its own generalization.
inline SmoothedNGramModel build_interpolated_ngram_model(const NGramCountTable& counts,
                                                         const InterpolationWeights& lambdas,
                                                         RootMode root_mode) {
  if (lambdas.size() != counts.order())
    throw ValidationError("need " + std::to_string(counts.order()) + " interpolation weights, got " +
                          std::to_string(lambdas.size()));
  SmoothedNGramModel model(counts.order(), root_distribution(counts.lookup({}).outcomes, root_mode));
  for (std::size_t len = 1; len < counts.order(); ++len) {
    std::vector<double> w(lambdas.values().begin(), lambdas.values().begin() + static_cast<long>(len) + 1);
    const double mass = std::accumulate(w.begin(), w.end(), 0.0);
    std::optional<InterpolationWeights> level_weights;
    if (mass > 0.0) {
      for (double& x : w) x /= mass;
      level_weights.emplace(std::move(w));
    }
    for (const auto& [ctx, oc] : counts.level(len)) {
      std::span<const TagId> full(ctx);
      if (!level_weights) {
        model.set(ctx, model.distribution(full.subspan(1)));
        continue;
      }
      std::vector<std::vector<double>> freqs;
      freqs.push_back(model.root().probs());
      for (std::size_t l = 1; l <= len; ++l) {
        const auto* e = counts.find(full.subspan(len - l));
        if (e == nullptr) throw ValidationError("count table is missing a generalized context");
        freqs.push_back(relative_frequencies(e->outcomes));
      }
      model.set(ctx, interpolate(freqs, *level_weights));
    }
  }
  return model;
}

// Half-count smoothing of each observed context on its own.
inline SmoothedNGramModel build_ele_ngram_model(const NGramCountTable& counts, RootMode root_mode) {
  SmoothedNGramModel model(counts.order(), root_distribution(counts.lookup({}).outcomes, root_mode));
  for (std::size_t len = 1; len < counts.order(); ++len)
    for (const auto& [ctx, oc] : counts.level(len)) model.set(ctx, ele_estimate(oc.outcomes));
  return model;
}

// Natural-log likelihood of the tag sequences of a corpus under a transition
// model (contexts padded with the boundary pseudo-tag).
inline double held_out_log_likelihood(const SmoothedNGramModel& model, const Corpus& c) {
  double ll = 0.0;
  const std::size_t h = model.order() - 1;
  std::vector<TagId> history;
  for (const auto& s : c.sentences) {
    history.assign(h, kBoundary);
    for (const auto& tok : s) {
      ll += std::log(model.distribution(history)[static_cast<std::size_t>(tok.tag)]);
      if (h > 0) {
        history.erase(history.begin());
        history.push_back(tok.tag);
      }
    }
  }
  return ll;
}

}  // namespace succabs
