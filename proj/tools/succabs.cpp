// succabs: train, apply and evaluate successive-abstraction trigram taggers.
//
// Exit codes: 0 success, 1 usage error, 2 data or validation error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "succabs/succabs.hpp"

namespace {

using namespace succabs;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Flag values that parse but make no sense together.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  return out;
}

Corpus read_corpus(const std::string& path, const std::optional<std::vector<std::string>>& tags = std::nullopt) {
  auto in = open_input(path);
  return parse_corpus(in, tags);
}

Model load_model(const std::string& path) {
  auto in = open_input(path);
  return read_model(in);
}

std::vector<std::string> read_tag_list(const std::string& path) {
  auto in = open_input(path);
  std::vector<std::string> tags;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() != '#') tags.push_back(line);
  }
  return tags;
}

InterpolationWeights parse_lambdas(const std::string& text) {
  try {
    std::vector<double> values;
    for (auto part : split(text, ',')) values.push_back(parse_double(part));
    return InterpolationWeights(std::move(values));
  } catch (const ValidationError& e) {
    throw UsageError(std::string("--lambdas: ") + e.what());
  }
}

struct TrainArgs {
  std::string corpus;
  std::string tags;
  std::size_t order = 3;
  Count rare_threshold = 10;
  std::size_t max_suffix = 10;
  std::string root_mode = "ele";
  double sigma_scale = 1.0;
  std::string smoothing = "sa";
  std::string lambdas;
  std::string unknown_words = "suffix";
  std::string tune_gold;
  double tune_step = 0.05;
  std::string tune_objective = "accuracy";
  std::string out;
};

int cmd_train(const TrainArgs& a) {
  TrainingOptions opt;
  opt.order = a.order;
  opt.policy = {a.rare_threshold, a.max_suffix};
  opt.root_mode = parse_root_mode(a.root_mode);
  opt.sigma_scale = a.sigma_scale;
  opt.smoothing = parse_smoothing_kind(a.smoothing);
  opt.unknown_mode = parse_unknown_word_mode(a.unknown_words);
  if (!a.lambdas.empty()) {
    if (opt.smoothing != SmoothingKind::interp) throw UsageError("--lambdas only applies to --smoothing interp");
    opt.lambdas = parse_lambdas(a.lambdas);
    if (opt.lambdas->size() != opt.order)
      throw UsageError("--lambdas needs one weight per order (" + std::to_string(opt.order) + ")");
  }
  if (!a.tune_gold.empty() && opt.smoothing != SmoothingKind::interp)
    throw UsageError("--tune-gold only applies to --smoothing interp");
  if (opt.smoothing == SmoothingKind::interp && !opt.lambdas && a.tune_gold.empty())
    throw UsageError("--smoothing interp needs --lambdas or --tune-gold");

  std::optional<std::vector<std::string>> declared;
  if (!a.tags.empty()) declared = read_tag_list(a.tags);
  const Corpus corpus = read_corpus(a.corpus, declared);

  Model model;
  if (!a.tune_gold.empty() && !opt.lambdas) {
    const Corpus held_out = read_corpus(a.tune_gold, corpus.tag_set.symbols());
    auto tuned = tune_interpolation(corpus, opt, held_out, a.tune_step, parse_tune_objective(a.tune_objective));
    std::cerr << "tuned lambdas:";
    for (double l : tuned.search.best.values()) std::cerr << ' ' << l;
    std::cerr << " (" << tuned.search.evaluated << " grid points, objective " << tuned.search.objective << ")\n";
    model = std::move(tuned.model);
  } else {
    model = train_model(corpus, opt);
  }
  auto out = open_output(a.out);
  write_model(out, model);
  return 0;
}

struct TagArgs {
  std::string model;
  std::string input;
  std::string output;
  bool open_lattice = false;
  unsigned threads = 1;
};

std::vector<std::vector<std::string>> read_plain_sentences(std::istream& in) {
  std::vector<std::vector<std::string>> sentences;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::vector<std::string> s;
    for (std::string w; words >> w;) s.push_back(w);
    if (!s.empty()) sentences.push_back(std::move(s));
  }
  return sentences;
}

int cmd_tag(const TagArgs& a) {
  const Model model = load_model(a.model);
  std::vector<std::vector<std::string>> sentences;
  if (a.input.empty() || a.input == "-") {
    sentences = read_plain_sentences(std::cin);
  } else {
    auto in = open_input(a.input);
    sentences = read_plain_sentences(in);
  }
  const auto tags = tag_corpus(model, sentences, {a.open_lattice}, a.threads);

  std::ofstream file;
  if (!a.output.empty() && a.output != "-") file = open_output(a.output);
  std::ostream& out = file.is_open() ? file : std::cout;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    for (std::size_t k = 0; k < sentences[i].size(); ++k)
      out << sentences[i][k] << '\t' << model.tag_set.symbol(tags[i][k]) << '\n';
    out << '\n';
  }
  return 0;
}

struct EvalArgs {
  std::vector<std::string> models;
  std::vector<std::string> names;
  std::string gold;
  std::string format = "table";
  bool open_lattice = false;
  unsigned threads = 1;
};

std::pair<EvalReport, TagSet> evaluate_model(const Model& model, const std::string& gold_path, const EvalArgs& a) {
  const Corpus gold = read_corpus(gold_path, model.tag_set.symbols());
  const auto words = gold.words();
  const auto predicted = tag_corpus(model, words, {a.open_lattice}, a.threads);
  return {evaluate(gold, predicted, model.lexicon), model.tag_set};
}

int cmd_eval(const EvalArgs& a) {
  const Model model = load_model(a.models.front());
  const auto [report, tags] = evaluate_model(model, a.gold, a);
  if (a.format == "kv") {
    render_kv(std::cout, report, tags);
  } else {
    render_table(std::cout, {{"model", report}});
  }
  return 0;
}

int cmd_compare(const EvalArgs& a) {
  if (a.models.size() < 2) throw UsageError("compare needs at least two --model flags");
  if (!a.names.empty() && a.names.size() != a.models.size())
    throw UsageError("give one --name per --model or none");
  std::vector<std::pair<std::string, EvalReport>> reports;
  for (std::size_t i = 0; i < a.models.size(); ++i) {
    const Model model = load_model(a.models[i]);
    std::string name = a.names.empty() ? "m" + std::to_string(i + 1) : a.names[i];
    reports.emplace_back(std::move(name), evaluate_model(model, a.gold, a).first);
  }
  const double n = static_cast<double>(reports.front().second.total_tokens);
  const auto table = compare(std::move(reports), n);
  if (a.format == "kv")
    render_comparison_kv(std::cout, table);
  else
    render_comparison(std::cout, table);
  return 0;
}

struct SynthArgs {
  SynthesisConfig cfg;
  std::string train_out;
  std::string test_out;
  std::string spec_out;
};

int cmd_synth(const SynthArgs& a) {
  const auto result = synthesize_corpus(a.cfg);
  {
    auto out = open_output(a.train_out);
    write_corpus(out, result.train);
  }
  {
    auto out = open_output(a.test_out);
    write_corpus(out, result.test);
  }
  if (!a.spec_out.empty()) {
    const auto& g = result.spec;
    nlohmann::ordered_json j;
    j["num_tags"] = a.cfg.num_tags;
    j["vocab_size"] = a.cfg.vocab_size;
    j["seed"] = a.cfg.seed;
    j["zipf_exponent"] = a.cfg.zipf_exponent;
    j["tags"] = g.tags;
    j["suffixes"] = g.suffixes;
    j["words"] = g.words;
    j["primary_tag"] = g.primary_tag;
    j["initial"] = g.initial;
    j["transition"] = g.transition;
    j["emission"] = g.emission;
    auto out = open_output(a.spec_out);
    out << j.dump(1) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Successive-abstraction smoothing and trigram part-of-speech tagging"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a tagger model from a token-per-line corpus");
  train_cmd->add_option("--corpus", train.corpus, "Training corpus (word<TAB>tag per line)")->required();
  train_cmd->add_option("--tags", train.tags, "File with the tag inventory, one symbol per line");
  train_cmd->add_option("--order", train.order, "N-gram order")->check(CLI::PositiveNumber);
  train_cmd->add_option("--rare-threshold", train.rare_threshold, "Words seen fewer times feed the suffix model")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--max-suffix", train.max_suffix, "Maximum suffix-trie depth")->check(CLI::PositiveNumber);
  train_cmd->add_option("--root-mode", train.root_mode, "Root distribution: rf or ele")
      ->check(CLI::IsMember({"rf", "ele"}));
  train_cmd->add_option("--sigma-scale", train.sigma_scale, "Multiplier on the inverse standard deviation")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--smoothing", train.smoothing, "Transition smoothing: sa, interp or ele")
      ->check(CLI::IsMember({"sa", "interp", "ele"}));
  train_cmd->add_option("--lambdas", train.lambdas, "Interpolation weights, unigram first, e.g. 0.1,0.3,0.6");
  train_cmd->add_option("--unknown-words", train.unknown_words, "Unknown-word model: suffix or root")
      ->check(CLI::IsMember({"suffix", "root"}));
  train_cmd->add_option("--tune-gold", train.tune_gold, "Grid-search interpolation weights against this corpus");
  train_cmd->add_option("--tune-step", train.tune_step, "Grid step for --tune-gold");
  train_cmd->add_option("--tune-objective", train.tune_objective, "accuracy or loglik")
      ->check(CLI::IsMember({"accuracy", "loglik"}));
  train_cmd->add_option("--out", train.out, "Model file to write")->required();

  TagArgs tag;
  auto* tag_cmd = app.add_subcommand("tag", "Tag plain text (one sentence per line, words separated by spaces)");
  tag_cmd->add_option("--model", tag.model, "Model file")->required();
  tag_cmd->add_option("--input", tag.input, "Input text (default: standard input)");
  tag_cmd->add_option("--output", tag.output, "Output corpus (default: standard output)");
  tag_cmd->add_flag("--open-lattice", tag.open_lattice, "Let known words take any tag");
  tag_cmd->add_option("--threads", tag.threads, "Worker threads")->check(CLI::PositiveNumber);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Tag a gold corpus and report error rates");
  eval_cmd->add_option("--model", eval.models, "Model file")->required()->expected(1);
  eval_cmd->add_option("--gold", eval.gold, "Gold corpus")->required();
  eval_cmd->add_option("--format", eval.format, "table or kv")->check(CLI::IsMember({"table", "kv"}));
  eval_cmd->add_flag("--open-lattice", eval.open_lattice, "Let known words take any tag");
  eval_cmd->add_option("--threads", eval.threads, "Worker threads")->check(CLI::PositiveNumber);

  EvalArgs cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Evaluate several models on one gold corpus with significance flags");
  cmp_cmd->add_option("--model", cmp.models, "Model file (repeat)")->required();
  cmp_cmd->add_option("--name", cmp.names, "Column name per model (repeat)");
  cmp_cmd->add_option("--gold", cmp.gold, "Gold corpus")->required();
  cmp_cmd->add_option("--format", cmp.format, "table or kv")->check(CLI::IsMember({"table", "kv"}));
  cmp_cmd->add_flag("--open-lattice", cmp.open_lattice, "Let known words take any tag");
  cmp_cmd->add_option("--threads", cmp.threads, "Worker threads")->check(CLI::PositiveNumber);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Sample train/test corpora from a random hidden tag chain");
  synth_cmd->add_option("--num-tags", synth.cfg.num_tags, "Number of tags");
  synth_cmd->add_option("--vocab", synth.cfg.vocab_size, "Vocabulary size");
  synth_cmd->add_option("--train-tokens", synth.cfg.num_train_tokens, "Training tokens");
  synth_cmd->add_option("--test-tokens", synth.cfg.num_test_tokens, "Test tokens");
  synth_cmd->add_option("--seed", synth.cfg.seed, "Random seed");
  synth_cmd->add_option("--zipf", synth.cfg.zipf_exponent, "Zipf exponent of word frequencies");
  synth_cmd->add_option("--train-out", synth.train_out, "Training corpus to write")->required();
  synth_cmd->add_option("--test-out", synth.test_out, "Test corpus to write")->required();
  synth_cmd->add_option("--spec-out", synth.spec_out, "Generator description (JSON) to write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train);
    if (*tag_cmd) return cmd_tag(tag);
    if (*eval_cmd) return cmd_eval(eval);
    if (*cmp_cmd) return cmd_compare(cmp);
    if (*synth_cmd) return cmd_synth(synth);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
