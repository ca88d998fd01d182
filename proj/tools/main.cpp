#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tdlm/checkpoint.hpp"
#include "tdlm/coherence.hpp"
#include "tdlm/corpus.hpp"
#include "tdlm/extensions.hpp"
#include "tdlm/generation.hpp"
#include "tdlm/io.hpp"
#include "tdlm/model.hpp"
#include "tdlm/stopwords.hpp"
#include "tdlm/topics.hpp"
#include "tdlm/trainer.hpp"

namespace fs = std::filesystem;
using namespace tdlm;

namespace {

// Exit codes beyond CLI11's own parse errors.
constexpr int kExitFailure = 1;
constexpr int kExitDiverged = 3;

struct ConfigArgs {
  std::string file;
  std::vector<std::string> sets;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.file, "key=value config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", args.sets, "Override one config key (key=value); may be repeated");
}

// Config file, then --set overrides, then command flags, then TDLM_SEED.
TrainConfig resolve_config(const ConfigArgs& args, std::map<std::string, std::string> flags = {}) {
  std::map<std::string, std::string> overrides;
  for (const auto& item : args.sets) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + item + "'");
    overrides[item.substr(0, eq)] = item.substr(eq + 1);
  }
  for (auto& [key, value] : flags) overrides[key] = value;
  if (const char* seed = std::getenv("TDLM_SEED"); seed && *seed) overrides["seed"] = seed;
  return load_config(args.file.empty() ? std::string() : read_file(args.file), overrides);
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file_atomic(path, text);
  }
}

const Corpus& pick_split(const Dataset& data, const std::string& name) { return data.split(name); }

// Reads a raw corpus file and maps it onto the model's tables.
Corpus index_raw(const fs::path& path, const TdlmModel& model) {
  TokenizerOptions tok;
  tok.split_sentences = model.config().split_sentences;
  tok.split_contractions = model.config().split_contractions;
  const auto docs = read_corpus(path, tok);
  // Labels the model has never seen are an error; unknown tags are dropped.
  return index_corpus(docs, model.vocab(), model.labels(), model.tags());
}

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(9);
  out << v;
  return out.str();
}

// preprocess

struct PreprocessArgs {
  std::string corpus;
  std::string out;
  ConfigArgs config;
  double dev_fraction = 0.1;
  double test_fraction = 0.1;
};

int run_preprocess(const PreprocessArgs& args) {
  const TrainConfig config = resolve_config(args.config);
  std::cout << config.to_text();

  TokenizerOptions tok;
  tok.split_sentences = config.split_sentences;
  tok.split_contractions = config.split_contractions;
  auto docs = read_corpus(args.corpus, tok);
  if (docs.empty()) throw DataError(args.corpus + ": corpus has no documents");

  const StopwordSet stopwords = config.stopwords.empty() ? default_stopwords() : load_stopwords(config.stopwords);
  const RawSplits raw = split_documents(std::move(docs), {args.dev_fraction, args.test_fraction, config.seed});
  const Dataset data = build_dataset(raw, {config.min_count, config.top_exclude_fraction}, stopwords);
  save_dataset(data, args.out);
  write_file_atomic(fs::path(args.out) / "config.txt", config.to_text());

  std::printf("split\tdocs\ttokens\n");
  std::size_t docs_total = 0, tokens_total = 0;
  for (const char* name : {"train", "dev", "test"}) {
    const Corpus& c = data.split(name);
    std::printf("%s\t%zu\t%zu\n", name, c.size(), c.token_count());
    docs_total += c.size();
    tokens_total += c.token_count();
  }
  std::printf("total\t%zu\t%zu\nvocab\t%zu\nlabels\t%zu\ntags\t%zu\n", docs_total, tokens_total, data.vocab.size(),
              data.labels.size(), data.tags.size());
  return 0;
}

// train

struct TrainArgs {
  std::string data;
  std::string out;
  ConfigArgs config;
  std::string resume;
  std::string embeddings;
  bool vanilla = false;
  bool supervised = false;
  bool tags = false;
  bool keep_epochs = false;
  bool quiet = false;
};

int run_train(const TrainArgs& args) {
  const Dataset data = load_dataset(args.data);
  fs::create_directories(args.out);
  const fs::path best_path = fs::path(args.out) / "model.ckpt";
  const fs::path last_path = fs::path(args.out) / "last.ckpt";
  const fs::path metrics_path = fs::path(args.out) / "metrics.csv";

  TdlmModel model;
  TrainState state;
  if (!args.resume.empty()) {
    Checkpoint ck = load_checkpoint(args.resume);
    model = std::move(ck.model);
    state = std::move(ck.state);
    // The checkpoint carries its own configuration.
    if (!args.config.file.empty() || !args.config.sets.empty() || args.vanilla || args.supervised || args.tags)
      std::fprintf(stderr, "note: --resume uses the checkpoint's configuration; other settings are ignored\n");
    if (!(model.vocab() == data.vocab)) throw DataError("the checkpoint vocabulary differs from " + args.data);
  } else {
    std::map<std::string, std::string> flags;
    if (args.vanilla) flags["vanilla"] = "true";
    if (args.supervised) flags["supervised"] = "true";
    if (args.tags) flags["tags"] = "true";
    const TrainConfig config = resolve_config(args.config, flags);
    model = TdlmModel::create(config, data);
    state = TrainState::initial(config);
    if (!args.embeddings.empty()) {
      const std::size_t copied = load_pretrained_embeddings(model, args.embeddings);
      std::fprintf(stderr, "loaded %zu pretrained vectors\n", copied);
    }
  }
  write_file_atomic(fs::path(args.out) / "config.txt", model.config().to_text());

  TrainHooks hooks;
  if (!args.quiet) hooks.log = [](const std::string& line) { std::fprintf(stderr, "%s\n", line.c_str()); };
  hooks.on_epoch = [&](const TdlmModel& m, const TrainState& s, bool improved) {
    const std::string bytes = encode_checkpoint(m, s);
    if (improved) write_file_atomic(best_path, bytes);
    write_file_atomic(last_path, bytes);
    if (args.keep_epochs) write_file_atomic(fs::path(args.out) / ("epoch" + std::to_string(s.epoch) + ".ckpt"), bytes);
    write_file_atomic(metrics_path, metrics_csv(s.history));
  };
  try {
    train(model, state, data, hooks);
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "training diverged: %s\n", e.what());
    return kExitDiverged;
  }
  if (state.history.empty()) {
    // Nothing trained: the initialised model is the result.
    const std::string bytes = encode_checkpoint(model, state);
    write_file_atomic(best_path, bytes);
    write_file_atomic(last_path, bytes);
    write_file_atomic(metrics_path, metrics_csv(state.history));
  }
  std::printf("best_epoch\t%zu\nbest_dev_ppl\t%s\ncheckpoint\t%s\n", state.best_epoch,
              format_double(state.best_dev_ppl).c_str(), best_path.string().c_str());
  return 0;
}

// eval

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string split = "test";
};

int run_eval(const EvalArgs& args) {
  const TdlmModel model = load_checkpoint(args.checkpoint).model;
  const Dataset data = load_dataset(args.data);
  const Corpus& corpus = pick_split(data, args.split);
  const Perplexity ppl = model.perplexity(corpus);
  std::printf("split\t%s\nperplexity\t%s\ntokens\t%zu\n", args.split.c_str(), format_double(ppl.value).c_str(),
              ppl.tokens);
  if (model.supervised()) std::printf("accuracy\t%s\n", format_double(model.accuracy(corpus)).c_str());
  return 0;
}

// topics

struct TopicsArgs {
  std::string checkpoint;
  std::size_t top = 10;
  std::string out;
};

int run_topics(const TopicsArgs& args) {
  const TdlmModel model = load_checkpoint(args.checkpoint).model;
  write_or_print(args.out, topics_json(model, args.top));
  return 0;
}

// coherence

struct CoherenceArgs {
  std::string checkpoint;
  std::string reference;
  std::string data;
  std::string split = "train";
  std::size_t window = 20;
  std::string json_out;
  std::string csv_out;
};

int run_coherence(const CoherenceArgs& args) {
  const TdlmModel model = load_checkpoint(args.checkpoint).model;
  Corpus reference;
  if (!args.reference.empty()) {
    reference = index_raw(args.reference, model);
  } else {
    reference = pick_split(load_dataset(args.data), args.split);
  }
  std::vector<std::vector<TokenId>> streams;
  for (const auto& doc : reference.documents) {
    std::vector<TokenId> ids;
    for (const auto& s : doc.sentences) ids.insert(ids.end(), s.begin(), s.end());
    streams.push_back(std::move(ids));
  }
  const auto topics = top_word_ids(model, kCoherenceCutoffs.back());
  std::vector<TokenId> query;
  for (const auto& t : topics) query.insert(query.end(), t.begin(), t.end());
  const auto index = CooccurrenceIndex::build(streams, args.window, query);
  const CoherenceReport report = coherence_report(topics, index);

  if (!args.json_out.empty()) write_file_atomic(args.json_out, topics_json(model, kCoherenceCutoffs.back(), &report));
  write_or_print(args.csv_out, coherence_csv(report));
  if (!args.csv_out.empty()) std::printf("mean_coherence\t%s\n", format_double(report.mean).c_str());
  return 0;
}

// generate

struct GenerateArgs {
  std::string checkpoint;
  std::optional<std::size_t> topic;
  std::vector<double> mixture;
  std::size_t count = 1;
  double temperature = 0.75;
  std::size_t max_words = 40;
  std::uint64_t seed = 1;
  bool json = false;
};

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

int run_generate(const GenerateArgs& args) {
  const TdlmModel model = load_checkpoint(args.checkpoint).model;
  const std::string label = args.topic ? std::to_string(*args.topic) : "mixture";
  for (std::size_t i = 0; i < args.count; ++i) {
    GenerationOptions options;
    options.temperature = args.temperature;
    options.max_words = args.max_words;
    options.seed = Rng::derive(args.seed, {i}).next();
    const GeneratedSentence out =
        args.topic ? generate_sentence(model, *args.topic, options) : generate_mixture(model, args.mixture, options);
    if (args.json) {
      std::string words, ids;
      for (std::size_t j = 0; j < out.ids.size(); ++j) {
        if (j) {
          words += ',';
          ids += ',';
        }
        words += '"' + json_escape(out.words[j]) + '"';
        ids += std::to_string(out.ids[j]);
      }
      const std::string topic = args.topic ? label : "\"mixture\"";
      std::printf("{\"topic\":%s,\"words\":[%s],\"token_ids\":[%s]}\n", topic.c_str(), words.c_str(), ids.c_str());
    } else {
      std::string line = "topic=" + label + ":";
      for (const auto& w : out.words) line += " " + w;
      std::printf("%s\n", line.c_str());
    }
  }
  return 0;
}

// classify

struct ClassifyArgs {
  std::string checkpoint;
  std::string corpus;
  std::string data;
  std::string split = "test";
  std::string out;
};

int run_classify(const ClassifyArgs& args) {
  const TdlmModel model = load_checkpoint(args.checkpoint).model;
  if (!model.supervised()) throw ConfigError("the checkpoint has no classifier; train with --supervised");
  Corpus corpus;
  if (!args.corpus.empty()) {
    corpus = index_raw(args.corpus, model);
  } else {
    corpus = pick_split(load_dataset(args.data), args.split);
  }
  std::string csv = "doc_index,predicted_label,prob\n";
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto& doc = corpus.documents[d];
    const auto probs = classify(model.topic(), model.head(), doc.content, doc.tags, model.topic_options());
    std::size_t best = 0;
    for (std::size_t c = 1; c < probs.size(); ++c)
      if (probs[c] > probs[best]) best = c;
    csv += std::to_string(d) + "," + model.labels().name(static_cast<TokenId>(best)) + "," +
           format_double(probs[best]) + "\n";
  }
  write_or_print(args.out, csv);
  return 0;
}

// export-tags

struct ExportTagsArgs {
  std::string checkpoint;
  std::string out;
};

int run_export_tags(const ExportTagsArgs& args) {
  const TdlmModel model = load_checkpoint(args.checkpoint).model;
  write_or_print(args.out, export_tag_vectors(model.topic(), model.tags(), model.tag_counts()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topically driven language model: preprocessing, training and evaluation"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  PreprocessArgs pre;
  auto* cmd_pre = app.add_subcommand("preprocess", "Tokenise a corpus, build the vocabulary and split it");
  cmd_pre->add_option("--corpus", pre.corpus, "Corpus text file")->required()->check(CLI::ExistingFile);
  cmd_pre->add_option("--out", pre.out, "Output directory")->required();
  cmd_pre->add_option("--dev-fraction", pre.dev_fraction, "Fraction of documents held out for dev")
      ->check(CLI::Range(0.0, 1.0));
  cmd_pre->add_option("--test-fraction", pre.test_fraction, "Fraction of documents held out for test")
      ->check(CLI::Range(0.0, 1.0));
  add_config_options(cmd_pre, pre.config);

  TrainArgs tr;
  auto* cmd_train = app.add_subcommand("train", "Train a model on a preprocessed corpus");
  cmd_train->add_option("--data", tr.data, "Preprocessed directory")->required()->check(CLI::ExistingDirectory);
  cmd_train->add_option("--out", tr.out, "Run directory for checkpoints and metrics")->required();
  cmd_train->add_option("--resume", tr.resume, "Continue from a checkpoint (last.ckpt)")->check(CLI::ExistingFile);
  cmd_train->add_option("--embeddings", tr.embeddings, "Pretrained word vectors in text format")
      ->check(CLI::ExistingFile);
  cmd_train->add_flag("--vanilla", tr.vanilla, "Plain LSTM language model without the topic component");
  cmd_train->add_flag("--supervised", tr.supervised, "Add the document classification sub-task");
  cmd_train->add_flag("--tags", tr.tags, "Concatenate document tag vectors to the document encoding");
  cmd_train->add_flag("--keep-epochs", tr.keep_epochs, "Also keep a checkpoint of every epoch (epoch<N>.ckpt)");
  cmd_train->add_flag("--quiet", tr.quiet, "No progress output");
  add_config_options(cmd_train, tr.config);
  cmd_train->get_option("--resume")->excludes("--embeddings");

  EvalArgs ev;
  auto* cmd_eval = app.add_subcommand("eval", "Perplexity (and accuracy) on a split");
  cmd_eval->add_option("--checkpoint", ev.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  cmd_eval->add_option("--data", ev.data, "Preprocessed directory")->required()->check(CLI::ExistingDirectory);
  cmd_eval->add_option("--split", ev.split, "train, dev or test")->check(CLI::IsMember({"train", "dev", "test"}));

  TopicsArgs to;
  auto* cmd_topics = app.add_subcommand("topics", "Top words of every topic as JSON");
  cmd_topics->add_option("--checkpoint", to.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  cmd_topics->add_option("-n,--top", to.top, "Words per topic")->check(CLI::PositiveNumber);
  cmd_topics->add_option("--out", to.out, "Output file (default stdout)");

  CoherenceArgs co;
  auto* cmd_coh = app.add_subcommand("coherence", "NPMI coherence of every topic against a reference corpus");
  cmd_coh->add_option("--checkpoint", co.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  auto* reference =
      cmd_coh->add_option("--reference", co.reference, "Reference corpus text file")->check(CLI::ExistingFile);
  auto* data =
      cmd_coh->add_option("--data", co.data, "Preprocessed directory used as reference")->check(CLI::ExistingDirectory);
  cmd_coh->add_option("--split", co.split, "Split of --data")->check(CLI::IsMember({"train", "dev", "test"}));
  cmd_coh->add_option("--window", co.window, "Sliding window size")->check(CLI::Range(2, 1 << 20));
  cmd_coh->add_option("--json", co.json_out, "Also write the topic report with coherence fields");
  cmd_coh->add_option("--csv", co.csv_out, "CSV output file (default stdout)");
  reference->excludes(data);

  GenerateArgs ge;
  auto* cmd_gen = app.add_subcommand("generate", "Sample sentences conditioned on a topic or a topic mixture");
  cmd_gen->add_option("--checkpoint", ge.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  auto* topic = cmd_gen->add_option("--topic", ge.topic, "Topic index");
  auto* mixture = cmd_gen->add_option("--mixture", ge.mixture, "Comma-separated topic weights")->delimiter(',');
  cmd_gen->add_option("--count", ge.count, "Number of sentences");
  cmd_gen->add_option("--temperature", ge.temperature, "Sampling temperature; below 1e-6 decodes greedily")
      ->check(CLI::PositiveNumber);
  cmd_gen->add_option("--max-words", ge.max_words, "Stop after this many words");
  cmd_gen->add_option("--seed", ge.seed, "Sampling seed");
  cmd_gen->add_flag("--json", ge.json, "One JSON object per line");
  topic->excludes(mixture);

  ClassifyArgs cl;
  auto* cmd_cls = app.add_subcommand("classify", "Predict document labels with a supervised model");
  cmd_cls->add_option("--checkpoint", cl.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  auto* cls_corpus = cmd_cls->add_option("--corpus", cl.corpus, "Corpus text file")->check(CLI::ExistingFile);
  auto* cls_data = cmd_cls->add_option("--data", cl.data, "Preprocessed directory")->check(CLI::ExistingDirectory);
  cmd_cls->add_option("--split", cl.split, "Split of --data")->check(CLI::IsMember({"train", "dev", "test"}));
  cmd_cls->add_option("--out", cl.out, "CSV output file (default stdout)");
  cls_corpus->excludes(cls_data);

  ExportTagsArgs et;
  auto* cmd_tags = app.add_subcommand("export-tags", "Write the learned tag vectors as CSV");
  cmd_tags->add_option("--checkpoint", et.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  cmd_tags->add_option("--out", et.out, "CSV output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0) std::cerr << "\n" << app.help();
    return code;
  }

  // Argument combinations CLI11 cannot express directly.
  auto usage_error = [&](CLI::App* cmd, const std::string& message) {
    std::cerr << message << "\n\n" << cmd->help();
    return static_cast<int>(CLI::ExitCodes::ValidationError);
  };
  if (cmd_coh->parsed() && co.reference.empty() && co.data.empty())
    return usage_error(cmd_coh, "coherence needs --reference or --data");
  if (cmd_gen->parsed() && !ge.topic && ge.mixture.empty())
    return usage_error(cmd_gen, "generate needs --topic or --mixture");
  if (cmd_cls->parsed() && cl.corpus.empty() && cl.data.empty())
    return usage_error(cmd_cls, "classify needs --corpus or --data");

  try {
    if (cmd_pre->parsed()) return run_preprocess(pre);
    if (cmd_train->parsed()) return run_train(tr);
    if (cmd_eval->parsed()) return run_eval(ev);
    if (cmd_topics->parsed()) return run_topics(to);
    if (cmd_coh->parsed()) return run_coherence(co);
    if (cmd_gen->parsed()) return run_generate(ge);
    if (cmd_cls->parsed()) return run_classify(cl);
    if (cmd_tags->parsed()) return run_export_tags(et);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
