#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "snm/counts.hpp"
#include "snm/errors.hpp"
#include "snm/evaluation.hpp"
#include "snm/features.hpp"
#include "snm/model.hpp"
#include "snm/training.hpp"
#include "snm/vocabulary.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw snm::InputError("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw snm::InputError("cannot open " + path + " for writing");
  return out;
}

snm::Vocabulary load_vocab(const std::string& path) {
  auto in = open_in(path);
  return snm::Vocabulary::load(in);
}

snm::TemplateSet load_templates(const std::string& path) {
  auto in = open_in(path);
  return snm::parse_templates(in);
}

snm::SnmModel load_model(const std::string& path) {
  auto in = open_in(path);
  return snm::SnmModel::load(in);
}

struct MfFlags {
  bool no_feature_identity = false;
  bool no_feature_type = false;
  bool no_feature_count = false;
  bool no_target_identity = false;
  bool no_pair_count = false;
  bool double_bucket_feature_count = false;
  bool double_bucket_pair_count = false;

  snm::MetafeatureConfig to_config() const {
    snm::MetafeatureConfig cfg;
    cfg.feature_identity = !no_feature_identity;
    cfg.feature_type = !no_feature_type;
    cfg.feature_count = !no_feature_count;
    cfg.target_identity = !no_target_identity;
    cfg.pair_count = !no_pair_count;
    cfg.double_bucket_feature_count = double_bucket_feature_count;
    cfg.double_bucket_pair_count = double_bucket_pair_count;
    return cfg;
  }

  void add_options(CLI::App* cmd) {
    cmd->add_flag("--no-mf-feature-identity", no_feature_identity,
                  "Ablate the feature-identity metafeature");
    cmd->add_flag("--no-mf-feature-type", no_feature_type,
                  "Ablate the feature-type metafeature");
    cmd->add_flag("--no-mf-feature-count", no_feature_count,
                  "Ablate the feature-count metafeature");
    cmd->add_flag("--no-mf-target-identity", no_target_identity,
                  "Ablate the target-identity metafeature");
    cmd->add_flag("--no-mf-pair-count", no_pair_count,
                  "Ablate the feature-target-count metafeature");
    cmd->add_flag("--double-bucket-feature-count", double_bucket_feature_count,
                  "Second (ceiled) log2 bucket for feature counts");
    cmd->add_flag("--double-bucket-pair-count", double_bucket_pair_count,
                  "Second (ceiled) log2 bucket for feature-target counts");
  }
};

int run(int argc, char** argv) {
  CLI::App app{"Sparse non-negative matrix language modeling toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read flags from a config file");

  // build-vocab
  auto* build_vocab = app.add_subcommand(
      "build-vocab", "Build a vocabulary from a tokenized corpus");
  std::string corpus_path, vocab_path, out_path;
  int64_t min_count = 3;
  build_vocab->add_option("--corpus", corpus_path, "Training text")
      ->envname("SNM_CORPUS")->required();
  build_vocab->add_option("--min-count", min_count,
                          "Discard words with count below this");
  build_vocab->add_option("--output", out_path, "Vocabulary file")
      ->envname("SNM_VOCAB")->required();

  // count
  auto* count = app.add_subcommand(
      "count", "Accumulate feature-target counts over a corpus");
  std::string templates_path, counts_path;
  count->add_option("--corpus", corpus_path, "Training text")
      ->envname("SNM_CORPUS")->required();
  count->add_option("--vocab", vocab_path, "Vocabulary file")
      ->envname("SNM_VOCAB")->required();
  count->add_option("--templates", templates_path, "Template config")
      ->required();
  count->add_option("--output", counts_path, "Counts file")
      ->envname("SNM_COUNTS")->required();

  // train
  auto* train_cmd = app.add_subcommand(
      "train", "Train the adjustment weights and write a model");
  snm::TrainerConfig trainer;
  MfFlags mf_flags;
  int bits = 24;
  uint64_t hash_seed = 42;
  bool no_leave_one_out = false;
  bool deterministic = false;
  train_cmd->add_option("--corpus", corpus_path, "Training text")
      ->envname("SNM_CORPUS")->required();
  train_cmd->add_option("--vocab", vocab_path, "Vocabulary file")
      ->envname("SNM_VOCAB")->required();
  train_cmd->add_option("--templates", templates_path, "Template config")
      ->required();
  train_cmd->add_option("--output", out_path, "Model file")
      ->envname("SNM_MODEL")->required();
  train_cmd->add_option("--learning-rate", trainer.learning_rate,
                        "SGD step size");
  train_cmd->add_option("--epochs", trainer.epochs, "Passes over the corpus");
  train_cmd->add_flag("--no-leave-one-out", no_leave_one_out,
                      "Aggregated updates on the raw counts");
  train_cmd->add_option("--seed", trainer.shuffle_seed, "Shuffle seed");
  train_cmd->add_option("--hash-seed", hash_seed, "Metafeature hash seed");
  train_cmd->add_option("--bits", bits, "Weight table size exponent");
  train_cmd->add_flag("--deterministic", deterministic,
                      "Single worker, reproducible byte-identical output");
  train_cmd->add_option("--workers", trainer.workers, "Parallel SGD workers");
  train_cmd->add_option("--log-every", trainer.log_every,
                        "Progress line every N events (0 = off)");
  mf_flags.add_options(train_cmd);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Perplexity on a test set");
  std::string model_path, test_path, stream_out;
  eval_cmd->add_option("--model", model_path, "Model file")
      ->envname("SNM_MODEL")->required();
  eval_cmd->add_option("--test", test_path, "Test text")->required();
  eval_cmd->add_option("--stream-out", stream_out,
                       "Write per-token log10 probabilities here");

  // interpolate
  auto* interp = app.add_subcommand(
      "interpolate", "Mix per-token probability streams");
  std::vector<std::string> stream_paths;
  std::vector<double> weights;
  bool optimize = false;
  std::vector<std::string> dev_stream_paths;
  interp->add_option("--streams", stream_paths, "Stream files")->required();
  interp->add_option("--weights", weights, "Mixture weights (sum to 1)");
  interp->add_flag("--optimize", optimize,
                   "Fit weights on the dev streams first");
  interp->add_option("--dev-streams", dev_stream_paths,
                     "Dev-set streams for weight fitting");

  // inspect
  auto* inspect = app.add_subcommand(
      "inspect", "Show counts, adjustment and entries for a feature");
  std::string feature_key, target_word;
  inspect->add_option("--model", model_path, "Model file")
      ->envname("SNM_MODEL")->required();
  inspect->add_option("--feature", feature_key, "Canonical feature key")
      ->required();
  inspect->add_option("--target", target_word, "Target word");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*build_vocab) {
    auto in = open_in(corpus_path);
    snm::Vocabulary vocab = snm::Vocabulary::build(in, min_count);
    auto out = open_out(out_path);
    vocab.save(out);
    std::cerr << "vocabulary: " << vocab.size() << " entries\n";
  } else if (*count) {
    snm::Vocabulary vocab = load_vocab(vocab_path);
    snm::TemplateSet templates = load_templates(templates_path);
    auto in = open_in(corpus_path);
    std::vector<snm::Sentence> sentences = snm::tokenize_file(in, vocab);
    snm::CountStore store =
        snm::CountStore::accumulate_corpus(sentences, templates, vocab);
    auto out = open_out(counts_path);
    store.save(out, vocab);
    std::cerr << "counts: " << store.num_features() << " features, "
              << store.num_pairs() << " pairs\n";
  } else if (*train_cmd) {
    trainer.leave_one_out = !no_leave_one_out;
    trainer.deterministic = deterministic;
    snm::Vocabulary vocab = load_vocab(vocab_path);
    snm::TemplateSet templates = load_templates(templates_path);
    auto in = open_in(corpus_path);
    std::vector<snm::Sentence> sentences = snm::tokenize_file(in, vocab);
    snm::CountStore store =
        snm::CountStore::accumulate_corpus(sentences, templates, vocab);
    snm::SnmModel model(std::move(vocab), std::move(templates),
                        std::move(store), snm::WeightTable(bits, hash_seed),
                        mf_flags.to_config());
    snm::train_corpus(sentences, &model, trainer, &std::cerr);
    auto out = open_out(out_path);
    model.save(out);
    std::cerr << "model written to " << out_path << '\n';
  } else if (*eval_cmd) {
    snm::SnmModel model = load_model(model_path);
    auto in = open_in(test_path);
    std::vector<snm::Sentence> test = snm::tokenize_file(in, model.vocab());
    std::vector<double> per_token;
    snm::EvalReport report = snm::perplexity(model, test, &per_token);
    if (!stream_out.empty()) {
      auto out = open_out(stream_out);
      snm::save_stream(per_token, out);
    }
    report.print(std::cout);
    report.print_summary(std::cout);
  } else if (*interp) {
    std::vector<snm::ProbabilityStream> streams;
    for (const std::string& path : stream_paths) {
      auto in = open_in(path);
      streams.push_back(snm::load_stream(in));
    }
    if (optimize) {
      std::vector<snm::ProbabilityStream> dev;
      for (const std::string& path : dev_stream_paths) {
        auto in = open_in(path);
        dev.push_back(snm::load_stream(in));
      }
      if (dev.empty()) dev = streams;
      snm::WeightFit fit = snm::optimize_weights(dev);
      weights = fit.weights;
      std::cout << "weights:";
      for (double w : weights) std::cout << ' ' << w;
      std::cout << (fit.degenerate ? " (degenerate, uniform)" : "") << '\n';
    }
    snm::EvalReport report = snm::interpolate(streams, weights);
    report.print(std::cout);
    report.print_summary(std::cout);
  } else if (*inspect) {
    snm::SnmModel model = load_model(model_path);
    int32_t i = model.counts().feature_id(feature_key);
    if (i < 0) {
      std::cerr << "feature not found: " << feature_key << '\n';
      return kExitRuntime;
    }
    const snm::CountStore& counts = model.counts();
    std::cout << "feature: " << feature_key << '\n';
    std::cout << "type: " << snm::feature_type_of(feature_key) << '\n';
    std::cout << "total: " << counts.total(i) << '\n';
    std::cout << "row_sum: " << model.row_sums()[i] << '\n';
    std::cout << "targets: " << counts.row(i).size() << '\n';
    if (!target_word.empty()) {
      if (!model.vocab().contains(target_word)) {
        std::cerr << "target not in vocabulary: " << target_word << '\n';
        return kExitRuntime;
      }
      snm::WordId j = model.vocab().id(target_word);
      int64_t c_ij = counts.pair_count(i, j);
      std::cout << "pair_count: " << c_ij << '\n';
      std::cout << "relative_frequency: " << counts.relative_frequency(i, j)
                << '\n';
      if (c_ij > 0) {
        snm::Feature f{feature_key, snm::feature_type_of(feature_key)};
        for (const auto& mf : snm::enumerate_metafeatures(
                 f, target_word, counts.total(i), c_ij, model.mf_config())) {
          double theta =
              model.table().lookup(snm::hash_key(mf.key, model.table().hash_seed));
          std::cout << "  " << mf.key << " w=" << mf.weight
                    << " theta=" << theta << '\n';
        }
        std::cout << "adjustment: " << model.adjustment_of(i, j) << '\n';
        std::cout << "entry: " << model.entry(i, j) << '\n';
      }
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const snm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
