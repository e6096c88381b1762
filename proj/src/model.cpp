#include "snm/model.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "snm/errors.hpp"

namespace snm {
namespace {

constexpr char kMagic[] = "SNMLM";
constexpr int kFormatVersion = 1;

void write_doubles(std::ostream& out, const std::vector<double>& values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

std::vector<double> read_doubles(std::istream& in, size_t n) {
  std::vector<double> values(n);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw InputError("model file truncated in binary section");
  return values;
}

}  // namespace

SnmModel::SnmModel(Vocabulary vocab, TemplateSet templates, CountStore counts,
                   WeightTable table, MetafeatureConfig mf_config)
    : vocab_(std::move(vocab)),
      templates_(std::move(templates)),
      counts_(std::move(counts)),
      table_(std::move(table)),
      mf_config_(mf_config) {
  mf_config_.validate();
  if (!counts_.frozen()) throw ConfigError("model requires a frozen count store");
}

WeightTable& SnmModel::mutable_table() {
  finalized_ = false;
  return table_;
}

Feature SnmModel::feature_at(int32_t i) const {
  const std::string& key = counts_.key(i);
  return Feature{key, feature_type_of(key)};
}

double SnmModel::adjustment_of(int32_t i, WordId j, int64_t feature_total,
                               int64_t pair_count) const {
  return adjustment(feature_at(i), vocab_.word(j), feature_total, pair_count,
                    table_, mf_config_);
}

double SnmModel::adjustment_of(int32_t i, WordId j) const {
  return adjustment_of(i, j, counts_.total(i), counts_.pair_count(i, j));
}

double SnmModel::entry(int32_t i, WordId j) const {
  int64_t c_ij = counts_.pair_count(i, j);
  if (c_ij == 0) return 0.0;
  double rel = static_cast<double>(c_ij) / static_cast<double>(counts_.total(i));
  return std::exp(adjustment_of(i, j, counts_.total(i), c_ij)) * rel;
}

std::vector<std::pair<WordId, double>> SnmModel::score(
    const std::vector<int32_t>& feature_ids) const {
  if (feature_ids.empty()) throw InputError("score requires a non-empty feature set");
  std::vector<std::pair<WordId, double>> y;
  for (int32_t i : feature_ids) {
    for (const auto& [target, count] : counts_.row(i)) {
      double rel =
          static_cast<double>(count) / static_cast<double>(counts_.total(i));
      double m = std::exp(adjustment_of(i, target, counts_.total(i), count)) * rel;
      y.emplace_back(target, m);
    }
  }
  std::sort(y.begin(), y.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  // Collapse duplicate targets across rows.
  size_t w = 0;
  for (size_t r = 0; r < y.size(); ++r) {
    if (w > 0 && y[w - 1].first == y[r].first) {
      y[w - 1].second += y[r].second;
    } else {
      y[w++] = y[r];
    }
  }
  y.resize(w);
  return y;
}

std::vector<std::pair<WordId, double>> SnmModel::score(
    const std::vector<Feature>& features) const {
  return score(resolve_features(features));
}

std::vector<int32_t> SnmModel::resolve_features(
    const std::vector<Feature>& features) const {
  std::vector<int32_t> ids;
  ids.reserve(features.size());
  for (const Feature& f : features) {
    int32_t i = counts_.feature_id(f.key);
    if (i >= 0) ids.push_back(i);
  }
  if (ids.empty()) {
    int32_t empty = counts_.feature_id(empty_context_feature().key);
    if (empty >= 0) ids.push_back(empty);
  }
  return ids;
}

double SnmModel::floor_probability() const {
  return 1.0 / (10.0 * static_cast<double>(vocab_.size()));
}

ProbResult SnmModel::probability_from_ids(
    const std::vector<int32_t>& feature_ids, WordId target) const {
  if (!finalized_) throw ConfigError("probability requires a finalized model");
  if (feature_ids.empty()) return {floor_probability(), true};

  double denom = 0.0;
  for (int32_t i : feature_ids) {
    denom += row_sums_[i];
    ++row_lookups_;
  }
  if (denom <= 0.0) return {floor_probability(), true};

  double y_t = 0.0;
  for (int32_t i : feature_ids) {
    int64_t c_ij = counts_.pair_count(i, target);
    if (c_ij == 0) continue;
    double rel =
        static_cast<double>(c_ij) / static_cast<double>(counts_.total(i));
    y_t += std::exp(adjustment_of(i, target, counts_.total(i), c_ij)) * rel;
  }
  return {y_t / denom, false};
}

ProbResult SnmModel::probability(const std::vector<Feature>& features,
                                 WordId target) const {
  return probability_from_ids(resolve_features(features), target);
}

void SnmModel::finalize() {
  row_sums_.assign(counts_.num_features(), 0.0);
  for (int32_t i = 0; i < counts_.num_features(); ++i) {
    double sum = 0.0;
    for (const auto& [target, count] : counts_.row(i)) {
      double rel =
          static_cast<double>(count) / static_cast<double>(counts_.total(i));
      sum += std::exp(adjustment_of(i, target, counts_.total(i), count)) * rel;
    }
    row_sums_[i] = sum;
  }
  finalized_ = true;
}

void SnmModel::save(std::ostream& out) const {
  out << kMagic << '\n';
  out << "version " << kFormatVersion << '\n';
  out << "hash_seed " << table_.hash_seed << '\n';
  out << "bits " << table_.bits << '\n';
  out << "mf " << mf_config_.feature_identity << ' ' << mf_config_.feature_type
      << ' ' << mf_config_.feature_count << ' ' << mf_config_.target_identity
      << ' ' << mf_config_.pair_count << ' '
      << mf_config_.double_bucket_feature_count << ' '
      << mf_config_.double_bucket_pair_count << '\n';

  std::ostringstream tmpl;
  format_templates(templates_, tmpl);
  std::string tmpl_text = tmpl.str();
  out << "templates " << templates_.size() << '\n' << tmpl_text;

  out << "vocab " << vocab_.size() << '\n';
  vocab_.save(out);

  // Features in id order so row sums stay aligned on load.
  out << "features " << counts_.num_features() << '\n';
  for (int32_t i = 0; i < counts_.num_features(); ++i) {
    const CountStore::Row& row = counts_.row(i);
    out << counts_.key(i) << '\t' << row.size();
    for (const auto& [target, count] : row) {
      out << '\t' << target << ':' << count;
    }
    out << '\n';
  }

  out << "weights " << table_.weights.size() << '\n';
  write_doubles(out, table_.weights);
  if (finalized_) {
    out << "rowsums " << row_sums_.size() << '\n';
    write_doubles(out, row_sums_);
  } else {
    out << "rowsums 0\n";
  }
}

SnmModel SnmModel::load(std::istream& in) {
  std::string line, word;
  if (!std::getline(in, line) || line != kMagic) {
    throw InputError("not a model file (bad magic)");
  }
  auto expect = [&](const std::string& name) -> std::istringstream {
    if (!std::getline(in, line)) throw InputError("model file truncated");
    std::istringstream fields(line);
    fields >> word;
    if (word != name) throw InputError("model file: expected " + name);
    return fields;
  };

  int version = 0;
  expect("version") >> version;
  if (version != kFormatVersion) {
    throw InputError("unsupported model version " + std::to_string(version));
  }
  uint64_t seed = 0;
  int bits = 0;
  expect("hash_seed") >> seed;
  expect("bits") >> bits;
  MetafeatureConfig mf;
  expect("mf") >> mf.feature_identity >> mf.feature_type >> mf.feature_count >>
      mf.target_identity >> mf.pair_count >> mf.double_bucket_feature_count >>
      mf.double_bucket_pair_count;

  size_t n_templates = 0;
  expect("templates") >> n_templates;
  std::string tmpl_text;
  for (size_t k = 0; k < n_templates; ++k) {
    if (!std::getline(in, line)) throw InputError("model file truncated");
    tmpl_text += line + "\n";
  }
  std::istringstream tmpl_in(tmpl_text);
  TemplateSet templates = parse_templates(tmpl_in);

  size_t n_vocab = 0;
  expect("vocab") >> n_vocab;
  std::string vocab_text;
  for (size_t k = 0; k < n_vocab; ++k) {
    if (!std::getline(in, line)) throw InputError("model file truncated");
    vocab_text += line + "\n";
  }
  std::istringstream vocab_in(vocab_text);
  Vocabulary vocab = Vocabulary::load(vocab_in);

  size_t n_features = 0;
  expect("features") >> n_features;
  CountStore counts(vocab.fingerprint());
  for (size_t k = 0; k < n_features; ++k) {
    if (!std::getline(in, line)) throw InputError("model file truncated");
    size_t tab = line.find('\t');
    if (tab == std::string::npos) throw InputError("bad feature line");
    int32_t id = counts.add_feature(line.substr(0, tab));
    if (id != static_cast<int32_t>(k)) throw InputError("duplicate feature key");
    std::istringstream fields(line.substr(tab + 1));
    size_t n_pairs = 0;
    fields >> n_pairs;
    std::string cell;
    for (size_t p = 0; p < n_pairs; ++p) {
      if (!(fields >> cell)) throw InputError("bad feature pair list");
      size_t colon = cell.find(':');
      WordId target = static_cast<WordId>(std::stol(cell.substr(0, colon)));
      int64_t count = std::stoll(cell.substr(colon + 1));
      counts.add_pair_for_load(id, target, count);
    }
  }
  counts.freeze();

  size_t n_weights = 0;
  expect("weights") >> n_weights;
  WeightTable table(bits, seed);
  if (n_weights != table.weights.size()) {
    throw InputError("weight array size does not match bits");
  }
  table.weights = read_doubles(in, n_weights);

  SnmModel model(std::move(vocab), std::move(templates), std::move(counts),
                 std::move(table), mf);

  size_t n_rowsums = 0;
  expect("rowsums") >> n_rowsums;
  if (n_rowsums > 0) {
    if (n_rowsums != static_cast<size_t>(model.counts_.num_features())) {
      throw InputError("row-sum section size mismatch");
    }
    model.row_sums_ = read_doubles(in, n_rowsums);
    model.finalized_ = true;
  } else {
    model.finalize();
  }
  return model;
}

}  // namespace snm
