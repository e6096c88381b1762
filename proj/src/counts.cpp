#include "snm/counts.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "snm/errors.hpp"

namespace snm {

int32_t CountStore::add_feature(const std::string& key) {
  if (frozen_) throw ConfigError("count store is frozen");
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  int32_t id = static_cast<int32_t>(keys_.size());
  index_.emplace(key, id);
  keys_.push_back(key);
  totals_.push_back(0);
  building_rows_.emplace_back();
  return id;
}

void CountStore::add_event(const Event& event) {
  for (const Feature& f : event.features) {
    int32_t i = add_feature(f.key);
    ++building_rows_[i][event.target];
    ++totals_[i];
  }
}

void CountStore::add_pair_for_load(int32_t i, WordId j, int64_t count) {
  if (frozen_) throw ConfigError("count store is frozen");
  if (count < 1) throw InputError("pair counts must be >= 1");
  building_rows_[i][j] += count;
  totals_[i] += count;
}

void CountStore::freeze() {
  if (frozen_) return;
  rows_.resize(building_rows_.size());
  for (size_t i = 0; i < building_rows_.size(); ++i) {
    rows_[i].assign(building_rows_[i].begin(), building_rows_[i].end());
    std::sort(rows_[i].begin(), rows_[i].end());
  }
  building_rows_.clear();
  building_rows_.shrink_to_fit();
  frozen_ = true;
}

int32_t CountStore::feature_id(const std::string& key) const {
  auto it = index_.find(key);
  return it == index_.end() ? -1 : it->second;
}

const std::string& CountStore::key(int32_t i) const {
  if (i < 0 || i >= num_features()) throw LookupError("feature id out of range");
  return keys_[i];
}

int64_t CountStore::num_pairs() const {
  int64_t n = 0;
  if (frozen_) {
    for (const Row& row : rows_) n += static_cast<int64_t>(row.size());
  } else {
    for (const auto& row : building_rows_) n += static_cast<int64_t>(row.size());
  }
  return n;
}

int64_t CountStore::total(int32_t i) const {
  if (i < 0 || i >= num_features()) throw LookupError("feature id out of range");
  return totals_[i];
}

int64_t CountStore::pair_count(int32_t i, WordId j) const {
  if (i < 0 || i >= num_features()) throw LookupError("feature id out of range");
  if (frozen_) {
    const Row& row = rows_[i];
    auto it = std::lower_bound(
        row.begin(), row.end(), j,
        [](const std::pair<WordId, int64_t>& p, WordId w) { return p.first < w; });
    return (it != row.end() && it->first == j) ? it->second : 0;
  }
  auto it = building_rows_[i].find(j);
  return it == building_rows_[i].end() ? 0 : it->second;
}

const CountStore::Row& CountStore::row(int32_t i) const {
  if (!frozen_) throw ConfigError("row access requires a frozen store");
  if (i < 0 || i >= num_features()) throw LookupError("feature id out of range");
  return rows_[i];
}

double CountStore::relative_frequency(int32_t i, WordId j) const {
  int64_t t = total(i);
  if (t == 0) return 0.0;
  return static_cast<double>(pair_count(i, j)) / static_cast<double>(t);
}

CountStore CountStore::accumulate(const std::vector<Event>& events,
                                  uint64_t vocab_fingerprint) {
  CountStore store(vocab_fingerprint);
  for (const Event& event : events) store.add_event(event);
  store.freeze();
  return store;
}

CountStore CountStore::accumulate_corpus(const std::vector<Sentence>& sentences,
                                         const TemplateSet& templates,
                                         const Vocabulary& vocab) {
  CountStore store(vocab.fingerprint());
  for (const Sentence& s : sentences) {
    for (const Event& event : make_events(s, templates, vocab)) {
      store.add_event(event);
    }
  }
  store.freeze();
  return store;
}

CountStore CountStore::merge(const CountStore& a, const CountStore& b) {
  if (a.vocab_fingerprint_ != b.vocab_fingerprint_) {
    throw ConfigError("cannot merge count stores from different vocabularies");
  }
  if (!a.frozen_ || !b.frozen_) throw ConfigError("merge requires frozen stores");

  std::vector<std::string> keys = a.keys_;
  keys.insert(keys.end(), b.keys_.begin(), b.keys_.end());
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  CountStore merged(a.vocab_fingerprint_);
  for (const std::string& key : keys) {
    int32_t id = merged.add_feature(key);
    for (const CountStore* src : {&a, &b}) {
      int32_t si = src->feature_id(key);
      if (si < 0) continue;
      for (const auto& [target, count] : src->rows_[si]) {
        merged.building_rows_[id][target] += count;
      }
      merged.totals_[id] += src->totals_[si];
    }
  }
  merged.freeze();
  return merged;
}

void CountStore::save(std::ostream& out, const Vocabulary& vocab) const {
  if (!frozen_) throw ConfigError("save requires a frozen store");
  std::vector<int32_t> order(keys_.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int32_t>(i);
  std::sort(order.begin(), order.end(), [this](int32_t x, int32_t y) {
    return keys_[x] < keys_[y];
  });

  for (int32_t i : order) {
    std::vector<std::pair<std::string, int64_t>> lines;
    lines.reserve(rows_[i].size());
    for (const auto& [target, count] : rows_[i]) {
      lines.emplace_back(vocab.word(target), count);
    }
    std::sort(lines.begin(), lines.end());
    for (const auto& [word, count] : lines) {
      out << keys_[i] << '\t' << word << '\t' << count << '\n';
    }
  }
  for (int32_t i : order) {
    out << keys_[i] << '\t' << "*" << '\t' << totals_[i] << '\n';
  }
}

CountStore CountStore::load(std::istream& in, const Vocabulary& vocab) {
  CountStore store(vocab.fingerprint());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    size_t tab1 = line.find('\t');
    size_t tab2 = line.find('\t', tab1 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos) {
      throw InputError("bad counts line: " + line);
    }
    std::string key = line.substr(0, tab1);
    std::string target = line.substr(tab1 + 1, tab2 - tab1 - 1);
    int64_t count = std::stoll(line.substr(tab2 + 1));
    int32_t i = store.add_feature(key);
    if (target == "*") {
      // Totals section; verify against the accumulated pairs.
      if (store.totals_[i] != count) {
        throw InputError("counts total mismatch for feature " + key);
      }
    } else {
      if (!vocab.contains(target) && target != Vocabulary::unknown_word()) {
        throw InputError("counts target not in vocabulary: " + target);
      }
      store.building_rows_[i][vocab.id(target)] += count;
      store.totals_[i] += count;
    }
  }
  store.freeze();
  return store;
}

}  // namespace snm
