#include "snm/adjustment.hpp"

#include <cmath>
#include <cstdio>

#include "snm/errors.hpp"

namespace snm {
namespace {

// One conjunction element: "|label=value" appended to the running key.
// Count buckets carry a weight < 1 in double-bucket mode; everything else
// weighs 1.
struct Element {
  const char* label;
  std::string value;
  double weight;
};

std::vector<Element> build_elements(const Feature& feature,
                                    const std::string& target_word,
                                    int64_t feature_total, int64_t pair_count,
                                    const MetafeatureConfig& cfg) {
  cfg.validate();
  std::vector<Element> elements;
  if (cfg.feature_identity) elements.push_back({"fid", feature.key, 1.0});
  if (cfg.feature_type) elements.push_back({"ft", feature.type, 1.0});
  if (cfg.feature_count) {
    for (const Bucket& b :
         bucketize(feature_total, cfg.double_bucket_feature_count)) {
      elements.push_back({"fc", std::to_string(b.bucket), b.weight});
    }
  }
  if (cfg.target_identity) elements.push_back({"tw", target_word, 1.0});
  if (cfg.pair_count) {
    for (const Bucket& b :
         bucketize(pair_count, cfg.double_bucket_pair_count)) {
      elements.push_back({"ftc", std::to_string(b.bucket), b.weight});
    }
  }
  return elements;
}

}  // namespace

WeightTable::WeightTable(int table_bits, uint64_t seed)
    : hash_seed(seed), bits(table_bits) {
  if (table_bits < 1 || table_bits > 34) {
    throw ConfigError("weight table bits out of range");
  }
  weights.assign(size_t{1} << table_bits, 0.0);
}

void MetafeatureConfig::validate() const {
  if (!feature_identity && !feature_type && !feature_count &&
      !target_identity && !pair_count) {
    throw ConfigError("at least one metafeature must be enabled");
  }
}

std::vector<Bucket> bucketize(int64_t count, bool double_bucket) {
  if (count < 1) throw ConfigError("bucketize requires count >= 1");
  double log2c = std::log2(static_cast<double>(count));
  int floored = 0;
  for (int64_t c = count; c > 1; c >>= 1) ++floored;
  double lost = log2c - floored;  // in [0,1)
  if (!double_bucket || lost == 0.0) {
    return {{floored, 1.0}};
  }
  return {{floored, 1.0 - lost}, {floored + 1, lost}};
}

std::vector<WeightedMetafeature> enumerate_metafeatures(
    const Feature& feature, const std::string& target_word,
    int64_t feature_total, int64_t pair_count, const MetafeatureConfig& cfg) {
  std::vector<Element> elements =
      build_elements(feature, target_word, feature_total, pair_count, cfg);

  std::vector<WeightedMetafeature> out;
  std::string key = "mf";
  auto dfs = [&](auto&& self, size_t idx, double weight, bool any) -> void {
    if (idx == elements.size()) {
      if (any) out.push_back({key, weight});
      return;
    }
    self(self, idx + 1, weight, any);  // skip element idx
    size_t mark = key.size();
    key += '|';
    key += elements[idx].label;
    key += '=';
    key += elements[idx].value;
    self(self, idx + 1, weight * elements[idx].weight, true);
    key.resize(mark);
  };
  dfs(dfs, 0, 1.0, false);
  return out;
}

void enumerate_slots(const Feature& feature, const std::string& target_word,
                     int64_t feature_total, int64_t pair_count,
                     const MetafeatureConfig& cfg, const WeightTable& table,
                     std::vector<SlotWeight>* out) {
  std::vector<Element> elements =
      build_elements(feature, target_word, feature_total, pair_count, cfg);

  KeyHasher hasher(table.hash_seed);
  hasher.update("mf");
  auto dfs = [&](auto&& self, size_t idx, double weight, bool any) -> void {
    if (idx == elements.size()) {
      if (any) out->push_back({table.slot_of(hasher.value()), weight});
      return;
    }
    self(self, idx + 1, weight, any);
    uint64_t saved = hasher.value();
    hasher.update('|');
    hasher.update(elements[idx].label);
    hasher.update('=');
    hasher.update(elements[idx].value);
    self(self, idx + 1, weight * elements[idx].weight, true);
    hasher.reset_to(saved);
  };
  dfs(dfs, 0, 1.0, false);
}

double adjustment(const Feature& feature, const std::string& target_word,
                  int64_t feature_total, int64_t pair_count,
                  const WeightTable& table, const MetafeatureConfig& cfg) {
  std::vector<SlotWeight> slots;
  enumerate_slots(feature, target_word, feature_total, pair_count, cfg, table,
                  &slots);
  double a = 0.0;
  for (const SlotWeight& sw : slots) a += sw.weight * table.weights[sw.slot];
  return a;
}

}  // namespace snm
