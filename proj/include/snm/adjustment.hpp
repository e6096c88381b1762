#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snm/features.hpp"
#include "snm/hashing.hpp"

namespace snm {

// Flat hash-indexed weight array; collisions are tolerated.
struct WeightTable {
  std::vector<double> weights;
  uint64_t hash_seed = 0;
  int bits = 24;

  WeightTable() = default;
  WeightTable(int table_bits, uint64_t seed);

  size_t size() const { return weights.size(); }
  size_t slot_of(uint64_t hash) const { return hash & (weights.size() - 1); }
  double lookup(uint64_t hash) const { return weights[slot_of(hash)]; }
};

// Which elementary metafeatures participate in the conjunctions.
struct MetafeatureConfig {
  bool feature_identity = true;
  bool feature_type = true;
  bool feature_count = true;
  bool target_identity = true;
  bool pair_count = true;
  bool double_bucket_feature_count = false;
  bool double_bucket_pair_count = false;

  void validate() const;  // throws ConfigError when nothing is enabled
};

struct Bucket {
  int bucket;     // floor or ceil of log2(count)
  double weight;  // weights over one count sum to 1
};

// Single mode: one bucket at floor(log2 c) with weight 1. Double mode adds
// the ceiled bucket; each is weighted by the log2 fraction lost by the other
// rounding, so the floored bucket gets 1 - (log2 c - floor(log2 c)).
// Exact powers of two collapse to a single bucket either way.
std::vector<Bucket> bucketize(int64_t count, bool double_bucket);

struct WeightedMetafeature {
  std::string key;
  double weight;
};

// Every non-empty conjunction of the enabled elementary metafeatures of the
// pair (feature, target) with counts (feature_total, pair_count). A
// double-bucketed count contributes its two bucket variants as separate
// conjunction elements, so 5 single-bucketed elements give 2^5-1 = 31
// conjunctions and double bucketing both counts gives up to 2^7-1 = 127.
// Conjunction weight is the product of its count-element bucket weights.
std::vector<WeightedMetafeature> enumerate_metafeatures(
    const Feature& feature, const std::string& target_word,
    int64_t feature_total, int64_t pair_count, const MetafeatureConfig& cfg);

struct SlotWeight {
  size_t slot;
  double weight;
};

// Same enumeration, but streams bytes through the key hasher instead of
// materializing conjunction strings. Slots are identical to hashing the
// strings from enumerate_metafeatures(). Appends to `out`.
void enumerate_slots(const Feature& feature, const std::string& target_word,
                     int64_t feature_total, int64_t pair_count,
                     const MetafeatureConfig& cfg, const WeightTable& table,
                     std::vector<SlotWeight>* out);

// A(i,j) = sum_k weight_k * theta[slot_k].
double adjustment(const Feature& feature, const std::string& target_word,
                  int64_t feature_total, int64_t pair_count,
                  const WeightTable& table, const MetafeatureConfig& cfg);

}  // namespace snm
