#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "snm/features.hpp"
#include "snm/vocabulary.hpp"

namespace snm {

// Sparse feature-target count matrix plus per-feature totals. Built by
// streaming events through add_event(), then frozen; a frozen store keeps
// each row sorted by target id and is immutable.
class CountStore {
public:
  using Row = std::vector<std::pair<WordId, int64_t>>;

  CountStore() = default;
  explicit CountStore(uint64_t vocab_fingerprint)
      : vocab_fingerprint_(vocab_fingerprint) {}

  int32_t add_feature(const std::string& key);  // get-or-create id
  void add_event(const Event& event);
  // Deserialization path: bulk-add a pair count and bump the total.
  void add_pair_for_load(int32_t i, WordId j, int64_t count);
  void freeze();
  bool frozen() const { return frozen_; }

  int32_t feature_id(const std::string& key) const;  // -1 when absent
  const std::string& key(int32_t i) const;
  int32_t num_features() const { return static_cast<int32_t>(keys_.size()); }
  int64_t num_pairs() const;

  int64_t total(int32_t i) const;                 // C_i*
  int64_t pair_count(int32_t i, WordId j) const;  // C_ij, 0 when absent
  const Row& row(int32_t i) const;                // frozen only

  // C_ij / C_i*. Throws LookupError on an unknown feature id.
  double relative_frequency(int32_t i, WordId j) const;

  uint64_t vocab_fingerprint() const { return vocab_fingerprint_; }

  static CountStore accumulate(const std::vector<Event>& events,
                               uint64_t vocab_fingerprint = 0);

  // Streaming accumulation: events are built per sentence and discarded.
  static CountStore accumulate_corpus(const std::vector<Sentence>& sentences,
                                      const TemplateSet& templates,
                                      const Vocabulary& vocab);

  // Pointwise sum; features re-indexed deterministically (sorted by key).
  // Throws ConfigError when the vocab fingerprints differ.
  static CountStore merge(const CountStore& a, const CountStore& b);

  // Text format: `key<TAB>targetword<TAB>count` lines sorted by (key, word),
  // then a totals section with `*` in the target column.
  void save(std::ostream& out, const Vocabulary& vocab) const;
  static CountStore load(std::istream& in, const Vocabulary& vocab);

private:
  std::unordered_map<std::string, int32_t> index_;
  std::vector<std::string> keys_;
  std::vector<int64_t> totals_;
  std::vector<std::unordered_map<WordId, int64_t>> building_rows_;
  std::vector<Row> rows_;
  bool frozen_ = false;
  uint64_t vocab_fingerprint_ = 0;
};

}  // namespace snm
