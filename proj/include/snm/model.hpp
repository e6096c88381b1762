#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "snm/adjustment.hpp"
#include "snm/counts.hpp"
#include "snm/features.hpp"
#include "snm/vocabulary.hpp"

namespace snm {

struct ProbResult {
  double p = 0.0;
  bool floored = false;  // all features unknown, floor probability used
};

// Counts + weight table + configuration, with precomputed row sums. Entries
// are M_ij = exp(A(i,j)) * C_ij / C_i*; scores and probabilities follow.
class SnmModel {
public:
  SnmModel() = default;
  SnmModel(Vocabulary vocab, TemplateSet templates, CountStore counts,
           WeightTable table, MetafeatureConfig mf_config);

  const Vocabulary& vocab() const { return vocab_; }
  const TemplateSet& templates() const { return templates_; }
  const CountStore& counts() const { return counts_; }
  const WeightTable& table() const { return table_; }
  WeightTable& mutable_table();  // invalidates row sums
  const MetafeatureConfig& mf_config() const { return mf_config_; }
  bool finalized() const { return finalized_; }
  const std::vector<double>& row_sums() const { return row_sums_; }

  double adjustment_of(int32_t i, WordId j) const;
  double adjustment_of(int32_t i, WordId j, int64_t feature_total,
                       int64_t pair_count) const;

  // M_ij; 0 when the pair is unseen. Throws LookupError on unknown feature.
  double entry(int32_t i, WordId j) const;

  // y = M f over the union of the positive rows, as (target, y_j) sorted by
  // target id.
  std::vector<std::pair<WordId, double>> score(
      const std::vector<int32_t>& feature_ids) const;
  std::vector<std::pair<WordId, double>> score(
      const std::vector<Feature>& features) const;

  // P(target | features) = y_t / sum_i row_sums[i], one row-sum lookup per
  // positive feature. Unknown features are dropped; if all drop we back off
  // to the empty-context feature, and if even that is missing the configured
  // floor 1 / (10 |V|) is returned with the floored flag set.
  ProbResult probability(const std::vector<Feature>& features,
                         WordId target) const;
  ProbResult probability_from_ids(const std::vector<int32_t>& feature_ids,
                                  WordId target) const;

  // Drops features unseen in training; backs off to the empty-context
  // feature when everything drops. May return empty only if the store has
  // no empty-context feature at all.
  std::vector<int32_t> resolve_features(
      const std::vector<Feature>& features) const;

  // Computes row_sums[i] = sum_u M_iu for every feature and freezes the
  // model for evaluation.
  void finalize();

  double floor_probability() const;

  // Instrumentation: row-sum lookups performed by probability calls.
  uint64_t row_lookup_count() const { return row_lookups_; }
  void reset_row_lookup_count() { row_lookups_ = 0; }

  void save(std::ostream& out) const;
  static SnmModel load(std::istream& in);

private:
  Feature feature_at(int32_t i) const;

  Vocabulary vocab_;
  TemplateSet templates_;
  CountStore counts_;
  WeightTable table_;
  MetafeatureConfig mf_config_;
  std::vector<double> row_sums_;
  bool finalized_ = false;
  mutable uint64_t row_lookups_ = 0;
};

}  // namespace snm
