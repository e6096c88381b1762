#pragma once

#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "snm/model.hpp"

namespace snm {

struct TrainerConfig {
  // Each A(i,j) moves by roughly 31x the per-slot step (one step per active
  // conjunction), so rates much above this destabilize training.
  double learning_rate = 0.01;
  int epochs = 1;
  bool leave_one_out = true;
  uint64_t shuffle_seed = 1;
  bool deterministic = true;
  int workers = 1;            // > 1 only when deterministic == false
  int64_t log_every = 200000; // progress lines; 0 disables

  void validate() const;
};

// L = sum_u y_u - log(y_t). The full-vocabulary first term comes in via the
// caller (row sums during evaluation, event-local sums during tests).
// Returns +inf when y_t == 0.
double poisson_loss(double sum_y, double y_t);

// Aggregated positive-only gradient dL/dA(i,j) for the event's target j:
// M_ij (C_i*/C_ij - 1/y_j). Requires a positive pair; y_j is the score of
// the target under the event's resolved features.
double gradient_aggregated(const SnmModel& model, int32_t feature_id,
                           WordId target, double y_target);

// Leave-one-out gradient, split by the metafeature count arguments each
// term updates: the negative-example share uses counts (C_i*-1, C_ij) and
// the positive example uses (C_i*-1, C_ij-1).
struct LooGradient {
  double negative_term = 0.0;  // applied at alpha_k(i,j,C_i*-1,C_ij)
  double positive_term = 0.0;  // applied at alpha_k(i,j,C_i*-1,C_ij-1)
  bool skipped = false;        // singleton feature (C_i* == 1)

  double total() const { return negative_term + positive_term; }
};

// y_prime_target is the leave-one-out score sum_i M'_ij with
// M'_ij = exp(A(i,j,C_i*-1,C_ij-1)) (C_ij-1)/(C_i*-1); see
// loo_score_target().
LooGradient gradient_leave_one_out(const SnmModel& model, int32_t feature_id,
                                   WordId target, double y_prime_target);

double loo_score_target(const SnmModel& model,
                        const std::vector<int32_t>& feature_ids,
                        WordId target);

// SGD over events: per epoch, iterate events in shuffled order and update
// every metafeature slot of every positive pair with
// theta -= learning_rate * bucket_weight * gradient. Finalizes the model.
// Events must come from the same corpus the counts were accumulated on.
void train(const std::vector<Event>& events, SnmModel* model,
           const TrainerConfig& cfg, std::ostream* log = nullptr);

// Same, but builds events sentence by sentence and keeps only resolved
// feature ids in memory.
void train_corpus(const std::vector<Sentence>& sentences, SnmModel* model,
                  const TrainerConfig& cfg, std::ostream* log = nullptr);

// Per-slot gradient sums of the aggregated positive-only route at fixed
// theta (no updates). Exists for the batch-equivalence checks.
std::unordered_map<size_t, double> accumulate_batch_gradients(
    const std::vector<Event>& events, const SnmModel& model);

}  // namespace snm
