#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "snm/model.hpp"

namespace snm {

struct EvalReport {
  double perplexity = 0.0;
  int64_t token_count = 0;
  double oov_rate = 0.0;
  int64_t flagged_events = 0;  // zero-denominator events floored

  void print(std::ostream& out) const;      // key: value lines
  void print_summary(std::ostream& out) const;  // one machine-readable line
};

struct SentenceScore {
  double logprob = 0.0;  // natural log
  int64_t predicted = 0;
  int64_t oov = 0;
  int64_t flagged = 0;
};

// Sum of log P over every predicted position (sentence-end included,
// sentence-begin never predicted). Optionally appends the per-token
// probabilities to `per_token`.
SentenceScore sentence_logprob(const SnmModel& model, const Sentence& sentence,
                               std::vector<double>* per_token = nullptr);

// PPL = exp(-1/N sum log P) over all predicted tokens, unknown-token targets
// included. Throws InputError on an empty test set.
EvalReport perplexity(const SnmModel& model,
                      const std::vector<Sentence>& test,
                      std::vector<double>* per_token = nullptr);

// Per-token probabilities aligned with the predicted tokens of a test
// corpus. Held in linear domain; files store log10, one value per line,
// '#' comments allowed.
using ProbabilityStream = std::vector<double>;

ProbabilityStream load_stream(std::istream& in);
void save_stream(const ProbabilityStream& stream, std::ostream& out);

// Perplexity of the per-token mixture sum_m lambda_m p_m. Weights must be
// non-negative and sum to 1 within 1e-9; streams must have equal length.
EvalReport interpolate(const std::vector<ProbabilityStream>& streams,
                       const std::vector<double>& weights);

struct WeightFit {
  std::vector<double> weights;
  int iterations = 0;
  bool degenerate = false;  // identical streams, uniform weights returned
};

// EM for mixture weights, maximizing per-token log-likelihood. Converges
// when the per-token log-likelihood improves by < 1e-10 or after 200
// iterations.
WeightFit optimize_weights(const std::vector<ProbabilityStream>& dev_streams);

}  // namespace snm
