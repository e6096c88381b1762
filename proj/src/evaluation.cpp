#include "snm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "snm/errors.hpp"

namespace snm {

void EvalReport::print(std::ostream& out) const {
  out << "perplexity: " << perplexity << '\n';
  out << "tokens: " << token_count << '\n';
  out << "oov_rate: " << oov_rate << '\n';
  out << "flagged_events: " << flagged_events << '\n';
}

void EvalReport::print_summary(std::ostream& out) const {
  out << "ppl=" << perplexity << " tokens=" << token_count
      << " oov=" << oov_rate << " flagged=" << flagged_events << '\n';
}

SentenceScore sentence_logprob(const SnmModel& model, const Sentence& sentence,
                               std::vector<double>* per_token) {
  SentenceScore score;
  for (size_t position = 1; position < sentence.size(); ++position) {
    std::vector<Feature> features;
    features.push_back(empty_context_feature());
    for (const Template& t : model.templates()) {
      std::vector<Feature> extracted =
          t.kind == Template::Kind::Ngram
              ? extract_ngrams(sentence, position, t.max_order, model.vocab())
              : extract_skipgrams(sentence, position, t.skip, model.vocab());
      features.insert(features.end(), extracted.begin(), extracted.end());
    }
    std::sort(features.begin(), features.end(),
              [](const Feature& a, const Feature& b) { return a.key < b.key; });
    features.erase(std::unique(features.begin(), features.end()),
                   features.end());

    ProbResult p = model.probability(features, sentence[position]);
    score.logprob += std::log(p.p);
    ++score.predicted;
    if (p.floored) ++score.flagged;
    if (sentence[position] == Vocabulary::kUnknown) ++score.oov;
    if (per_token) per_token->push_back(p.p);
  }
  return score;
}

EvalReport perplexity(const SnmModel& model, const std::vector<Sentence>& test,
                      std::vector<double>* per_token) {
  double logprob = 0.0;
  EvalReport report;
  int64_t oov = 0;
  for (const Sentence& s : test) {
    SentenceScore score = sentence_logprob(model, s, per_token);
    logprob += score.logprob;
    report.token_count += score.predicted;
    report.flagged_events += score.flagged;
    oov += score.oov;
  }
  if (report.token_count == 0) throw InputError("empty test set");
  report.perplexity =
      std::exp(-logprob / static_cast<double>(report.token_count));
  report.oov_rate =
      static_cast<double>(oov) / static_cast<double>(report.token_count);
  return report;
}

ProbabilityStream load_stream(std::istream& in) {
  if (in.fail()) throw InputError("unreadable stream file");
  ProbabilityStream stream;
  std::string line;
  while (std::getline(in, line)) {
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    double log10p = std::stod(line.substr(start));
    double p = std::pow(10.0, log10p);
    if (p <= 0.0 || p > 1.0) {
      throw InputError("stream probability out of (0,1]: " + line);
    }
    stream.push_back(p);
  }
  return stream;
}

void save_stream(const ProbabilityStream& stream, std::ostream& out) {
  std::ostream::fmtflags flags = out.flags();
  std::streamsize precision = out.precision();
  out.precision(17);
  for (double p : stream) out << std::log10(p) << '\n';
  out.flags(flags);
  out.precision(precision);
}

EvalReport interpolate(const std::vector<ProbabilityStream>& streams,
                       const std::vector<double>& weights) {
  if (streams.empty() || streams.size() != weights.size()) {
    throw InputError("need one weight per stream");
  }
  size_t n = streams[0].size();
  double weight_sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw InputError("negative interpolation weight");
    weight_sum += w;
  }
  if (std::abs(weight_sum - 1.0) > 1e-9) {
    throw InputError("interpolation weights must sum to 1");
  }
  for (const ProbabilityStream& s : streams) {
    if (s.size() != n) throw InputError("stream length mismatch");
  }
  if (n == 0) throw InputError("empty probability streams");

  double logprob = 0.0;
  for (size_t k = 0; k < n; ++k) {
    double p = 0.0;
    for (size_t m = 0; m < streams.size(); ++m) {
      p += weights[m] * streams[m][k];
    }
    logprob += std::log(p);
  }
  EvalReport report;
  report.token_count = static_cast<int64_t>(n);
  report.perplexity = std::exp(-logprob / static_cast<double>(n));
  return report;
}

WeightFit optimize_weights(const std::vector<ProbabilityStream>& dev_streams) {
  if (dev_streams.size() < 2) {
    throw InputError("weight optimization needs at least two streams");
  }
  size_t n = dev_streams[0].size();
  for (const ProbabilityStream& s : dev_streams) {
    if (s.size() != n) throw InputError("stream length mismatch");
  }
  if (n == 0) throw InputError("empty probability streams");

  size_t m = dev_streams.size();
  WeightFit fit;
  fit.weights.assign(m, 1.0 / static_cast<double>(m));

  bool all_identical = true;
  for (size_t k = 0; k < n && all_identical; ++k) {
    for (size_t s = 1; s < m; ++s) {
      if (dev_streams[s][k] != dev_streams[0][k]) {
        all_identical = false;
        break;
      }
    }
  }
  if (all_identical) {
    fit.degenerate = true;
    return fit;
  }

  double prev_ll = -std::numeric_limits<double>::infinity();
  std::vector<double> expected(m);
  for (int iter = 0; iter < 200; ++iter) {
    std::fill(expected.begin(), expected.end(), 0.0);
    double ll = 0.0;
    for (size_t k = 0; k < n; ++k) {
      double mix = 0.0;
      for (size_t s = 0; s < m; ++s) mix += fit.weights[s] * dev_streams[s][k];
      ll += std::log(mix);
      for (size_t s = 0; s < m; ++s) {
        expected[s] += fit.weights[s] * dev_streams[s][k] / mix;
      }
    }
    for (size_t s = 0; s < m; ++s) {
      fit.weights[s] = expected[s] / static_cast<double>(n);
    }
    fit.iterations = iter + 1;
    if ((ll - prev_ll) / static_cast<double>(n) < 1e-10 && iter > 0) break;
    prev_ll = ll;
  }
  return fit;
}

}  // namespace snm
