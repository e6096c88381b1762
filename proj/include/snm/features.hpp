#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "snm/vocabulary.hpp"

namespace snm {

// Ranges for the skip-gram extractor: r remote words, a skip of s words,
// a adjacent words, all immediately left of the target. s_max < 0 means
// unbounded. tie_skips replaces the literal skip length with a wildcard in
// the emitted key so features with different skip lengths share counts.
struct SkipGramConfig {
  int r_min = 1;
  int r_max = 1;
  int a_min = 0;
  int a_max = 0;
  int ra_min = 1;
  int ra_max = std::numeric_limits<int>::max();
  int s_min = 1;
  int s_max = -1;  // unbounded
  bool tie_skips = false;

  void validate() const;  // throws ConfigError
  bool unbounded_skip() const { return s_max < 0; }
};

struct Feature {
  std::string key;   // canonical form, e.g. "[brown skip-2 over the lazy]"
  std::string type;  // generating template, e.g. "skip:1,2,3" or "ngram:5"

  bool operator==(const Feature& other) const { return key == other.key; }
};

// Recovers the template identifier from a canonical key. Inverse of what the
// extractors emit, so keys alone are enough to rebuild metafeatures.
std::string feature_type_of(const std::string& key);

const Feature& empty_context_feature();

// One prediction site: active context features plus the observed target.
struct Event {
  std::vector<Feature> features;  // sorted by key, unique, never empty
  WordId target = Vocabulary::kUnknown;
};

// A feature template: either plain n-grams up to max_order, or one
// skip-gram configuration.
struct Template {
  enum class Kind { Ngram, Skip };
  Kind kind = Kind::Ngram;
  int max_order = 1;     // Ngram only
  SkipGramConfig skip;   // Skip only

  void validate() const;
};

using TemplateSet = std::vector<Template>;

// Text config, one template per line:
//   ngram order=K
//   skip r=a..b s=c..d a=e..f ra=g..h tie=0|1     (d may be "*")
TemplateSet parse_templates(std::istream& in);
void format_templates(const TemplateSet& templates, std::ostream& out);

// Left-context n-gram features of length 0..max_order-1, truncated at the
// sentence start. The target sits at `position`; context is strictly left.
std::vector<Feature> extract_ngrams(const Sentence& sentence, size_t position,
                                    int max_order, const Vocabulary& vocab);

// All (r,s,a) placements satisfying the config ranges and fitting inside the
// sentence. No truncation: a placement either fits or is not emitted.
std::vector<Feature> extract_skipgrams(const Sentence& sentence,
                                       size_t position,
                                       const SkipGramConfig& config,
                                       const Vocabulary& vocab);

// One event per predicted token (every token except sentence-begin).
// Features are the union over templates plus the empty-context feature.
std::vector<Event> make_events(const Sentence& sentence,
                               const TemplateSet& templates,
                               const Vocabulary& vocab);

}  // namespace snm
