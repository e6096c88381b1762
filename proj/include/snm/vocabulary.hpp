#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace snm {

using WordId = int32_t;

// Word <-> id map with three reserved tokens at fixed ids. Built once from a
// counted corpus with a frequency cutoff, then immutable.
class Vocabulary {
public:
  static constexpr WordId kSentenceBegin = 0;
  static constexpr WordId kSentenceEnd = 1;
  static constexpr WordId kUnknown = 2;
  static constexpr WordId kNumReserved = 3;

  // Reserved tokens only; mainly a placeholder before build() or load().
  Vocabulary();

  static const std::string& sentence_begin_word();
  static const std::string& sentence_end_word();
  static const std::string& unknown_word();

  // Reads whitespace-tokenized text, one sentence per line, and keeps every
  // word with count >= min_count. Non-reserved entries are ordered by
  // descending count, ties broken lexicographically.
  static Vocabulary build(std::istream& text, int64_t min_count);

  WordId id(const std::string& word) const;  // kUnknown when absent
  bool contains(const std::string& word) const;
  const std::string& word(WordId id) const;
  int64_t count(WordId id) const;
  int32_t size() const { return static_cast<int32_t>(entries_.size()); }

  // Stable content hash, used to detect mismatched stores at merge time.
  uint64_t fingerprint() const;

  // One `word<TAB>count` line per entry, in id order.
  void save(std::ostream& out) const;
  static Vocabulary load(std::istream& in);

private:
  void add_entry(std::string word, int64_t count);

  std::vector<std::pair<std::string, int64_t>> entries_;
  std::unordered_map<std::string, WordId> index_;
};

// Token-id sequence bracketed by sentence-begin / sentence-end.
using Sentence = std::vector<WordId>;

Sentence tokenize(const std::string& line, const Vocabulary& vocab);
std::vector<std::string> detokenize(const Sentence& sentence,
                                    const Vocabulary& vocab);

// Unknown-token fraction over predicted tokens (sentence-begin excluded from
// the denominator). Throws InputError when there are no predicted tokens.
double oov_rate(const std::vector<Sentence>& sentences);

std::vector<Sentence> tokenize_file(std::istream& text,
                                    const Vocabulary& vocab);

}  // namespace snm
