#include "snm/vocabulary.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "snm/errors.hpp"
#include "snm/hashing.hpp"

namespace snm {

const std::string& Vocabulary::sentence_begin_word() {
  static const std::string w = "<S>";
  return w;
}

const std::string& Vocabulary::sentence_end_word() {
  static const std::string w = "</S>";
  return w;
}

const std::string& Vocabulary::unknown_word() {
  static const std::string w = "<UNK>";
  return w;
}

Vocabulary::Vocabulary() {
  add_entry(sentence_begin_word(), 0);
  add_entry(sentence_end_word(), 0);
  add_entry(unknown_word(), 0);
}

void Vocabulary::add_entry(std::string word, int64_t count) {
  WordId id = static_cast<WordId>(entries_.size());
  index_.emplace(word, id);
  entries_.emplace_back(std::move(word), count);
}

Vocabulary Vocabulary::build(std::istream& text, int64_t min_count) {
  if (min_count < 1) throw ConfigError("min_count must be >= 1");
  if (text.fail()) throw InputError("unreadable corpus stream");

  std::unordered_map<std::string, int64_t> counts;
  int64_t sentences = 0;
  std::string line, token;
  while (std::getline(text, line)) {
    ++sentences;
    std::istringstream words(line);
    while (words >> token) ++counts[token];
  }
  if (text.bad()) throw InputError("error while reading corpus stream");

  std::vector<std::pair<std::string, int64_t>> kept;
  kept.reserve(counts.size());
  for (auto& [word, count] : counts) {
    if (count >= min_count && word != sentence_begin_word() &&
        word != sentence_end_word() && word != unknown_word()) {
      kept.emplace_back(word, count);
    }
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary vocab;
  // Boundary markers occur once per sentence by construction.
  vocab.entries_[kSentenceBegin].second = sentences;
  vocab.entries_[kSentenceEnd].second = sentences;
  for (auto& [word, count] : kept) vocab.add_entry(std::move(word), count);
  return vocab;
}

WordId Vocabulary::id(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnknown : it->second;
}

bool Vocabulary::contains(const std::string& word) const {
  return index_.count(word) > 0;
}

const std::string& Vocabulary::word(WordId id) const {
  if (id < 0 || id >= size()) throw LookupError("word id out of range");
  return entries_[id].first;
}

int64_t Vocabulary::count(WordId id) const {
  if (id < 0 || id >= size()) throw LookupError("word id out of range");
  return entries_[id].second;
}

uint64_t Vocabulary::fingerprint() const {
  KeyHasher h(0x5eed);
  for (const auto& [word, count] : entries_) {
    h.update(word);
    h.update('\n');
    h.update(std::to_string(count));
    h.update('\n');
  }
  return h.value();
}

void Vocabulary::save(std::ostream& out) const {
  for (const auto& [word, count] : entries_) {
    out << word << '\t' << count << '\n';
  }
}

Vocabulary Vocabulary::load(std::istream& in) {
  Vocabulary vocab;
  std::string line;
  WordId id = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) throw InputError("bad vocabulary line: " + line);
    std::string word = line.substr(0, tab);
    int64_t count = std::stoll(line.substr(tab + 1));
    if (id < kNumReserved) {
      if (word != vocab.entries_[id].first) {
        throw InputError("vocabulary file missing reserved token at id " +
                         std::to_string(id));
      }
      vocab.entries_[id].second = count;
    } else {
      if (vocab.index_.count(word)) throw InputError("duplicate word: " + word);
      vocab.add_entry(std::move(word), count);
    }
    ++id;
  }
  if (id < kNumReserved) throw InputError("vocabulary file truncated");
  return vocab;
}

Sentence tokenize(const std::string& line, const Vocabulary& vocab) {
  Sentence sentence;
  sentence.push_back(Vocabulary::kSentenceBegin);
  std::istringstream words(line);
  std::string token;
  while (words >> token) {
    if (token == Vocabulary::sentence_begin_word() ||
        token == Vocabulary::sentence_end_word()) {
      continue;  // boundaries are implicit
    }
    sentence.push_back(vocab.id(token));
  }
  sentence.push_back(Vocabulary::kSentenceEnd);
  return sentence;
}

std::vector<std::string> detokenize(const Sentence& sentence,
                                    const Vocabulary& vocab) {
  std::vector<std::string> words;
  for (size_t k = 1; k + 1 < sentence.size(); ++k) {
    words.push_back(vocab.word(sentence[k]));
  }
  return words;
}

double oov_rate(const std::vector<Sentence>& sentences) {
  int64_t predicted = 0;
  int64_t unknown = 0;
  for (const Sentence& s : sentences) {
    for (size_t k = 1; k < s.size(); ++k) {
      ++predicted;
      if (s[k] == Vocabulary::kUnknown) ++unknown;
    }
  }
  if (predicted == 0) throw InputError("oov_rate: no predicted tokens");
  return static_cast<double>(unknown) / static_cast<double>(predicted);
}

std::vector<Sentence> tokenize_file(std::istream& text,
                                    const Vocabulary& vocab) {
  if (text.fail()) throw InputError("unreadable text stream");
  std::vector<Sentence> sentences;
  std::string line;
  while (std::getline(text, line)) {
    sentences.push_back(tokenize(line, vocab));
  }
  return sentences;
}

}  // namespace snm
