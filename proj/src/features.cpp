#include "snm/features.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "snm/errors.hpp"

namespace snm {
namespace {

std::string ngram_type(size_t order) { return "ngram:" + std::to_string(order); }

std::string skip_type(int r, int s, int a, bool tied) {
  std::string t = "skip:" + std::to_string(r) + ",";
  t += tied ? "*" : std::to_string(s);
  t += "," + std::to_string(a);
  return t;
}

std::string skip_marker(int s, bool tied) {
  return tied ? "skip-*" : "skip-" + std::to_string(s);
}

std::vector<std::string> split_words(const std::string& body) {
  std::vector<std::string> words;
  std::istringstream in(body);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

}  // namespace

void SkipGramConfig::validate() const {
  if (r_min < 0 || a_min < 0 || ra_min < 0 || s_min < 0) {
    throw ConfigError("skip-gram ranges must be non-negative");
  }
  if (r_min > r_max || a_min > a_max || ra_min > ra_max) {
    throw ConfigError("skip-gram range min exceeds max");
  }
  if (!unbounded_skip() && s_min > s_max) {
    throw ConfigError("skip length min exceeds max");
  }
  bool feasible = false;
  for (int r = r_min; r <= r_max && !feasible; ++r) {
    for (int a = a_min; a <= a_max; ++a) {
      if (r + a >= ra_min && r + a <= ra_max) {
        feasible = true;
        break;
      }
    }
  }
  if (!feasible) throw ConfigError("no (r,a) pair satisfies the ra range");
}

void Template::validate() const {
  if (kind == Kind::Ngram) {
    if (max_order < 1) throw ConfigError("ngram order must be >= 1");
  } else {
    skip.validate();
  }
}

std::string feature_type_of(const std::string& key) {
  if (key.size() < 2 || key.front() != '[' || key.back() != ']') {
    throw InputError("malformed feature key: " + key);
  }
  std::vector<std::string> words = split_words(key.substr(1, key.size() - 2));
  for (size_t k = 0; k < words.size(); ++k) {
    const std::string& w = words[k];
    if (w.rfind("skip-", 0) == 0) {
      std::string s = w.substr(5);
      int r = static_cast<int>(k);
      int a = static_cast<int>(words.size() - k - 1);
      if (s == "*") return skip_type(r, 0, a, true);
      return skip_type(r, std::stoi(s), a, false);
    }
  }
  return ngram_type(words.size() + 1);
}

const Feature& empty_context_feature() {
  static const Feature f{"[]", "ngram:1"};
  return f;
}

std::vector<Feature> extract_ngrams(const Sentence& sentence, size_t position,
                                    int max_order, const Vocabulary& vocab) {
  if (position < 1 || position >= sentence.size()) {
    throw InputError("ngram extraction position out of range");
  }
  if (max_order < 1) throw ConfigError("max_order must be >= 1");

  std::vector<Feature> features;
  features.push_back(empty_context_feature());
  size_t max_context = std::min<size_t>(max_order - 1, position);
  std::string body;
  for (size_t len = 1; len <= max_context; ++len) {
    // Context words position-len .. position-1, built outside-in.
    body.clear();
    for (size_t k = position - len; k < position; ++k) {
      if (!body.empty()) body += ' ';
      body += vocab.word(sentence[k]);
    }
    features.push_back(Feature{"[" + body + "]", ngram_type(len + 1)});
  }
  return features;
}

std::vector<Feature> extract_skipgrams(const Sentence& sentence,
                                       size_t position,
                                       const SkipGramConfig& config,
                                       const Vocabulary& vocab) {
  if (position < 1 || position >= sentence.size()) {
    throw InputError("skip-gram extraction position out of range");
  }
  config.validate();

  std::vector<Feature> features;
  int ctx = static_cast<int>(position);
  int s_hi = config.unbounded_skip() ? ctx : config.s_max;
  for (int r = config.r_min; r <= config.r_max; ++r) {
    for (int a = config.a_min; a <= config.a_max; ++a) {
      if (r + a < config.ra_min || r + a > config.ra_max) continue;
      for (int s = config.s_min; s <= s_hi; ++s) {
        int start = ctx - a - s - r;
        if (start < 0) continue;
        std::string body;
        for (int k = start; k < start + r; ++k) {
          if (!body.empty()) body += ' ';
          body += vocab.word(sentence[k]);
        }
        if (!body.empty()) body += ' ';
        body += skip_marker(s, config.tie_skips);
        for (int k = ctx - a; k < ctx; ++k) {
          body += ' ';
          body += vocab.word(sentence[k]);
        }
        features.push_back(
            Feature{"[" + body + "]", skip_type(r, s, a, config.tie_skips)});
      }
    }
  }
  return features;
}

std::vector<Event> make_events(const Sentence& sentence,
                               const TemplateSet& templates,
                               const Vocabulary& vocab) {
  for (const Template& t : templates) t.validate();

  std::vector<Event> events;
  for (size_t position = 1; position < sentence.size(); ++position) {
    Event event;
    event.target = sentence[position];
    event.features.push_back(empty_context_feature());
    for (const Template& t : templates) {
      std::vector<Feature> extracted =
          t.kind == Template::Kind::Ngram
              ? extract_ngrams(sentence, position, t.max_order, vocab)
              : extract_skipgrams(sentence, position, t.skip, vocab);
      event.features.insert(event.features.end(),
                            std::make_move_iterator(extracted.begin()),
                            std::make_move_iterator(extracted.end()));
    }
    std::sort(event.features.begin(), event.features.end(),
              [](const Feature& a, const Feature& b) { return a.key < b.key; });
    event.features.erase(
        std::unique(event.features.begin(), event.features.end()),
        event.features.end());
    events.push_back(std::move(event));
  }
  return events;
}

TemplateSet parse_templates(std::istream& in) {
  TemplateSet templates;
  std::string line;
  auto parse_range = [](const std::string& spec, int* lo, int* hi,
                        bool star_ok) {
    size_t dots = spec.find("..");
    if (dots == std::string::npos) {
      *lo = *hi = std::stoi(spec);
      return;
    }
    *lo = std::stoi(spec.substr(0, dots));
    std::string upper = spec.substr(dots + 2);
    if (upper == "*") {
      if (!star_ok) throw ConfigError("unbounded range not allowed here");
      *hi = -1;
    } else {
      *hi = std::stoi(upper);
    }
  };

  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string head;
    if (!(fields >> head)) continue;  // blank line
    if (head[0] == '#') continue;
    Template t;
    if (head == "ngram") {
      t.kind = Template::Kind::Ngram;
      std::string kv;
      while (fields >> kv) {
        if (kv.rfind("order=", 0) == 0) {
          t.max_order = std::stoi(kv.substr(6));
        } else {
          throw ConfigError("bad ngram template field: " + kv);
        }
      }
    } else if (head == "skip") {
      t.kind = Template::Kind::Skip;
      std::string kv;
      while (fields >> kv) {
        size_t eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("bad template field: " + kv);
        std::string name = kv.substr(0, eq);
        std::string value = kv.substr(eq + 1);
        if (name == "r") {
          parse_range(value, &t.skip.r_min, &t.skip.r_max, false);
        } else if (name == "s") {
          parse_range(value, &t.skip.s_min, &t.skip.s_max, true);
        } else if (name == "a") {
          parse_range(value, &t.skip.a_min, &t.skip.a_max, false);
        } else if (name == "ra") {
          parse_range(value, &t.skip.ra_min, &t.skip.ra_max, false);
        } else if (name == "tie") {
          t.skip.tie_skips = value != "0";
        } else {
          throw ConfigError("bad skip template field: " + name);
        }
      }
    } else {
      throw ConfigError("unknown template kind: " + head);
    }
    t.validate();
    templates.push_back(t);
  }
  return templates;
}

void format_templates(const TemplateSet& templates, std::ostream& out) {
  for (const Template& t : templates) {
    if (t.kind == Template::Kind::Ngram) {
      out << "ngram order=" << t.max_order << '\n';
    } else {
      const SkipGramConfig& s = t.skip;
      out << "skip r=" << s.r_min << ".." << s.r_max << " s=" << s.s_min
          << "..";
      if (s.unbounded_skip()) {
        out << '*';
      } else {
        out << s.s_max;
      }
      out << " a=" << s.a_min << ".." << s.a_max << " ra=" << s.ra_min << ".."
          << s.ra_max << " tie=" << (s.tie_skips ? 1 : 0) << '\n';
    }
  }
}

}  // namespace snm
