// Shared fixtures: desk-scale models built from the synthetic corpus.
#pragma once

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "snm/counts.hpp"
#include "snm/features.hpp"
#include "snm/model.hpp"
#include "snm/vocabulary.hpp"

#include "corpus_gen.hpp"

namespace testfix {

using namespace snm;

struct Desk {
  Vocabulary vocab;
  TemplateSet templates;
  std::vector<Sentence> sentences;
  std::vector<Event> events;
  SnmModel model;
};

inline Desk make_desk(uint64_t seed, int vocab_types, int n_sentences,
                      const std::string& templates_text = "ngram order=3\n",
                      int bits = 14, MetafeatureConfig mf = {},
                      int64_t min_count = 1) {
  testgen::CorpusGen gen(seed, vocab_types);
  std::string text = gen.corpus(n_sentences);

  Desk desk;
  {
    std::istringstream in(text);
    desk.vocab = Vocabulary::build(in, min_count);
  }
  {
    std::istringstream in(templates_text);
    desk.templates = parse_templates(in);
  }
  {
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
      desk.sentences.push_back(tokenize(line, desk.vocab));
    }
  }
  for (const Sentence& s : desk.sentences) {
    for (Event& e : make_events(s, desk.templates, desk.vocab)) {
      desk.events.push_back(std::move(e));
    }
  }
  CountStore counts =
      CountStore::accumulate(desk.events, desk.vocab.fingerprint());
  desk.model = SnmModel(desk.vocab, desk.templates, std::move(counts),
                        WeightTable(bits, seed * 31 + 5), mf);
  desk.model.finalize();
  return desk;
}

inline void randomize_table(SnmModel* model, uint64_t seed,
                            double scale = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> w(-scale, scale);
  for (double& slot : model->mutable_table().weights) slot = w(rng);
  model->finalize();
}

}  // namespace testfix
