#include <doctest.h>

#include <map>
#include <sstream>

#include "snm/counts.hpp"
#include "snm/errors.hpp"

#include "corpus_gen.hpp"

using namespace snm;

namespace {

Vocabulary vocab_for(const std::string& text) {
  std::istringstream in(text);
  return Vocabulary::build(in, 1);
}

TemplateSet unigram_only() {
  return {Template{Template::Kind::Ngram, 1, {}}};
}

std::vector<Event> events_for(const std::string& text, const TemplateSet& t,
                              const Vocabulary& v) {
  std::istringstream in(text);
  std::vector<Event> events;
  std::string line;
  while (std::getline(in, line)) {
    for (Event& e : make_events(tokenize(line, v), t, v)) {
      events.push_back(std::move(e));
    }
  }
  return events;
}

// Sorted (key, target, count) triples, for index-permutation-insensitive
// comparison.
std::map<std::pair<std::string, WordId>, int64_t> triples(
    const CountStore& store) {
  std::map<std::pair<std::string, WordId>, int64_t> out;
  for (int32_t i = 0; i < store.num_features(); ++i) {
    for (const auto& [target, count] : store.row(i)) {
      out[{store.key(i), target}] = count;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("single event counts once") {
  Event e;
  e.features = {Feature{"[x]", "ngram:2"}};
  e.target = 5;
  CountStore store = CountStore::accumulate({e});
  int32_t i = store.feature_id("[x]");
  REQUIRE(i >= 0);
  CHECK(store.pair_count(i, 5) == 1);
  CHECK(store.total(i) == 1);
}

TEST_CASE("unigram counts over a tiny corpus include sentence-end") {
  Vocabulary v = vocab_for("a a b\n");
  CountStore store =
      CountStore::accumulate(events_for("a a b\n", unigram_only(), v));
  int32_t empty = store.feature_id("[]");
  REQUIRE(empty >= 0);
  CHECK(store.pair_count(empty, v.id("a")) == 2);
  CHECK(store.pair_count(empty, v.id("b")) == 1);
  CHECK(store.pair_count(empty, Vocabulary::kSentenceEnd) == 1);
  CHECK(store.total(empty) == 4);
}

TEST_CASE("totals equal row sums on a generated sample") {
  testgen::CorpusGen gen(5, 60);
  std::string text = gen.corpus(1000);
  Vocabulary v = vocab_for(text);
  TemplateSet templates = {Template{Template::Kind::Ngram, 3, {}}};
  CountStore store = CountStore::accumulate(events_for(text, templates, v));
  for (int32_t i = 0; i < store.num_features(); ++i) {
    int64_t sum = 0;
    for (const auto& [target, count] : store.row(i)) {
      CHECK(count >= 1);
      sum += count;
    }
    CHECK(sum == store.total(i));
  }
}

TEST_CASE("relative frequencies behave and sum to one") {
  Event e1, e2;
  e1.features = {Feature{"[x]", "ngram:2"}};
  e1.target = 3;
  e2 = e1;
  CountStore store = CountStore::accumulate({e1, e2, e1, [] {
                                               Event e;
                                               e.features = {
                                                   Feature{"[x]", "ngram:2"}};
                                               e.target = 4;
                                               return e;
                                             }()});
  int32_t i = store.feature_id("[x]");
  CHECK(store.relative_frequency(i, 3) == doctest::Approx(0.75));
  CHECK(store.relative_frequency(i, 9) == 0.0);
  CHECK_THROWS_AS(store.relative_frequency(99, 3), LookupError);

  testgen::CorpusGen gen(9, 40);
  std::string text = gen.corpus(200);
  Vocabulary v = vocab_for(text);
  TemplateSet templates = {Template{Template::Kind::Ngram, 2, {}}};
  CountStore sampled = CountStore::accumulate(events_for(text, templates, v));
  for (int32_t f = 0; f < sampled.num_features(); ++f) {
    double sum = 0.0;
    for (const auto& [target, count] : sampled.row(f)) {
      sum += sampled.relative_frequency(f, target);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("merge identity and commutativity") {
  testgen::CorpusGen gen(13, 30);
  std::string text = gen.corpus(50);
  Vocabulary v = vocab_for(text);
  TemplateSet templates = {Template{Template::Kind::Ngram, 3, {}}};
  uint64_t fp = v.fingerprint();
  CountStore a = CountStore::accumulate(events_for(text, templates, v), fp);
  CountStore empty = CountStore::accumulate({}, fp);

  CHECK(triples(CountStore::merge(a, empty)) == triples(a));

  testgen::CorpusGen gen2(14, 30);
  std::string text2 = gen2.corpus(50);
  CountStore b = CountStore::accumulate(events_for(text2, templates, v), fp);
  CHECK(triples(CountStore::merge(a, b)) == triples(CountStore::merge(b, a)));
}

TEST_CASE("sharded accumulation equals single pass") {
  testgen::CorpusGen gen(17, 40);
  std::string text = gen.corpus(120);
  Vocabulary v = vocab_for(text);
  TemplateSet templates = {Template{Template::Kind::Ngram, 4, {}}};
  uint64_t fp = v.fingerprint();
  std::vector<Event> events = events_for(text, templates, v);

  CountStore single = CountStore::accumulate(events, fp);
  std::vector<CountStore> shards;
  size_t quarter = events.size() / 4;
  for (int s = 0; s < 4; ++s) {
    size_t lo = s * quarter;
    size_t hi = s == 3 ? events.size() : lo + quarter;
    shards.push_back(CountStore::accumulate(
        std::vector<Event>(events.begin() + lo, events.begin() + hi), fp));
  }
  CountStore merged = CountStore::merge(
      CountStore::merge(shards[0], shards[1]),
      CountStore::merge(shards[2], shards[3]));
  CHECK(triples(merged) == triples(single));
  for (int32_t i = 0; i < merged.num_features(); ++i) {
    int32_t j = single.feature_id(merged.key(i));
    REQUIRE(j >= 0);
    CHECK(merged.total(i) == single.total(j));
  }
}

TEST_CASE("merge rejects mismatched vocabularies") {
  CountStore a = CountStore::accumulate({}, 1);
  CountStore b = CountStore::accumulate({}, 2);
  CHECK_THROWS_AS(CountStore::merge(a, b), ConfigError);
}

TEST_CASE("counts file round trip") {
  testgen::CorpusGen gen(21, 25);
  std::string text = gen.corpus(40);
  Vocabulary v = vocab_for(text);
  TemplateSet templates = {Template{Template::Kind::Ngram, 3, {}}};
  CountStore store =
      CountStore::accumulate(events_for(text, templates, v), v.fingerprint());

  std::ostringstream out;
  store.save(out, v);
  std::istringstream in(out.str());
  CountStore loaded = CountStore::load(in, v);
  CHECK(triples(loaded) == triples(store));

  std::ostringstream out2;
  loaded.save(out2, v);
  CHECK(out.str() == out2.str());
}
