#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "snm/counts.hpp"
#include "snm/errors.hpp"
#include "snm/evaluation.hpp"
#include "snm/features.hpp"
#include "snm/model.hpp"
#include "snm/training.hpp"
#include "snm/vocabulary.hpp"

namespace py = pybind11;
using namespace snm;

namespace {

Vocabulary build_vocabulary_from_text(const std::string& text,
                                      int64_t min_count) {
  std::istringstream in(text);
  return Vocabulary::build(in, min_count);
}

TemplateSet parse_templates_text(const std::string& text) {
  std::istringstream in(text);
  return parse_templates(in);
}

std::vector<Sentence> tokenize_text(const std::string& text,
                                    const Vocabulary& vocab) {
  std::istringstream in(text);
  return tokenize_file(in, vocab);
}

}  // namespace

PYBIND11_MODULE(_snm, m) {
  m.doc() = "Sparse non-negative matrix language model core";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<InputError>(m, "InputError");
  py::register_exception<snm::LookupError>(m, "SnmLookupError");

  py::class_<Vocabulary>(m, "Vocabulary")
      .def_static("build", &build_vocabulary_from_text, py::arg("text"),
                  py::arg("min_count") = 3)
      .def("id", &Vocabulary::id)
      .def("word", &Vocabulary::word)
      .def("count", &Vocabulary::count)
      .def("__len__", &Vocabulary::size)
      .def("__contains__", &Vocabulary::contains)
      .def("save", [](const Vocabulary& v) {
        std::ostringstream out;
        v.save(out);
        return out.str();
      })
      .def_static("load", [](const std::string& text) {
        std::istringstream in(text);
        return Vocabulary::load(in);
      });
  m.attr("SENTENCE_BEGIN") = int(Vocabulary::kSentenceBegin);
  m.attr("SENTENCE_END") = int(Vocabulary::kSentenceEnd);
  m.attr("UNKNOWN") = int(Vocabulary::kUnknown);

  m.def("tokenize", &tokenize, py::arg("line"), py::arg("vocab"));
  m.def("tokenize_text", &tokenize_text, py::arg("text"), py::arg("vocab"));
  m.def("oov_rate", &oov_rate);

  py::class_<Feature>(m, "Feature")
      .def_readonly("key", &Feature::key)
      .def_readonly("type", &Feature::type);

  py::class_<Event>(m, "Event")
      .def_readonly("features", &Event::features)
      .def_readonly("target", &Event::target);

  py::class_<Template>(m, "Template");
  m.def("parse_templates", &parse_templates_text, py::arg("text"));
  m.def("make_events", &make_events, py::arg("sentence"),
        py::arg("templates"), py::arg("vocab"));

  py::class_<CountStore>(m, "CountStore")
      .def_static("accumulate_corpus", &CountStore::accumulate_corpus)
      .def("num_features", &CountStore::num_features)
      .def("num_pairs", &CountStore::num_pairs)
      .def("feature_id", &CountStore::feature_id)
      .def("total", &CountStore::total)
      .def("pair_count", &CountStore::pair_count)
      .def("relative_frequency", &CountStore::relative_frequency);

  py::class_<MetafeatureConfig>(m, "MetafeatureConfig")
      .def(py::init<>())
      .def_readwrite("feature_identity", &MetafeatureConfig::feature_identity)
      .def_readwrite("feature_type", &MetafeatureConfig::feature_type)
      .def_readwrite("feature_count", &MetafeatureConfig::feature_count)
      .def_readwrite("target_identity", &MetafeatureConfig::target_identity)
      .def_readwrite("pair_count", &MetafeatureConfig::pair_count)
      .def_readwrite("double_bucket_feature_count",
                     &MetafeatureConfig::double_bucket_feature_count)
      .def_readwrite("double_bucket_pair_count",
                     &MetafeatureConfig::double_bucket_pair_count);

  py::class_<WeightTable>(m, "WeightTable")
      .def(py::init<int, uint64_t>(), py::arg("bits"), py::arg("seed"))
      .def_readonly("bits", &WeightTable::bits)
      .def_readonly("hash_seed", &WeightTable::hash_seed);

  py::class_<TrainerConfig>(m, "TrainerConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &TrainerConfig::learning_rate)
      .def_readwrite("epochs", &TrainerConfig::epochs)
      .def_readwrite("leave_one_out", &TrainerConfig::leave_one_out)
      .def_readwrite("shuffle_seed", &TrainerConfig::shuffle_seed)
      .def_readwrite("deterministic", &TrainerConfig::deterministic)
      .def_readwrite("workers", &TrainerConfig::workers)
      .def_readwrite("log_every", &TrainerConfig::log_every);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("perplexity", &EvalReport::perplexity)
      .def_readonly("token_count", &EvalReport::token_count)
      .def_readonly("oov_rate", &EvalReport::oov_rate)
      .def_readonly("flagged_events", &EvalReport::flagged_events);

  py::class_<SnmModel>(m, "SnmModel")
      .def(py::init([](Vocabulary vocab, const std::string& templates,
                       CountStore counts, int bits, uint64_t seed,
                       MetafeatureConfig mf) {
             return SnmModel(std::move(vocab), parse_templates_text(templates),
                             std::move(counts), WeightTable(bits, seed), mf);
           }),
           py::arg("vocab"), py::arg("templates"), py::arg("counts"),
           py::arg("bits") = 20, py::arg("seed") = 42,
           py::arg("mf_config") = MetafeatureConfig())
      .def("finalize", &SnmModel::finalize)
      .def("entry", &SnmModel::entry)
      .def("probability",
           [](const SnmModel& model, const std::vector<Feature>& features,
              WordId target) {
             ProbResult r = model.probability(features, target);
             return py::make_tuple(r.p, r.floored);
           })
      .def("adjustment", py::overload_cast<int32_t, WordId>(
                             &SnmModel::adjustment_of, py::const_))
      .def("save_file",
           [](const SnmModel& model, const std::string& path) {
             std::ofstream out(path, std::ios::binary);
             if (!out) throw InputError("cannot open " + path);
             model.save(out);
           })
      .def_static("load_file", [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw InputError("cannot open " + path);
        return SnmModel::load(in);
      });

  m.def(
      "train_corpus",
      [](const std::vector<Sentence>& sentences, SnmModel* model,
         const TrainerConfig& cfg) { train_corpus(sentences, model, cfg); },
      py::arg("sentences"), py::arg("model"), py::arg("config"));

  m.def("perplexity",
        [](const SnmModel& model, const std::vector<Sentence>& test) {
          return perplexity(model, test);
        });
  m.def("sentence_logprob",
        [](const SnmModel& model, const Sentence& sentence) {
          return sentence_logprob(model, sentence).logprob;
        });
  m.def("interpolate", &interpolate, py::arg("streams"), py::arg("weights"));
  m.def("optimize_weights", [](const std::vector<ProbabilityStream>& streams) {
    WeightFit fit = optimize_weights(streams);
    return py::make_tuple(fit.weights, fit.degenerate, fit.iterations);
  });
}
