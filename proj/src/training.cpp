#include "snm/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include "snm/errors.hpp"

namespace snm {
namespace {

struct ResolvedEvent {
  std::vector<int32_t> feature_ids;  // canonical key order
  WordId target;
};

std::vector<ResolvedEvent> resolve_events(const std::vector<Event>& events,
                                          const SnmModel& model) {
  std::vector<ResolvedEvent> resolved;
  resolved.reserve(events.size());
  for (const Event& e : events) {
    ResolvedEvent r;
    r.target = e.target;
    for (const Feature& f : e.features) {
      int32_t i = model.counts().feature_id(f.key);
      if (i >= 0) r.feature_ids.push_back(i);
    }
    resolved.push_back(std::move(r));
  }
  return resolved;
}

// Per-feature cached key/type so the hot loop does not re-parse keys.
class FeatureCache {
public:
  explicit FeatureCache(const CountStore& counts) : counts_(counts) {
    types_.resize(counts.num_features());
  }

  Feature get(int32_t i) {
    if (types_[i].empty()) types_[i] = feature_type_of(counts_.key(i));
    return Feature{counts_.key(i), types_[i]};
  }

private:
  const CountStore& counts_;
  std::vector<std::string> types_;
};

class Sgd {
public:
  Sgd(SnmModel* model, const TrainerConfig& cfg)
      : model_(model),
        cfg_(cfg),
        table_(model->mutable_table()),
        cache_(model->counts()) {}

  // One event; returns -log of the target score for progress reporting.
  double step(const ResolvedEvent& event) {
    const CountStore& counts = model_->counts();
    slots_.clear();
    if (!cfg_.leave_one_out) {
      double y_t = 0.0;
      entries_.clear();
      for (int32_t i : event.feature_ids) {
        int64_t c_ij = counts.pair_count(i, event.target);
        if (c_ij == 0) continue;  // event not from the counts corpus
        int64_t c_i = counts.total(i);
        size_t begin = slots_.size();
        enumerate_slots(cache_.get(i), model_->vocab().word(event.target), c_i,
                        c_ij, model_->mf_config(), table_, &slots_);
        double m = std::exp(slot_sum_range(begin, slots_.size())) *
                   static_cast<double>(c_ij) / static_cast<double>(c_i);
        entries_.push_back({begin, slots_.size(), m, c_i, c_ij, i});
        y_t += m;
      }
      for (const PairEntry& pe : entries_) {
        double g = pe.m * (static_cast<double>(pe.c_i) /
                               static_cast<double>(pe.c_ij) -
                           1.0 / y_t);
        apply(pe.begin, pe.end, g);
      }
      return -std::log(y_t);
    }

    // Leave-one-out: positive-example variants first, to get y'.
    entries_.clear();
    double y_prime = 0.0;
    for (int32_t i : event.feature_ids) {
      int64_t c_i = counts.total(i);
      int64_t c_ij = counts.pair_count(i, event.target);
      PairEntry pe{0, 0, 0.0, c_i, c_ij, i};
      if (c_i >= 2 && c_ij >= 2) {
        pe.begin = slots_.size();
        enumerate_slots(cache_.get(i), model_->vocab().word(event.target),
                        c_i - 1, c_ij - 1, model_->mf_config(), table_,
                        &slots_);
        pe.end = slots_.size();
        pe.m = std::exp(slot_sum_range(pe.begin, pe.end)) *
               static_cast<double>(c_ij - 1) / static_cast<double>(c_i - 1);
        y_prime += pe.m;
      }
      entries_.push_back(pe);
    }

    for (size_t k = 0; k < entries_.size(); ++k) {
      const PairEntry& pe = entries_[k];
      if (pe.c_i < 2 || pe.c_ij < 1) continue;  // singleton or foreign pair
      int32_t i = entries_[k].id;
      if (pe.c_i > pe.c_ij) {
        size_t begin = slots_.size();
        enumerate_slots(cache_.get(i), model_->vocab().word(event.target),
                        pe.c_i - 1, pe.c_ij, model_->mf_config(), table_,
                        &slots_);
        double g = static_cast<double>(pe.c_i - pe.c_ij) /
                   static_cast<double>(pe.c_i - 1) *
                   std::exp(slot_sum_range(begin, slots_.size()));
        apply(begin, slots_.size(), g);
        slots_.resize(begin);
      }
      if (pe.c_ij >= 2 && y_prime > 0.0) {
        double g = pe.m * (y_prime - 1.0) / y_prime;
        apply(pe.begin, pe.end, g);
      }
    }
    return y_prime > 0.0 ? -std::log(y_prime)
                         : std::numeric_limits<double>::quiet_NaN();
  }

private:
  struct PairEntry {
    size_t begin, end;  // slot range of the cached variant
    double m;
    int64_t c_i, c_ij;
    int32_t id;
  };

  double slot_sum_range(size_t begin, size_t end) const {
    double a = 0.0;
    for (size_t k = begin; k < end; ++k) {
      a += slots_[k].weight * table_.weights[slots_[k].slot];
    }
    return a;
  }

  void apply(size_t begin, size_t end, double gradient) {
    double step = cfg_.learning_rate * gradient;
    for (size_t k = begin; k < end; ++k) {
      table_.weights[slots_[k].slot] -= step * slots_[k].weight;
    }
  }

  SnmModel* model_;
  const TrainerConfig& cfg_;
  WeightTable& table_;
  FeatureCache cache_;
  std::vector<SlotWeight> slots_;
  std::vector<PairEntry> entries_;
};

}  // namespace

void TrainerConfig::validate() const {
  if (learning_rate < 0.0) throw ConfigError("learning rate must be >= 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (deterministic && workers > 1) {
    throw ConfigError("deterministic mode requires a single worker");
  }
}

double poisson_loss(double sum_y, double y_t) {
  if (y_t <= 0.0) return std::numeric_limits<double>::infinity();
  return sum_y - std::log(y_t);
}

double gradient_aggregated(const SnmModel& model, int32_t feature_id,
                           WordId target, double y_target) {
  const CountStore& counts = model.counts();
  int64_t c_ij = counts.pair_count(feature_id, target);
  if (c_ij == 0) {
    throw ConfigError("aggregated gradient requires a positive pair");
  }
  int64_t c_i = counts.total(feature_id);
  double m = model.entry(feature_id, target);
  return m * (static_cast<double>(c_i) / static_cast<double>(c_ij) -
              1.0 / y_target);
}

double loo_score_target(const SnmModel& model,
                        const std::vector<int32_t>& feature_ids,
                        WordId target) {
  const CountStore& counts = model.counts();
  double y_prime = 0.0;
  for (int32_t i : feature_ids) {
    int64_t c_i = counts.total(i);
    int64_t c_ij = counts.pair_count(i, target);
    if (c_i < 2 || c_ij < 2) continue;
    double a = model.adjustment_of(i, target, c_i - 1, c_ij - 1);
    y_prime += std::exp(a) * static_cast<double>(c_ij - 1) /
               static_cast<double>(c_i - 1);
  }
  return y_prime;
}

LooGradient gradient_leave_one_out(const SnmModel& model, int32_t feature_id,
                                   WordId target, double y_prime_target) {
  const CountStore& counts = model.counts();
  int64_t c_ij = counts.pair_count(feature_id, target);
  if (c_ij == 0) {
    throw ConfigError("leave-one-out gradient requires a positive pair");
  }
  int64_t c_i = counts.total(feature_id);
  LooGradient g;
  if (c_i < 2) {
    g.skipped = true;
    return g;
  }
  if (c_i > c_ij) {
    double a_neg = model.adjustment_of(feature_id, target, c_i - 1, c_ij);
    g.negative_term = static_cast<double>(c_i - c_ij) /
                      static_cast<double>(c_i - 1) * std::exp(a_neg);
  }
  if (c_ij >= 2 && y_prime_target > 0.0) {
    double a_pos = model.adjustment_of(feature_id, target, c_i - 1, c_ij - 1);
    double m_prime = std::exp(a_pos) * static_cast<double>(c_ij - 1) /
                     static_cast<double>(c_i - 1);
    g.positive_term = m_prime * (y_prime_target - 1.0) / y_prime_target;
  }
  return g;
}

namespace {

void run_sgd(std::vector<ResolvedEvent>&& resolved, SnmModel* model,
             const TrainerConfig& cfg, std::ostream* log) {
  std::vector<size_t> order(resolved.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::mt19937_64 rng(cfg.shuffle_seed + static_cast<uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);

    if (cfg.workers == 1) {
      Sgd sgd(model, cfg);
      double running = 0.0;
      int64_t seen = 0, logged = 0;
      auto start = std::chrono::steady_clock::now();
      for (size_t idx : order) {
        double nlp = sgd.step(resolved[idx]);
        if (!std::isnan(nlp)) {
          running += nlp;
          ++logged;
        }
        ++seen;
        if (log && cfg.log_every > 0 && seen % cfg.log_every == 0) {
          auto elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
          (*log) << "epoch " << epoch + 1 << " events " << seen
                 << " mean_nlogp "
                 << (logged > 0 ? running / static_cast<double>(logged) : 0.0)
                 << " events_per_sec "
                 << static_cast<int64_t>(static_cast<double>(seen) / elapsed)
                 << '\n';
          running = 0.0;
          logged = 0;
        }
      }
    } else {
      // Hogwild-style: shards of the shuffled order, no locking; lost
      // updates are tolerated the same way hash collisions are.
      std::vector<std::thread> threads;
      size_t shard = (order.size() + cfg.workers - 1) / cfg.workers;
      for (int w = 0; w < cfg.workers; ++w) {
        size_t lo = std::min(order.size(), w * shard);
        size_t hi = std::min(order.size(), lo + shard);
        if (lo >= hi) break;
        threads.emplace_back([model, &cfg, &resolved, &order, lo, hi]() {
          Sgd sgd(model, cfg);
          for (size_t k = lo; k < hi; ++k) sgd.step(resolved[order[k]]);
        });
      }
      for (std::thread& t : threads) t.join();
    }
  }
  model->finalize();
}

}  // namespace

void train(const std::vector<Event>& events, SnmModel* model,
           const TrainerConfig& cfg, std::ostream* log) {
  cfg.validate();
  run_sgd(resolve_events(events, *model), model, cfg, log);
}

void train_corpus(const std::vector<Sentence>& sentences, SnmModel* model,
                  const TrainerConfig& cfg, std::ostream* log) {
  cfg.validate();
  std::vector<ResolvedEvent> resolved;
  for (const Sentence& s : sentences) {
    for (const Event& e : make_events(s, model->templates(), model->vocab())) {
      ResolvedEvent r;
      r.target = e.target;
      for (const Feature& f : e.features) {
        int32_t i = model->counts().feature_id(f.key);
        if (i >= 0) r.feature_ids.push_back(i);
      }
      resolved.push_back(std::move(r));
    }
  }
  run_sgd(std::move(resolved), model, cfg, log);
}

std::unordered_map<size_t, double> accumulate_batch_gradients(
    const std::vector<Event>& events, const SnmModel& model) {
  std::unordered_map<size_t, double> sums;
  std::vector<SlotWeight> slots;
  for (const Event& e : events) {
    std::vector<int32_t> ids = model.resolve_features(e.features);
    double y_t = 0.0;
    for (int32_t i : ids) y_t += model.entry(i, e.target);
    for (int32_t i : ids) {
      if (model.counts().pair_count(i, e.target) == 0) continue;
      double g = gradient_aggregated(model, i, e.target, y_t);
      slots.clear();
      Feature f{model.counts().key(i), feature_type_of(model.counts().key(i))};
      enumerate_slots(f, model.vocab().word(e.target),
                      model.counts().total(i),
                      model.counts().pair_count(i, e.target),
                      model.mf_config(), model.table(), &slots);
      for (const SlotWeight& sw : slots) sums[sw.slot] += sw.weight * g;
    }
  }
  return sums;
}

}  // namespace snm
