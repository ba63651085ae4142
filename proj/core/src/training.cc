#include "cascade/training.h"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "cascade/errors.h"

namespace cascade {
namespace {

struct Selection {
  bool type = true;
  bool trigger = true;
  bool argument = true;
};

struct InstanceTerms {
  Var type;
  Var trigger;
  Var argument;
};

Var Zero(Tape& tape) { return tape.Constant(Matrix::Zero(1, 1)); }

Var SumAll(Tape& tape, const std::vector<Var>& terms) {
  if (terms.empty()) return Zero(tape);
  Var acc = terms.front();
  for (size_t i = 1; i < terms.size(); ++i) acc = Add(acc, terms[i]);
  return acc;
}

// Indices of the targets that enter the loss.
std::vector<size_t> Pick(size_t count, bool sample, std::mt19937_64* rng) {
  std::vector<size_t> idx(count);
  std::iota(idx.begin(), idx.end(), size_t{0});
  if (sample && count > 1) {
    if (rng == nullptr) throw ArgumentError("condition sampling needs an rng");
    std::uniform_int_distribution<size_t> pick(0, count - 1);
    idx = {pick(*rng)};
  }
  return idx;
}

InstanceTerms ComputeTerms(Tape& tape, const CascadeModel& model, const TrainingInstance& inst,
                           const Selection& sel, bool training, std::mt19937_64* rng,
                           const LossOptions& options) {
  const EncoderOutput encoded = model.Encode(tape, inst.token_ids, training, rng);
  InstanceTerms out;
  out.type = Zero(tape);
  out.trigger = Zero(tape);
  out.argument = Zero(tape);
  if (sel.type) {
    Var probs = model.type_detector().TypeProbabilities(model.TypeEmbeddings(tape), encoded);
    out.type = BinaryCrossEntropy(probs, inst.type_labels, options.clamp);
  }
  if (!sel.trigger && !sel.argument) return out;

  std::map<int, TriggerExtractor::Conditioned> by_type;
  auto condition = [&](int type) -> const TriggerExtractor::Conditioned& {
    auto it = by_type.find(type);
    if (it == by_type.end()) {
      it = by_type
               .emplace(type, model.trigger_extractor().ConditionOnType(
                                  encoded.states, model.TypeEmbedding(tape, type)))
               .first;
    }
    return it->second;
  };

  if (sel.trigger) {
    std::vector<Var> terms;
    for (size_t k : Pick(inst.triggers.size(), options.sample_conditions, rng)) {
      const TriggerTarget& t = inst.triggers[k];
      const auto tagged = model.trigger_extractor().Tag(condition(t.type).refined);
      terms.push_back(Add(BinaryCrossEntropy(tagged.start, t.start, options.clamp),
                          BinaryCrossEntropy(tagged.end, t.end, options.clamp)));
    }
    if (options.negative_types > 0) {
      if (rng == nullptr) throw ArgumentError("negative type sampling needs an rng");
      std::vector<int> absent, drawn;
      for (int t = 0; t < static_cast<int>(inst.type_labels.rows()); ++t) {
        if (inst.type_labels(t, 0) < 0.5) absent.push_back(t);
      }
      std::sample(absent.begin(), absent.end(), std::back_inserter(drawn),
                  static_cast<size_t>(options.negative_types), *rng);
      const Matrix zeros = Matrix::Zero(inst.length(), 1);
      for (int t : drawn) {
        const auto tagged = model.trigger_extractor().Tag(condition(t).refined);
        terms.push_back(Add(BinaryCrossEntropy(tagged.start, zeros, options.clamp),
                            BinaryCrossEntropy(tagged.end, zeros, options.clamp)));
      }
    }
    out.trigger = SumAll(tape, terms);
  }
  if (sel.argument) {
    std::vector<Var> terms;
    for (size_t k : Pick(inst.arguments.size(), options.sample_conditions, rng)) {
      const ArgumentTarget& a = inst.arguments[k];
      const auto& extractor = model.argument_extractor();
      Var z = extractor.ConditionOnTrigger(condition(a.type).fused, a.trigger);
      const auto tagged = extractor.Tag(z, model.IndicatorEmbedding(tape, a.type));
      terms.push_back(Add(BinaryCrossEntropy(tagged.start, a.start, options.clamp),
                          BinaryCrossEntropy(tagged.end, a.end, options.clamp)));
    }
    out.argument = SumAll(tape, terms);
  }
  return out;
}

std::string BatchIds(std::span<const TrainingInstance* const> batch) {
  std::ostringstream os;
  for (size_t i = 0; i < batch.size(); ++i) os << (i ? ", " : "") << batch[i]->sentence_id;
  return os.str();
}

LossBreakdown BatchLoss(Tape& tape, const CascadeModel& model,
                        std::span<const TrainingInstance* const> batch, const Selection& sel,
                        bool training, std::mt19937_64* rng, const LossOptions& options) {
  if (batch.empty()) throw ArgumentError("empty batch");
  std::vector<Var> type, trigger, argument;
  for (const TrainingInstance* inst : batch) {
    InstanceTerms t = ComputeTerms(tape, model, *inst, sel, training, rng, options);
    type.push_back(t.type);
    trigger.push_back(t.trigger);
    argument.push_back(t.argument);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  LossBreakdown out;
  out.type = Scale(SumAll(tape, type), inv);
  out.trigger = Scale(SumAll(tape, trigger), inv);
  out.argument = Scale(SumAll(tape, argument), inv);
  out.total = Add(Add(out.type, out.trigger), out.argument);
  if (!std::isfinite(out.total.scalar())) {
    throw NumericError("non-finite loss (type " + std::to_string(out.type.scalar()) +
                       ", trigger " + std::to_string(out.trigger.scalar()) + ", argument " +
                       std::to_string(out.argument.scalar()) + ") on batch [" +
                       BatchIds(batch) + "]");
  }
  return out;
}

std::vector<Matrix> Snapshot(const ParameterStore& store) {
  std::vector<Matrix> out;
  for (const Parameter* p : store.All()) out.push_back(p->value);
  return out;
}

void Restore(ParameterStore& store, const std::vector<Matrix>& values) {
  auto params = store.All();
  for (size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

}  // namespace

std::vector<TrainingInstance> BuildInstances(const Corpus& corpus, const Vocabulary& vocab) {
  const EventSchema& schema = corpus.schema;
  const int num_types = schema.num_types();
  const int num_roles = schema.num_roles();
  std::vector<TrainingInstance> out;
  out.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) {
    const int n = s.size();
    TrainingInstance inst;
    inst.sentence_id = s.id;
    inst.token_ids = vocab.Encode(s.tokens);
    inst.type_labels = Matrix::Zero(num_types, 1);

    std::map<int, std::set<Span>> triggers;  // type -> trigger spans
    std::map<std::pair<int, Span>, std::vector<const EventRecord*>> conditions;
    for (const auto& e : s.events) {
      const int t = *schema.TypeIndex(e.type);
      inst.type_labels(t, 0) = 1.0;
      triggers[t].insert(e.trigger);
      conditions[{t, e.trigger}].push_back(&e);
    }
    for (const auto& [type, spans] : triggers) {
      TriggerTarget target{type, Matrix::Zero(n, 1), Matrix::Zero(n, 1)};
      for (const Span& sp : spans) {
        target.start(sp.start, 0) = 1.0;
        target.end(sp.end, 0) = 1.0;
      }
      inst.triggers.push_back(std::move(target));
    }
    for (const auto& [key, events] : conditions) {
      ArgumentTarget target{key.first, key.second, Matrix::Zero(n, num_roles),
                            Matrix::Zero(n, num_roles)};
      for (const EventRecord* e : events) {
        for (const auto& a : e->arguments) {
          const int r = *schema.RoleIndex(a.role);
          target.start(a.span.start, r) = 1.0;
          target.end(a.span.end, r) = 1.0;
        }
      }
      inst.arguments.push_back(std::move(target));
    }
    out.push_back(std::move(inst));
  }
  return out;
}

LossBreakdown JointLoss(Tape& tape, const CascadeModel& model,
                        std::span<const TrainingInstance* const> batch, bool training,
                        std::mt19937_64* rng, const LossOptions& options) {
  return BatchLoss(tape, model, batch, Selection{}, training, rng, options);
}

Var TypeLoss(Tape& tape, const CascadeModel& model,
             std::span<const TrainingInstance* const> batch, const LossOptions& options) {
  return BatchLoss(tape, model, batch, {true, false, false}, false, nullptr, options).type;
}

Var TriggerLoss(Tape& tape, const CascadeModel& model,
                std::span<const TrainingInstance* const> batch, const LossOptions& options) {
  return BatchLoss(tape, model, batch, {false, true, false}, false, nullptr, options).trigger;
}

Var ArgumentLoss(Tape& tape, const CascadeModel& model,
                 std::span<const TrainingInstance* const> batch, const LossOptions& options) {
  return BatchLoss(tape, model, batch, {false, false, true}, false, nullptr, options).argument;
}

void AdamW::Step(ParameterStore& store, double encoder_lr, double decoder_lr) {
  auto params = store.All();
  if (m_.size() != params.size()) {
    m_.clear();
    v_.clear();
    for (const Parameter* p : params) {
      m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    const double lr = p.group == ParamGroup::kEncoder ? encoder_lr : decoder_lr;
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p.grad;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * p.grad.cwiseProduct(p.grad);
    if (p.decay && weight_decay_ > 0.0) p.value *= 1.0 - lr * weight_decay_;
    p.value.array() -=
        lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

double LearningRateFactor(int64_t step, int64_t total, double warmup) {
  if (total <= 0) return 1.0;
  const auto warm = static_cast<int64_t>(warmup * static_cast<double>(total));
  if (step < warm) return static_cast<double>(step + 1) / static_cast<double>(warm);
  const double rest = static_cast<double>(std::max<int64_t>(1, total - warm));
  return std::clamp(static_cast<double>(total - step) / rest, 0.0, 1.0);
}

void TrainConfig::Validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (!(encoder_lr > 0.0)) throw ConfigError("encoder_lr must be positive");
  if (!(decoder_lr > 0.0)) throw ConfigError("decoder_lr must be positive");
  if (!(warmup >= 0.0 && warmup <= 1.0)) throw ConfigError("warmup must lie in [0, 1]");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (loss.negative_types < 0) throw ConfigError("negative_types must be non-negative");
}

nlohmann::json EpochMetricsToJson(const EpochMetrics& m) {
  return {{"epoch", m.epoch}, {"train_loss", m.train_loss}, {"ti_f1", m.ti_f1},
          {"tc_f1", m.tc_f1}, {"ai_f1", m.ai_f1},           {"ac_f1", m.ac_f1}};
}

TrainResult Train(CascadeModel& model, const TrainConfig& config, const Corpus& train,
                  const Corpus& valid, const TrainCallbacks& callbacks) {
  config.Validate();
  TrainResult result;
  if (config.epochs == 0) return result;

  const std::vector<TrainingInstance> instances = BuildInstances(train, model.vocab());
  const auto n = static_cast<int64_t>(instances.size());
  const int64_t per_epoch = (n + config.batch_size - 1) / config.batch_size;
  const int64_t total_steps = per_epoch * config.epochs;

  std::mt19937_64 rng(config.seed);
  AdamW optimizer(0.9, 0.999, 1e-8, config.weight_decay);
  ParameterStore& store = model.params();
  std::vector<Matrix> best = Snapshot(store);
  bool have_best = false;

  std::vector<size_t> order(instances.size());
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (int64_t b = 0; b < per_epoch; ++b) {
      std::vector<const TrainingInstance*> batch;
      for (int64_t i = b * config.batch_size; i < std::min(n, (b + 1) * config.batch_size); ++i) {
        batch.push_back(&instances[order[static_cast<size_t>(i)]]);
      }
      store.ZeroGrad();
      Tape tape;
      LossBreakdown loss;
      try {
        loss = JointLoss(tape, model, batch, /*training=*/true, &rng, config.loss);
      } catch (const NumericError&) {
        Restore(store, best);
        throw;
      }
      tape.Backward(loss.total);
      const double f = LearningRateFactor(result.steps, total_steps, config.warmup);
      optimizer.Step(store, config.encoder_lr * f, config.decoder_lr * f);
      ++result.steps;
      loss_sum += loss.total.scalar();
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = per_epoch > 0 ? loss_sum / static_cast<double>(per_epoch) : 0.0;
    if (!valid.sentences.empty()) {
      const EvaluationReport report =
          Score(PredictCorpus(model, valid, config.inference), valid.sentences, config.score);
      m.ti_f1 = report.prf(Group::kAll, Metric::kTI).f1;
      m.tc_f1 = report.prf(Group::kAll, Metric::kTC).f1;
      m.ai_f1 = report.prf(Group::kAll, Metric::kAI).f1;
      m.ac_f1 = report.prf(Group::kAll, Metric::kAC).f1;
    }
    result.history.push_back(m);
    if (callbacks.on_epoch) callbacks.on_epoch(m);

    const bool improved =
        !have_best || (valid.sentences.empty() ? true : m.ac_f1 > result.best_ac_f1);
    if (improved) {
      have_best = true;
      result.best_epoch = epoch;
      result.best_ac_f1 = m.ac_f1;
      best = Snapshot(store);
      if (callbacks.on_best) callbacks.on_best(m);
    }
  }
  Restore(store, best);
  return result;
}

}  // namespace cascade
