#ifndef CASCADE_TRAINING_H_
#define CASCADE_TRAINING_H_

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cascade/autograd.h"
#include "cascade/evaluation.h"
#include "cascade/inference.h"
#include "cascade/model.h"
#include "cascade/schema.h"

namespace cascade {

// Boundary labels for one gold type: 1 at every start (end) of its triggers.
struct TriggerTarget {
  int type = 0;
  Matrix start;  // N x 1
  Matrix end;    // N x 1
};

// Role-wise boundary labels for one gold (type, trigger) condition.
struct ArgumentTarget {
  int type = 0;
  Span trigger;
  Matrix start;  // N x R
  Matrix end;    // N x R
};

// Teacher-forced targets of one sentence.
struct TrainingInstance {
  std::string sentence_id;
  std::vector<int> token_ids;
  Matrix type_labels;  // T x 1
  std::vector<TriggerTarget> triggers;
  std::vector<ArgumentTarget> arguments;

  int length() const { return static_cast<int>(token_ids.size()); }
};

// One instance per sentence, one trigger target per distinct gold type, one
// argument target per distinct gold (type, trigger). Targets are ordered by
// type index, then trigger span.
std::vector<TrainingInstance> BuildInstances(const Corpus& corpus, const Vocabulary& vocab);

struct LossOptions {
  double clamp = 1e-7;
  // Keep one trigger target and one argument target per sentence, drawn with
  // the rng, instead of every gold condition.
  bool sample_conditions = false;
  // Extra trigger conditions per sentence: this many non-gold types, drawn
  // with the rng, whose start/end labels are all 0.
  int negative_types = 0;
};

// Summed cross-entropies averaged over the batch. total = type + trigger +
// argument.
struct LossBreakdown {
  Var total;
  Var type;
  Var trigger;
  Var argument;
};

// Throws NumericError naming the batch sentences when the loss is not finite.
LossBreakdown JointLoss(Tape& tape, const CascadeModel& model,
                        std::span<const TrainingInstance* const> batch, bool training,
                        std::mt19937_64* rng, const LossOptions& options = {});

// Each subtask on its own forward pass. Only meaningful against JointLoss
// when dropout is off (training = false).
Var TypeLoss(Tape& tape, const CascadeModel& model,
             std::span<const TrainingInstance* const> batch, const LossOptions& options = {});
Var TriggerLoss(Tape& tape, const CascadeModel& model,
                std::span<const TrainingInstance* const> batch, const LossOptions& options = {});
Var ArgumentLoss(Tape& tape, const CascadeModel& model,
                 std::span<const TrainingInstance* const> batch,
                 const LossOptions& options = {});

// Adam with decoupled weight decay. The two parameter groups take separate
// learning rates.
class AdamW {
 public:
  AdamW(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8, double weight_decay = 0.01)
      : beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay) {}

  void Step(ParameterStore& store, double encoder_lr, double decoder_lr);
  int64_t steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_, weight_decay_;
  int64_t t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

// Multiplier on the base rate at a 0-based step: linear warmup over the first
// warmup * total steps, then linear decay to 0 at total.
double LearningRateFactor(int64_t step, int64_t total, double warmup);

struct TrainConfig {
  int batch_size = 8;
  int epochs = 20;
  double encoder_lr = 2e-5;
  double decoder_lr = 1e-4;
  double warmup = 0.1;
  double weight_decay = 0.01;
  uint64_t seed = 42;
  LossOptions loss;
  // Validation decoding and scoring.
  InferenceOptions inference;
  ScoreOptions score;

  // Throws ConfigError.
  void Validate() const;
};

struct EpochMetrics {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double ti_f1 = 0.0;
  double tc_f1 = 0.0;
  double ai_f1 = 0.0;
  double ac_f1 = 0.0;

  bool operator==(const EpochMetrics&) const = default;
};

nlohmann::json EpochMetricsToJson(const EpochMetrics& m);

struct TrainResult {
  std::vector<EpochMetrics> history;
  int best_epoch = 0;  // 0 when no epoch ran
  double best_ac_f1 = 0.0;
  int64_t steps = 0;
};

struct TrainCallbacks {
  std::function<void(const EpochMetrics&)> on_epoch;
  // Called after the model holds a new best; the model is in that state.
  std::function<void(const EpochMetrics&)> on_best;
};

// Shuffled mini-batches of sentences, validation after every epoch, and the
// best model by validation AC F1 restored at the end (first epoch wins
// ties). With an empty validation set the last epoch counts as best. On a
// non-finite loss the best weights seen so far are restored and NumericError
// is rethrown.
TrainResult Train(CascadeModel& model, const TrainConfig& config, const Corpus& train,
                  const Corpus& valid, const TrainCallbacks& callbacks = {});

}  // namespace cascade

#endif  // CASCADE_TRAINING_H_
