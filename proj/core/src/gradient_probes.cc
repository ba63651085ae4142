#include "cascade/gradient_probes.h"

#include <random>

#include "cascade/layers.h"
#include "cascade/model.h"
#include "cascade/training.h"

namespace cascade {
namespace {

constexpr int kDim = 8;
constexpr int kTokens = 6;

Matrix RandomMatrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Matrix RandomLabels(int rows, int cols, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.3);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = coin(rng) ? 1.0 : 0.0;
  return m;
}

// Random linear functional of a module output.
Var Project(Var out, const Matrix& weights) {
  return Sum(Mul(out, out.tape()->Constant(weights)));
}

Parameter* Input(ParameterStore& store, const std::string& name, int rows, int cols,
                 std::mt19937_64& rng) {
  Parameter* p = store.Add(name, rows, cols, Init::kZeros, ParamGroup::kDecoder, false, rng);
  p->value = RandomMatrix(rows, cols, rng);
  return p;
}

template <typename Owned>
GradProbe MakeProbe(std::string name, std::shared_ptr<Owned> owner, ParameterStore& store,
                    LossBuilder loss) {
  GradProbe probe;
  probe.name = std::move(name);
  probe.params = store.All();
  probe.loss = std::move(loss);
  probe.owner = std::move(owner);
  return probe;
}

struct TypeDetectorProbe {
  ParameterStore store;
  TypeDetector detector;
};

struct ClnProbe {
  ParameterStore store;
  ConditionalLayerNorm cln;
};

struct FusionProbe {
  ParameterStore store;
  Fusion fusion;
};

struct AttentionProbe {
  ParameterStore store;
  SelfAttentionBlock block;
};

struct TriggerProbe {
  ParameterStore store;
  TriggerExtractor extractor;
};

struct ArgumentProbe {
  ParameterStore store;
  ArgumentExtractor extractor;
};

struct JointProbe {
  std::unique_ptr<CascadeModel> model;
  std::vector<TrainingInstance> instances;
};

}  // namespace

std::vector<GradProbe> StandardGradProbes(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<GradProbe> probes;

  {
    auto p = std::make_shared<TypeDetectorProbe>();
    p->detector = TypeDetector(p->store, kDim, PoolingMode::kAdaptive, rng);
    Parameter* types = Input(p->store, "probe.types", 3, kDim, rng);
    Parameter* states = Input(p->store, "probe.states", kTokens, kDim, rng);
    const Matrix wp = RandomMatrix(3, 1, rng);
    const Matrix ws = RandomMatrix(3, kDim, rng);
    auto* det = &p->detector;
    probes.push_back(MakeProbe("type_detector", p, p->store, [=](Tape& tape) {
      EncoderOutput enc{tape.Param(*states), std::nullopt};
      Var c = tape.Param(*types);
      Var probs = det->TypeProbabilities(c, enc);
      Var pooled = det->AttendPool(c, enc.states).sentence;
      return Add(Project(probs, wp), Project(pooled, ws));
    }));
  }
  {
    auto p = std::make_shared<ClnProbe>();
    p->cln = ConditionalLayerNorm(p->store, "probe.cln", kDim, kDim, ParamGroup::kDecoder, rng);
    // Move the gain and shift maps away from their trivial initialization.
    p->cln.shift_weight()->value = 0.3 * RandomMatrix(kDim, kDim, rng);
    p->cln.gain_bias()->value = RandomMatrix(1, kDim, rng);
    Parameter* cond = Input(p->store, "probe.condition", 1, kDim, rng);
    Parameter* states = Input(p->store, "probe.states", kTokens, kDim, rng);
    const Matrix w = RandomMatrix(kTokens, kDim, rng);
    auto* cln = &p->cln;
    probes.push_back(MakeProbe("cln", p, p->store, [=](Tape& tape) {
      return Project(cln->Forward(tape.Param(*cond), tape.Param(*states)), w);
    }));
  }
  {
    auto p = std::make_shared<FusionProbe>();
    p->fusion = Fusion(p->store, "probe.gate", FusionMode::kGate, kDim, kDim,
                       ParamGroup::kDecoder, rng);
    Parameter* cond = Input(p->store, "probe.condition", 1, kDim, rng);
    Parameter* states = Input(p->store, "probe.states", kTokens, kDim, rng);
    const Matrix w = RandomMatrix(kTokens, kDim, rng);
    auto* fusion = &p->fusion;
    probes.push_back(MakeProbe("gate_fusion", p, p->store, [=](Tape& tape) {
      return Project(fusion->Forward(tape.Param(*cond), tape.Param(*states)), w);
    }));
  }
  {
    auto p = std::make_shared<AttentionProbe>();
    p->block = SelfAttentionBlock(p->store, "probe.attention", kDim, 2, true, 2 * kDim,
                                  ParamGroup::kDecoder, rng);
    Parameter* states = Input(p->store, "probe.states", kTokens, kDim, rng);
    const Matrix w = RandomMatrix(kTokens, kDim, rng);
    auto* block = &p->block;
    probes.push_back(MakeProbe("self_attention", p, p->store, [=](Tape& tape) {
      return Project(block->Forward(tape.Param(*states)), w);
    }));
  }
  {
    auto p = std::make_shared<TriggerProbe>();
    ExtractorOptions opts;
    opts.heads = 2;
    p->extractor = TriggerExtractor(p->store, kDim, kDim, opts, rng);
    Parameter* cond = Input(p->store, "probe.condition", 1, kDim, rng);
    Parameter* states = Input(p->store, "probe.states", kTokens, kDim, rng);
    const Matrix ls = RandomLabels(kTokens, 1, rng);
    const Matrix le = RandomLabels(kTokens, 1, rng);
    auto* ex = &p->extractor;
    probes.push_back(MakeProbe("trigger_tagger", p, p->store, [=](Tape& tape) {
      auto conditioned = ex->ConditionOnType(tape.Param(*states), tape.Param(*cond));
      auto tagged = ex->Tag(conditioned.refined);
      return Add(BinaryCrossEntropy(tagged.start, ls), BinaryCrossEntropy(tagged.end, le));
    }));
  }
  {
    auto p = std::make_shared<ArgumentProbe>();
    ArgumentOptions opts;
    opts.extractor.heads = 2;
    opts.position_dim = 4;
    opts.max_distance = 3;
    constexpr int kRoles = 3;
    p->extractor = ArgumentExtractor(p->store, kDim, kDim, kRoles, opts, rng);
    Parameter* fused = Input(p->store, "probe.fused", kTokens, kDim, rng);
    Parameter* type = Input(p->store, "probe.type", 1, kDim, rng);
    const Matrix ls = RandomLabels(kTokens, kRoles, rng);
    const Matrix le = RandomLabels(kTokens, kRoles, rng);
    auto* ex = &p->extractor;
    probes.push_back(MakeProbe("argument_tagger", p, p->store, [=](Tape& tape) {
      Var z = ex->ConditionOnTrigger(tape.Param(*fused), Span{2, 3});
      auto tagged = ex->Tag(z, tape.Param(*type));
      return Add(BinaryCrossEntropy(tagged.start, ls), BinaryCrossEntropy(tagged.end, le));
    }));
  }
  {
    auto p = std::make_shared<JointProbe>();
    EventSchema schema({"A", "B", "C"}, {"x", "y", "z", "w"},
                       {{"A", {"x", "y"}}, {"B", {"y", "z", "w"}}, {"C", {"x", "w"}}});
    Corpus corpus;
    corpus.schema = schema;
    corpus.sentences.push_back(
        {"s0", {"a", "b", "c", "d", "e", "f"},
         {{"A", {1, 1}, {{"x", {3, 4}}, {"y", {0, 0}}}}, {"B", {1, 1}, {{"y", {3, 4}}}}}});
    corpus.sentences.push_back(
        {"s1", {"d", "c", "b", "a", "g"}, {{"C", {2, 3}, {{"x", {0, 0}}, {"w", {0, 0}}}}}});
    ModelConfig config;
    config.encoder.hidden_dim = kDim;
    config.encoder.layers = 1;
    config.encoder.heads = 2;
    config.encoder.ff_dim = 2 * kDim;
    config.encoder.max_length = kTokens;
    config.encoder.dropout = 0.0;
    config.trigger.heads = 2;
    config.argument.extractor.heads = 2;
    config.argument.position_dim = 4;
    config.argument.max_distance = 3;
    config.seed = seed;
    p->model = std::make_unique<CascadeModel>(schema, Vocabulary::Build(corpus), config);
    // Embedding tables start at 0.02 scale, where several gradients sit below
    // what finite differences can resolve; check at a unit-scale point instead.
    for (Parameter* param : p->model->params().All()) {
      if (param->name.find("embedding") != std::string::npos ||
          param->name.find("relative_position") != std::string::npos) {
        param->value = RandomMatrix(static_cast<int>(param->value.rows()),
                                    static_cast<int>(param->value.cols()), rng);
      }
    }
    p->instances = BuildInstances(corpus, p->model->vocab());
    const CascadeModel* model = p->model.get();
    std::vector<const TrainingInstance*> batch;
    for (const auto& inst : p->instances) batch.push_back(&inst);
    GradProbe probe;
    probe.name = "joint_loss";
    probe.params = p->model->params().All();
    probe.loss = [=](Tape& tape) {
      return JointLoss(tape, *model, batch, /*training=*/false, nullptr).total;
    };
    probe.owner = p;
    probes.push_back(std::move(probe));
  }
  return probes;
}

}  // namespace cascade
