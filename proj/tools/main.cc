// cascade_ee: train, evaluate and run the cascade event extractor.
//
// Exit codes: 0 ok, 1 other failure, 2 bad configuration or missing file,
// 3 numeric failure (diverged training, failed gradient check).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cascade/checkpoint.h"
#include "cascade/config.h"
#include "cascade/errors.h"
#include "cascade/evaluation.h"
#include "cascade/gradient_probes.h"
#include "cascade/inference.h"
#include "cascade/synthetic.h"
#include "cascade/training.h"

namespace fs = std::filesystem;

namespace cascade {
namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Flags {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<uint64_t> seed;
  std::optional<double> thresholds[5];
  std::optional<std::string> fusion;
  std::optional<std::string> pooling;
  bool no_self_attention = false;
  bool no_position_embedding = false;
  bool no_indicator = false;
  bool strict_roles = false;
  bool drop_empty_events = false;
  // Path shortcuts for the matching config keys.
  std::optional<std::string> schema, corpus, train, valid, test, checkpoint, output_dir,
      predictions;
};

void AddCommonFlags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config_path, "Flat key = value config file");
  app->add_option("--set", f.sets, "Override one config key (key=value)")->take_all();
  app->add_option("--seed", f.seed, "Seed for model init, shuffling and splits");
  static constexpr const char* kThresholdHelp[] = {
      "Type threshold", "Trigger start threshold", "Trigger end threshold",
      "Argument start threshold", "Argument end threshold"};
  for (int i = 0; i < 5; ++i) {
    app->add_option("--threshold-" + std::to_string(i + 1), f.thresholds[i], kThresholdHelp[i]);
  }
  app->add_option("--fusion", f.fusion, "cln, concat, add or gate");
  app->add_option("--pooling", f.pooling, "adaptive, maxp, meanp or cls");
  app->add_flag("--no-self-attention", f.no_self_attention);
  app->add_flag("--no-position-embedding", f.no_position_embedding);
  app->add_flag("--no-indicator", f.no_indicator);
  app->add_flag("--strict-roles", f.strict_roles, "Drop roles the type does not license");
  app->add_flag("--drop-empty-events", f.drop_empty_events);
  app->add_option("--schema", f.schema);
  app->add_option("--corpus", f.corpus);
  app->add_option("--train", f.train);
  app->add_option("--valid", f.valid);
  app->add_option("--test", f.test);
  app->add_option("--checkpoint", f.checkpoint);
  app->add_option("--output-dir", f.output_dir);
  app->add_option("--predictions", f.predictions);
}

RunConfig Resolve(const Flags& f) {
  RunConfig c;
  if (!f.config_path.empty()) LoadConfigFile(f.config_path, c);
  for (const auto& s : f.sets) ApplyOverride(c, s);
  auto set = [&](const char* key, const auto& opt) {
    if (opt) SetConfigValue(c, key, *opt);
  };
  if (f.seed) SetConfigValue(c, "seed", std::to_string(*f.seed));
  for (int i = 0; i < 5; ++i) {
    if (f.thresholds[i]) {
      std::ostringstream v;
      v.precision(17);
      v << *f.thresholds[i];
      SetConfigValue(c, "threshold_" + std::to_string(i + 1), v.str());
    }
  }
  set("fusion", f.fusion);
  set("pooling", f.pooling);
  if (f.no_self_attention) SetConfigValue(c, "self_attention", "false");
  if (f.no_position_embedding) SetConfigValue(c, "position_embedding", "false");
  if (f.no_indicator) SetConfigValue(c, "indicator", "false");
  if (f.strict_roles) SetConfigValue(c, "strict_roles", "true");
  if (f.drop_empty_events) SetConfigValue(c, "drop_empty_events", "true");
  set("schema", f.schema);
  set("corpus", f.corpus);
  set("train_corpus", f.train);
  set("valid_corpus", f.valid);
  set("test_corpus", f.test);
  set("checkpoint", f.checkpoint);
  set("output_dir", f.output_dir);
  set("predictions", f.predictions);
  ValidateRunConfig(c);
  return c;
}

void RequireFile(const std::string& key, const std::string& path) {
  if (path.empty()) throw ConfigError("missing required config key: " + key);
  if (!fs::is_regular_file(path)) throw FileError("missing file for " + key + ": " + path);
}

std::string RequireOutputDir(const RunConfig& c) {
  if (c.output_dir.empty()) throw ConfigError("missing required config key: output_dir");
  fs::create_directories(c.output_dir);
  return c.output_dir;
}

std::string Join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

LoadOptions CorpusOptions(const RunConfig& c) {
  LoadOptions o;
  o.max_length = c.model.encoder.max_length;
  return o;
}

void WriteJson(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write " + path);
  out << j.dump(2) << "\n";
}

void WriteReport(const EvaluationReport& report, const std::string& dir, const std::string& stem) {
  const nlohmann::json j = ReportToJson(report);
  WriteJson(j, Join(dir, stem + ".json"));
  for (const char* g : {"all", "overlap", "normal"}) {
    WriteJson(j.at(g), Join(dir, stem + "_" + g + ".json"));
  }
  std::ofstream table(Join(dir, stem + ".txt"));
  PrintReportTable(report, table);
  PrintReportTable(report, std::cout);
}

void WritePredictions(const Corpus& corpus,
                      const std::vector<std::vector<PredictedEvent>>& details,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write predictions " + path);
  for (size_t i = 0; i < corpus.sentences.size(); ++i) {
    const auto& s = corpus.sentences[i];
    out << PredictionToJson(s.id, s.tokens, details[i]).dump() << "\n";
  }
}

int RunTrain(const Flags& flags) {
  RunConfig c = Resolve(flags);
  RequireFile("schema", c.schema);
  const bool from_split = c.train_corpus.empty();
  if (from_split) {
    RequireFile("corpus", c.corpus);
  } else {
    RequireFile("train_corpus", c.train_corpus);
  }
  if (!c.valid_corpus.empty()) RequireFile("valid_corpus", c.valid_corpus);
  if (!c.test_corpus.empty()) RequireFile("test_corpus", c.test_corpus);
  const std::string dir = RequireOutputDir(c);

  const EventSchema schema = LoadSchema(c.schema);
  Corpus train, valid, test;
  if (from_split) {
    auto parts = SplitCorpus(LoadCorpus(c.corpus, schema, CorpusOptions(c)), c.split, c.model.seed);
    train = std::move(parts[0]);
    valid = std::move(parts[1]);
    test = std::move(parts[2]);
  } else {
    train = LoadCorpus(c.train_corpus, schema, CorpusOptions(c));
    valid.schema = schema;
    test.schema = schema;
    if (!c.valid_corpus.empty()) valid = LoadCorpus(c.valid_corpus, schema, CorpusOptions(c));
    if (!c.test_corpus.empty()) test = LoadCorpus(c.test_corpus, schema, CorpusOptions(c));
  }

  const std::string checkpoint = c.checkpoint.empty() ? Join(dir, "model.ckpt") : c.checkpoint;
  c.checkpoint = checkpoint;
  WriteConfigSnapshot(c, Join(dir, "config.snapshot"));

  CascadeModel model(schema, Vocabulary::Build(train), c.model);
  std::cerr << "train: " << train.sentences.size() << " sentences, "
            << model.params().TotalSize() << " parameters\n";
  const std::string history_path = Join(dir, "history.jsonl");
  std::ofstream history(history_path);
  if (!history) throw FileError("cannot write " + history_path);

  TrainCallbacks callbacks;
  callbacks.on_epoch = [&](const EpochMetrics& m) {
    history << EpochMetricsToJson(m).dump() << "\n" << std::flush;
    std::fprintf(stderr, "epoch %d loss %.4f valid TI %.3f TC %.3f AI %.3f AC %.3f\n", m.epoch,
                 m.train_loss, m.ti_f1, m.tc_f1, m.ai_f1, m.ac_f1);
  };
  callbacks.on_best = [&](const EpochMetrics&) { SaveCheckpoint(model, c, checkpoint); };
  TrainResult result;
  try {
    result = Train(model, c.train, train, valid, callbacks);
  } catch (const NumericError&) {
    if (!fs::exists(checkpoint)) SaveCheckpoint(model, c, checkpoint);
    throw;
  }
  SaveCheckpoint(model, c, checkpoint);
  std::cerr << "best epoch " << result.best_epoch << " (valid AC F1 " << result.best_ac_f1
            << "), checkpoint " << checkpoint << "\n";

  if (!test.sentences.empty()) {
    std::vector<std::vector<PredictedEvent>> details;
    const auto predicted = PredictCorpus(model, test, c.train.inference, &details);
    WritePredictions(test, details, Join(dir, "test_predictions.jsonl"));
    WriteReport(Score(predicted, test.sentences, c.train.score), dir, "test_report");
  }
  return 0;
}

int RunEval(const Flags& flags) {
  RunConfig c = Resolve(flags);
  const std::string gold_path = c.test_corpus.empty() ? c.corpus : c.test_corpus;
  RequireFile("corpus", gold_path);
  const std::string dir = RequireOutputDir(c);

  std::vector<AnnotatedSentence> predicted;
  Corpus gold;
  if (!c.predictions.empty()) {
    RequireFile("schema", c.schema);
    RequireFile("predictions", c.predictions);
    const EventSchema schema = LoadSchema(c.schema);
    gold = LoadCorpus(gold_path, schema, CorpusOptions(c));
    LoadOptions lenient = CorpusOptions(c);
    lenient.enforce_role_legality = false;
    predicted = LoadCorpus(c.predictions, schema, lenient).sentences;
  } else {
    RequireFile("checkpoint", c.checkpoint);
    LoadedModel loaded = LoadCheckpoint(c.checkpoint);
    EventSchema schema = loaded.model->schema();
    if (!c.schema.empty()) {
      RequireFile("schema", c.schema);
      schema = LoadSchema(c.schema);
      if (schema.Hash() != loaded.model->schema().Hash()) {
        throw ValidationError("checkpoint schema does not match " + c.schema);
      }
    }
    gold = LoadCorpus(gold_path, schema, CorpusOptions(c));
    std::vector<std::vector<PredictedEvent>> details;
    predicted = PredictCorpus(*loaded.model, gold, c.train.inference, &details);
    WritePredictions(gold, details, Join(dir, "predictions.jsonl"));
  }
  WriteConfigSnapshot(c, Join(dir, "config.snapshot"));
  WriteReport(Score(predicted, gold.sentences, c.train.score), dir, "report");
  return 0;
}

int RunPredict(const Flags& flags) {
  RunConfig c = Resolve(flags);
  RequireFile("checkpoint", c.checkpoint);
  RequireFile("corpus", c.corpus);
  LoadedModel loaded = LoadCheckpoint(c.checkpoint);
  std::string out = c.predictions;
  if (out.empty()) out = Join(RequireOutputDir(c), "predictions.jsonl");
  const Corpus corpus = LoadCorpus(c.corpus, loaded.model->schema(), CorpusOptions(c));
  std::vector<std::vector<PredictedEvent>> details;
  PredictCorpus(*loaded.model, corpus, c.train.inference, &details);
  WritePredictions(corpus, details, out);
  WriteConfigSnapshot(c, out + ".config");
  std::cerr << "wrote " << corpus.sentences.size() << " predictions to " << out << "\n";
  return 0;
}

int RunGenerate(const Flags& flags, bool split) {
  RunConfig c = Resolve(flags);
  const std::string dir = RequireOutputDir(c);
  const GeneratedCorpus generated = Generate(c.generator);
  WriteSchema(generated.corpus.schema, Join(dir, "schema.json"));
  WriteCorpus(generated.corpus, Join(dir, "corpus.jsonl"));
  if (split) {
    const auto parts = SplitCorpus(generated.corpus, c.split, c.model.seed);
    WriteCorpus(parts[0], Join(dir, "train.jsonl"));
    WriteCorpus(parts[1], Join(dir, "valid.jsonl"));
    WriteCorpus(parts[2], Join(dir, "test.jsonl"));
  }
  WriteConfigSnapshot(c, Join(dir, "config.snapshot"));
  std::cerr << "generated " << generated.corpus.sentences.size() << " sentences, "
            << generated.corpus.num_events() << " events in " << dir << "\n";
  return 0;
}

int RunGradCheck(const Flags& flags, bool corrupt, double tolerance) {
  RunConfig c = Resolve(flags);
  bool ok = true;
  for (const GradProbe& probe : StandardGradProbes(c.model.seed)) {
    GradCheckOptions options;
    if (corrupt) options.corrupt_index = 0;
    const GradCheckResult r = GradCheck(probe.params, probe.loss, options);
    const bool pass = r.max_relative_error <= tolerance;
    ok = ok && pass;
    std::printf("%-16s %s  max_rel_err %.3e  entries %d  worst %s[%d]\n", probe.name.c_str(),
                pass ? "PASS" : "FAIL", r.max_relative_error, r.entries_checked,
                r.worst_parameter.c_str(), r.worst_entry);
  }
  if (!ok) throw NumericError("gradient check failed");
  return 0;
}

}  // namespace
}  // namespace cascade

int main(int argc, char** argv) {
  using namespace cascade;
  CLI::App app{"Cascade decoding for overlapping event extraction"};
  app.require_subcommand(1);

  Flags flags;
  bool split = false;
  bool corrupt = false;
  double tolerance = 1e-4;
  CLI::App* train = app.add_subcommand("train", "Train and keep the best checkpoint");
  CLI::App* eval = app.add_subcommand("eval", "Score predictions or a checkpoint");
  CLI::App* predict = app.add_subcommand("predict", "Decode a corpus with a checkpoint");
  CLI::App* generate = app.add_subcommand("generate", "Write a synthetic corpus");
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  for (CLI::App* sub : {train, eval, predict, generate, gradcheck}) AddCommonFlags(sub, flags);
  generate->add_flag("--split", split, "Also write train/valid/test files");
  gradcheck->add_flag("--corrupt-gradient", corrupt, "Inject a wrong gradient (must fail)");
  gradcheck->add_option("--tolerance", tolerance, "Maximum relative error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train) return RunTrain(flags);
    if (*eval) return RunEval(flags);
    if (*predict) return RunPredict(flags);
    if (*generate) return RunGenerate(flags, split);
    if (*gradcheck) return RunGradCheck(flags, corrupt, tolerance);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FileError& e) {
    std::cerr << "file error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
