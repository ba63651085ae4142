#include "cascade/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "cascade/errors.h"

namespace cascade {
namespace {

constexpr char kLossReduction[] = "batch_mean_of_sums";

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void BadValue(const std::string& key, const std::string& value,
                           const std::string& expected) {
  throw ConfigError("config key " + key + ": cannot parse '" + value + "' as " + expected);
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) BadValue(key, value, "a number");
  return out;
}

bool ParseBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  BadValue(key, value, "a boolean");
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct Entry {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

Entry StringKey(std::string key, std::string RunConfig::*field) {
  return {key, [field](const RunConfig& c) { return c.*field; },
          [field](RunConfig& c, const std::string& v) { c.*field = v; }};
}

template <typename Get>
Entry IntKey(std::string key, Get get) {
  return {key, [get](const RunConfig& c) { return std::to_string(get(const_cast<RunConfig&>(c))); },
          [get, key](RunConfig& c, const std::string& v) { get(c) = ParseNumber<int>(key, v); }};
}

template <typename Get>
Entry DoubleKey(std::string key, Get get) {
  return {key, [get](const RunConfig& c) { return FormatDouble(get(const_cast<RunConfig&>(c))); },
          [get, key](RunConfig& c, const std::string& v) { get(c) = ParseNumber<double>(key, v); }};
}

template <typename Get>
Entry BoolKey(std::string key, Get get) {
  return {key,
          [get](const RunConfig& c) {
            return std::string(get(const_cast<RunConfig&>(c)) ? "true" : "false");
          },
          [get, key](RunConfig& c, const std::string& v) { get(c) = ParseBool(key, v); }};
}

std::vector<Entry> BuildRegistry() {
  std::vector<Entry> r;
  r.push_back(StringKey("schema", &RunConfig::schema));
  r.push_back(StringKey("corpus", &RunConfig::corpus));
  r.push_back(StringKey("train_corpus", &RunConfig::train_corpus));
  r.push_back(StringKey("valid_corpus", &RunConfig::valid_corpus));
  r.push_back(StringKey("test_corpus", &RunConfig::test_corpus));
  r.push_back(StringKey("predictions", &RunConfig::predictions));
  r.push_back(StringKey("checkpoint", &RunConfig::checkpoint));
  r.push_back(StringKey("output_dir", &RunConfig::output_dir));
  r.push_back({"seed", [](const RunConfig& c) { return std::to_string(c.model.seed); },
               [](RunConfig& c, const std::string& v) {
                 c.model.seed = ParseNumber<uint64_t>("seed", v);
                 c.train.seed = c.model.seed;
               }});

  // Encoder.
  r.push_back(IntKey("hidden_dim", [](RunConfig& c) -> int& { return c.model.encoder.hidden_dim; }));
  r.push_back(IntKey("layers", [](RunConfig& c) -> int& { return c.model.encoder.layers; }));
  r.push_back(IntKey("heads", [](RunConfig& c) -> int& { return c.model.encoder.heads; }));
  r.push_back(IntKey("ff_dim", [](RunConfig& c) -> int& { return c.model.encoder.ff_dim; }));
  r.push_back(BoolKey("encoder_feed_forward",
                      [](RunConfig& c) -> bool& { return c.model.encoder.feed_forward; }));
  r.push_back(IntKey("max_length", [](RunConfig& c) -> int& { return c.model.encoder.max_length; }));
  r.push_back(DoubleKey("dropout", [](RunConfig& c) -> double& { return c.model.encoder.dropout; }));

  // Decoders.
  r.push_back({"pooling",
               [](const RunConfig& c) { return std::string(PoolingModeName(c.model.pooling)); },
               [](RunConfig& c, const std::string& v) { c.model.pooling = ParsePoolingMode(v); }});
  r.push_back({"fusion",
               [](const RunConfig& c) {
                 return std::string(FusionModeName(c.model.trigger.fusion));
               },
               [](RunConfig& c, const std::string& v) {
                 c.model.trigger.fusion = ParseFusionMode(v);
                 c.model.argument.extractor.fusion = c.model.trigger.fusion;
               }});
  r.push_back({"self_attention",
               [](const RunConfig& c) {
                 return std::string(c.model.trigger.self_attention ? "true" : "false");
               },
               [](RunConfig& c, const std::string& v) {
                 c.model.trigger.self_attention = ParseBool("self_attention", v);
                 c.model.argument.extractor.self_attention = c.model.trigger.self_attention;
               }});
  r.push_back({"decoder_heads",
               [](const RunConfig& c) { return std::to_string(c.model.trigger.heads); },
               [](RunConfig& c, const std::string& v) {
                 c.model.trigger.heads = ParseNumber<int>("decoder_heads", v);
                 c.model.argument.extractor.heads = c.model.trigger.heads;
               }});
  r.push_back({"decoder_feed_forward",
               [](const RunConfig& c) {
                 return std::string(c.model.trigger.feed_forward ? "true" : "false");
               },
               [](RunConfig& c, const std::string& v) {
                 c.model.trigger.feed_forward = ParseBool("decoder_feed_forward", v);
                 c.model.argument.extractor.feed_forward = c.model.trigger.feed_forward;
               }});
  r.push_back(BoolKey("position_embedding",
                      [](RunConfig& c) -> bool& { return c.model.argument.position_embedding; }));
  r.push_back(IntKey("position_dim",
                     [](RunConfig& c) -> int& { return c.model.argument.position_dim; }));
  r.push_back(IntKey("max_distance",
                     [](RunConfig& c) -> int& { return c.model.argument.max_distance; }));
  r.push_back(BoolKey("indicator", [](RunConfig& c) -> bool& { return c.model.argument.indicator; }));
  r.push_back(BoolKey("split_type_embeddings",
                      [](RunConfig& c) -> bool& { return c.model.split_type_embeddings; }));

  // Training.
  r.push_back(IntKey("batch_size", [](RunConfig& c) -> int& { return c.train.batch_size; }));
  r.push_back(IntKey("epochs", [](RunConfig& c) -> int& { return c.train.epochs; }));
  r.push_back(DoubleKey("encoder_lr", [](RunConfig& c) -> double& { return c.train.encoder_lr; }));
  r.push_back(DoubleKey("decoder_lr", [](RunConfig& c) -> double& { return c.train.decoder_lr; }));
  r.push_back(DoubleKey("warmup", [](RunConfig& c) -> double& { return c.train.warmup; }));
  r.push_back(DoubleKey("weight_decay", [](RunConfig& c) -> double& { return c.train.weight_decay; }));
  r.push_back(BoolKey("sample_conditions",
                      [](RunConfig& c) -> bool& { return c.train.loss.sample_conditions; }));
  r.push_back(IntKey("negative_types",
                     [](RunConfig& c) -> int& { return c.train.loss.negative_types; }));
  r.push_back({"loss_reduction", [](const RunConfig&) { return std::string(kLossReduction); },
               [](RunConfig&, const std::string& v) {
                 if (v != kLossReduction) BadValue("loss_reduction", v, kLossReduction);
               }});

  // Decoding and scoring.
  r.push_back(DoubleKey("threshold_1",
                        [](RunConfig& c) -> double& { return c.train.inference.thresholds.type; }));
  r.push_back(DoubleKey("threshold_2", [](RunConfig& c) -> double& {
    return c.train.inference.thresholds.trigger_start;
  }));
  r.push_back(DoubleKey("threshold_3", [](RunConfig& c) -> double& {
    return c.train.inference.thresholds.trigger_end;
  }));
  r.push_back(DoubleKey("threshold_4", [](RunConfig& c) -> double& {
    return c.train.inference.thresholds.argument_start;
  }));
  r.push_back(DoubleKey("threshold_5", [](RunConfig& c) -> double& {
    return c.train.inference.thresholds.argument_end;
  }));
  r.push_back(BoolKey("strict_roles",
                      [](RunConfig& c) -> bool& { return c.train.inference.strict_roles; }));
  r.push_back(BoolKey("exclusive_ends",
                      [](RunConfig& c) -> bool& { return c.train.inference.exclusive_ends; }));
  r.push_back(BoolKey("drop_empty_events",
                      [](RunConfig& c) -> bool& { return c.train.inference.drop_empty_events; }));
  r.push_back(BoolKey("strict_argument_scoring", [](RunConfig& c) -> bool& {
    return c.train.score.trigger_conditioned_arguments;
  }));

  // Splitting.
  r.push_back(DoubleKey("split_train", [](RunConfig& c) -> double& { return c.split[0]; }));
  r.push_back(DoubleKey("split_valid", [](RunConfig& c) -> double& { return c.split[1]; }));
  r.push_back(DoubleKey("split_test", [](RunConfig& c) -> double& { return c.split[2]; }));

  // Synthetic generator.
  r.push_back(IntKey("gen_vocab_size", [](RunConfig& c) -> int& { return c.generator.vocab_size; }));
  r.push_back(IntKey("gen_types", [](RunConfig& c) -> int& { return c.generator.num_types; }));
  r.push_back(IntKey("gen_roles", [](RunConfig& c) -> int& { return c.generator.num_roles; }));
  r.push_back(DoubleKey("gen_role_density",
                        [](RunConfig& c) -> double& { return c.generator.role_density; }));
  r.push_back(IntKey("gen_min_length", [](RunConfig& c) -> int& { return c.generator.min_length; }));
  r.push_back(IntKey("gen_max_length", [](RunConfig& c) -> int& { return c.generator.max_length; }));
  r.push_back(IntKey("gen_sentences", [](RunConfig& c) -> int& { return c.generator.sentences; }));
  r.push_back(DoubleKey("gen_p1", [](RunConfig& c) -> double& { return c.generator.p1; }));
  r.push_back(DoubleKey("gen_p2", [](RunConfig& c) -> double& { return c.generator.p2; }));
  r.push_back(DoubleKey("gen_p3", [](RunConfig& c) -> double& { return c.generator.p3; }));
  r.push_back(DoubleKey("gen_normal", [](RunConfig& c) -> double& { return c.generator.normal; }));
  r.push_back({"gen_seed", [](const RunConfig& c) { return std::to_string(c.generator.seed); },
               [](RunConfig& c, const std::string& v) {
                 c.generator.seed = ParseNumber<uint64_t>("gen_seed", v);
               }});
  return r;
}

const std::vector<Entry>& Registry() {
  static const std::vector<Entry> registry = BuildRegistry();
  return registry;
}

const Entry& Lookup(const std::string& key) {
  for (const auto& e : Registry()) {
    if (e.key == key) return e;
  }
  throw ConfigError("unknown config key: " + key);
}

}  // namespace

RunConfig::RunConfig() {
  model.argument.extractor = model.trigger;
}

const std::vector<std::string>& ConfigKeys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& e : Registry()) out.push_back(e.key);
    return out;
  }();
  return keys;
}

void SetConfigValue(RunConfig& config, const std::string& key, const std::string& value) {
  const Entry& entry = Lookup(key);
  try {
    entry.set(config, value);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("config key " + key + ": " + e.what());
  }
}

std::string GetConfigValue(const RunConfig& config, const std::string& key) {
  return Lookup(key).get(config);
}

void ApplyOverride(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "' is not key=value");
  }
  SetConfigValue(config, Trim(assignment.substr(0, eq)), Trim(assignment.substr(eq + 1)));
}

void ParseConfig(std::istream& in, RunConfig& config) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    try {
      ApplyOverride(config, line);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + e.what());
    }
  }
}

void LoadConfigFile(const std::string& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open config file " + path);
  ParseConfig(in, config);
}

std::string ConfigSnapshot(const RunConfig& config) {
  std::ostringstream os;
  for (const auto& e : Registry()) os << e.key << " = " << e.get(config) << "\n";
  return os.str();
}

void WriteConfigSnapshot(const RunConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write config snapshot " + path);
  out << ConfigSnapshot(config);
}

void ValidateRunConfig(const RunConfig& config) {
  const ModelConfig& m = config.model;
  if (m.encoder.hidden_dim < 1) throw ConfigError("hidden_dim must be positive");
  if (m.encoder.layers < 0) throw ConfigError("layers must be non-negative");
  if (m.encoder.heads < 1 || m.encoder.hidden_dim % m.encoder.heads != 0) {
    throw ConfigError("heads must divide hidden_dim");
  }
  if (m.encoder.ff_dim < 1) throw ConfigError("ff_dim must be positive");
  if (m.encoder.max_length < 1) throw ConfigError("max_length must be positive");
  if (!(m.encoder.dropout >= 0.0 && m.encoder.dropout < 1.0)) {
    throw ConfigError("dropout must lie in [0, 1)");
  }
  const int fused = m.trigger.fusion == FusionMode::kConcat ? 2 * m.encoder.hidden_dim
                                                            : m.encoder.hidden_dim;
  if (m.trigger.self_attention && (m.trigger.heads < 1 || fused % m.trigger.heads != 0)) {
    throw ConfigError("decoder_heads must divide the fused state width");
  }
  if (m.argument.position_embedding && m.argument.position_dim < 1) {
    throw ConfigError("position_dim must be positive");
  }
  if (m.argument.max_distance < 1) throw ConfigError("max_distance must be positive");
  const Thresholds& t = config.train.inference.thresholds;
  for (double x : {t.type, t.trigger_start, t.trigger_end, t.argument_start, t.argument_end}) {
    if (!(x >= 0.0 && x <= 1.0)) throw ConfigError("thresholds must lie in [0, 1]");
  }
  config.train.Validate();
}

}  // namespace cascade
