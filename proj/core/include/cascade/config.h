#ifndef CASCADE_CONFIG_H_
#define CASCADE_CONFIG_H_

#include <array>
#include <istream>
#include <string>
#include <vector>

#include "cascade/model.h"
#include "cascade/synthetic.h"
#include "cascade/training.h"

namespace cascade {

// Everything a CLI run needs. Defaults follow the reference hyper-parameter
// table; the encoder is the small trainable stand-in.
struct RunConfig {
  std::string schema;
  std::string corpus;
  std::string train_corpus;
  std::string valid_corpus;
  std::string test_corpus;
  std::string predictions;
  std::string checkpoint;
  std::string output_dir;

  ModelConfig model;
  TrainConfig train;
  GeneratorConfig generator;
  std::array<double, 3> split = {0.8, 0.1, 0.1};

  RunConfig();
};

// Registered keys in snapshot order.
const std::vector<std::string>& ConfigKeys();

// Throws ConfigError naming the key when it is unknown or the value does not
// parse. seed sets the model, training and split seeds together.
void SetConfigValue(RunConfig& config, const std::string& key, const std::string& value);
std::string GetConfigValue(const RunConfig& config, const std::string& key);

// "key=value" (spaces around '=' allowed).
void ApplyOverride(RunConfig& config, const std::string& assignment);

// Flat "key = value" lines; '#' starts a comment; blank lines skipped.
// Errors carry the line number.
void ParseConfig(std::istream& in, RunConfig& config);
// Throws Error with "missing file" when the path cannot be opened.
void LoadConfigFile(const std::string& path, RunConfig& config);

// Every key, one per line, values printed so they parse back exactly.
std::string ConfigSnapshot(const RunConfig& config);
void WriteConfigSnapshot(const RunConfig& config, const std::string& path);

// Cross-field checks (dimensions, rates, thresholds). Throws ConfigError.
void ValidateRunConfig(const RunConfig& config);

}  // namespace cascade

#endif  // CASCADE_CONFIG_H_
