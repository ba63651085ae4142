#include "cascade/checkpoint.h"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cascade/errors.h"

namespace cascade {

void SaveCheckpoint(const CascadeModel& model, const RunConfig& config, const std::string& path) {
  nlohmann::json tensors = nlohmann::json::array();
  for (const Parameter* p : model.params().All()) {
    tensors.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
  }
  RunConfig snapshot = config;
  snapshot.model = model.config();
  nlohmann::json header = {{"format", "cascade-checkpoint"},
                           {"format_version", kCheckpointFormatVersion},
                           {"schema_hash", model.schema().Hash()},
                           {"schema", SchemaToJson(model.schema())},
                           {"vocab", model.vocab().tokens()},
                           {"config", ConfigSnapshot(snapshot)},
                           {"tensors", tensors}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write checkpoint " + path);
  out << header.dump() << "\n";
  for (const Parameter* p : model.params().All()) {
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(sizeof(double) * p->value.size()));
  }
  if (!out) throw FileError("failed writing checkpoint " + path);
}

LoadedModel LoadCheckpoint(const std::string& path, const EventSchema* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open checkpoint " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty checkpoint");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": bad checkpoint header: " + e.what());
  }
  if (!header.is_object() || header.value("format", "") != "cascade-checkpoint") {
    throw ParseError(path + ": not a checkpoint");
  }
  if (header.value("format_version", -1) != kCheckpointFormatVersion) {
    throw ParseError(path + ": unsupported checkpoint format version");
  }

  LoadedModel loaded;
  EventSchema schema;
  std::vector<std::string> vocab_tokens;
  try {
    schema = SchemaFromJson(header.at("schema"));
    vocab_tokens = header.at("vocab").get<std::vector<std::string>>();
    std::istringstream cfg(header.at("config").get<std::string>());
    ParseConfig(cfg, loaded.config);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": bad checkpoint header: " + e.what());
  }
  const std::string stored_hash = header.value("schema_hash", "");
  if (stored_hash != schema.Hash()) {
    throw ParseError(path + ": schema hash does not match the embedded schema");
  }
  if (expected != nullptr && expected->Hash() != stored_hash) {
    throw ValidationError("checkpoint schema hash " + stored_hash +
                          " does not match the supplied schema " + expected->Hash());
  }

  loaded.model = std::make_unique<CascadeModel>(
      std::move(schema), Vocabulary::FromTokens(vocab_tokens), loaded.config.model);
  auto params = loaded.model->params().All();
  const auto& tensors = header.at("tensors");
  if (!tensors.is_array() || tensors.size() != params.size()) {
    throw ParseError(path + ": tensor table does not match the configured model");
  }
  for (size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    const auto& t = tensors[i];
    if (t.value("name", "") != p.name || t.value("rows", -1L) != p.value.rows() ||
        t.value("cols", -1L) != p.value.cols()) {
      throw ParseError(path + ": tensor " + p.name + " missing or reshaped");
    }
    in.read(reinterpret_cast<char*>(p.value.data()),
            static_cast<std::streamsize>(sizeof(double) * p.value.size()));
    if (!in) throw ParseError(path + ": truncated tensor data at " + p.name);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError(path + ": trailing bytes after tensor data");
  }
  return loaded;
}

void WriteMetricHistory(const std::vector<EpochMetrics>& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write metric history " + path);
  for (const auto& m : history) out << EpochMetricsToJson(m).dump() << "\n";
}

std::vector<EpochMetrics> ReadMetricHistory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open metric history " + path);
  std::vector<EpochMetrics> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      EpochMetrics m;
      m.epoch = j.at("epoch").get<int>();
      m.train_loss = j.at("train_loss").get<double>();
      m.ti_f1 = j.at("ti_f1").get<double>();
      m.tc_f1 = j.at("tc_f1").get<double>();
      m.ai_f1 = j.at("ai_f1").get<double>();
      m.ac_f1 = j.at("ac_f1").get<double>();
      out.push_back(m);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), number);
    }
  }
  return out;
}

}  // namespace cascade
