#ifndef CASCADE_CHECKPOINT_H_
#define CASCADE_CHECKPOINT_H_

#include <memory>
#include <string>
#include <vector>

#include "cascade/config.h"
#include "cascade/model.h"
#include "cascade/training.h"

namespace cascade {

inline constexpr int kCheckpointFormatVersion = 1;

// One JSON header line (format version, schema hash, schema, vocabulary,
// config snapshot, tensor table) followed by the tensors as raw doubles in
// table order.
void SaveCheckpoint(const CascadeModel& model, const RunConfig& config, const std::string& path);

struct LoadedModel {
  RunConfig config;
  std::unique_ptr<CascadeModel> model;
};

// Rebuilds the model from the stored snapshot. When expected is given, a
// schema whose hash differs is rejected with ValidationError. Malformed or
// truncated files raise ParseError.
LoadedModel LoadCheckpoint(const std::string& path, const EventSchema* expected = nullptr);

// One JSON object per epoch.
void WriteMetricHistory(const std::vector<EpochMetrics>& history, const std::string& path);
std::vector<EpochMetrics> ReadMetricHistory(const std::string& path);

}  // namespace cascade

#endif  // CASCADE_CHECKPOINT_H_
