#ifndef CASCADE_INFERENCE_H_
#define CASCADE_INFERENCE_H_

#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cascade/model.h"
#include "cascade/schema.h"

namespace cascade {

// Decision thresholds, all applied with strict inequality.
struct Thresholds {
  double type = 0.5;
  double trigger_start = 0.5;
  double trigger_end = 0.5;
  double argument_start = 0.5;
  double argument_end = 0.5;
};

struct InferenceOptions {
  Thresholds thresholds;
  // Drop arguments whose role the schema does not license for the type.
  bool strict_roles = false;
  // Drop events whose argument list came out empty.
  bool drop_empty_events = false;
  // Decode spans with exclusive ends (see SpanTagging).
  bool exclusive_ends = false;
};

struct PredictedArgument {
  Argument argument;
  double start_prob = 0.0;
  double end_prob = 0.0;
  double confidence() const { return start_prob * end_prob; }
};

struct PredictedEvent {
  int type_index = 0;
  std::string type;
  Span trigger;
  double type_prob = 0.0;
  double trigger_start_prob = 0.0;
  double trigger_end_prob = 0.0;
  std::vector<PredictedArgument> arguments;
  // type_prob * trigger boundaries * product of argument boundaries.
  double score = 0.0;

  EventRecord ToRecord() const;
};

// Product of the recorded component probabilities.
double FactorizedScore(const PredictedEvent& e);

// Cascade decoding of one sentence: types above the type threshold, then triggers per type,
// then arguments per (type, trigger). Events come out sorted by (type index,
// trigger start, trigger end); arguments by (role index, start, end).
// Throws TruncationError when the sentence exceeds the encoder's max length.
std::vector<PredictedEvent> ExtractEvents(const CascadeModel& model,
                                          const std::vector<std::string>& tokens,
                                          const InferenceOptions& options = {});

// Runs ExtractEvents over every sentence and returns an annotated copy with
// gold events replaced by predictions.
std::vector<AnnotatedSentence> PredictCorpus(const CascadeModel& model, const Corpus& corpus,
                                             const InferenceOptions& options = {},
                                             std::vector<std::vector<PredictedEvent>>* details = nullptr);

// Corpus-format record plus confidences.
nlohmann::json PredictionToJson(const std::string& id, const std::vector<std::string>& tokens,
                                const std::vector<PredictedEvent>& events);

}  // namespace cascade

#endif  // CASCADE_INFERENCE_H_
