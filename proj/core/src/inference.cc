#include "cascade/inference.h"

#include <string>

#include "cascade/errors.h"
#include "cascade/span_decoder.h"

namespace cascade {
namespace {

std::vector<double> Column(const Matrix& m, Eigen::Index c) {
  std::vector<double> out(static_cast<size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<size_t>(i)] = m(i, c);
  return out;
}

}  // namespace

EventRecord PredictedEvent::ToRecord() const {
  EventRecord r;
  r.type = type;
  r.trigger = trigger;
  for (const auto& a : arguments) r.arguments.push_back(a.argument);
  return r;
}

double FactorizedScore(const PredictedEvent& e) {
  double s = e.type_prob * e.trigger_start_prob * e.trigger_end_prob;
  for (const auto& a : e.arguments) s *= a.start_prob * a.end_prob;
  return s;
}

std::vector<PredictedEvent> ExtractEvents(const CascadeModel& model,
                                          const std::vector<std::string>& tokens,
                                          const InferenceOptions& options) {
  const Thresholds& th = options.thresholds;
  const int n = static_cast<int>(tokens.size());
  if (n > model.encoder().max_length()) {
    throw TruncationError("sentence of " + std::to_string(n) + " tokens exceeds max length " +
                          std::to_string(model.encoder().max_length()));
  }
  Tape tape(/*record=*/false);
  const std::vector<int> ids = model.vocab().Encode(tokens);
  const EncoderOutput encoded = model.Encode(tape, ids, /*training=*/false, nullptr);
  const Matrix type_probs =
      model.type_detector().TypeProbabilities(model.TypeEmbeddings(tape), encoded).value();

  const EventSchema& schema = model.schema();
  std::vector<PredictedEvent> events;
  for (const auto& [type, type_prob] : DetectTypes(type_probs, th.type)) {
    Var c = model.TypeEmbedding(tape, type);
    const auto conditioned = model.trigger_extractor().ConditionOnType(encoded.states, c);
    const auto tagged = model.trigger_extractor().Tag(conditioned.refined);
    const Matrix& t_start = tagged.start.value();
    const Matrix& t_end = tagged.end.value();
    SpanTagging trig_tagging{Column(t_start, 0), Column(t_end, 0), th.trigger_start,
                             th.trigger_end, options.exclusive_ends};
    for (const Span& trigger : AssembleSpans(trig_tagging)) {
      PredictedEvent e;
      e.type_index = type;
      e.type = schema.types()[static_cast<size_t>(type)];
      e.trigger = trigger;
      e.type_prob = type_prob;
      e.trigger_start_prob = t_start(trigger.start, 0);
      e.trigger_end_prob = t_end(trigger.end, 0);

      Var z = model.argument_extractor().ConditionOnTrigger(conditioned.fused, trigger);
      const auto args = model.argument_extractor().Tag(z, model.IndicatorEmbedding(tape, type));
      const Matrix& a_start = args.start.value();
      const Matrix& a_end = args.end.value();
      for (int r = 0; r < schema.num_roles(); ++r) {
        if (options.strict_roles && !schema.IsLegal(type, r)) continue;
        SpanTagging arg_tagging{Column(a_start, r), Column(a_end, r), th.argument_start,
                                th.argument_end, options.exclusive_ends};
        for (const Span& span : AssembleSpans(arg_tagging)) {
          PredictedArgument pa;
          pa.argument = Argument{schema.roles()[static_cast<size_t>(r)], span};
          pa.start_prob = a_start(span.start, r);
          pa.end_prob = a_end(span.end, r);
          e.arguments.push_back(std::move(pa));
        }
      }
      if (options.drop_empty_events && e.arguments.empty()) continue;
      e.score = FactorizedScore(e);
      events.push_back(std::move(e));
    }
  }
  return events;
}

std::vector<AnnotatedSentence> PredictCorpus(const CascadeModel& model, const Corpus& corpus,
                                             const InferenceOptions& options,
                                             std::vector<std::vector<PredictedEvent>>* details) {
  std::vector<AnnotatedSentence> out;
  out.reserve(corpus.sentences.size());
  if (details != nullptr) details->clear();
  for (const auto& s : corpus.sentences) {
    std::vector<PredictedEvent> events = ExtractEvents(model, s.tokens, options);
    AnnotatedSentence p;
    p.id = s.id;
    p.tokens = s.tokens;
    for (const auto& e : events) p.events.push_back(e.ToRecord());
    out.push_back(std::move(p));
    if (details != nullptr) details->push_back(std::move(events));
  }
  return out;
}

nlohmann::json PredictionToJson(const std::string& id, const std::vector<std::string>& tokens,
                                const std::vector<PredictedEvent>& events) {
  nlohmann::json ev = nlohmann::json::array();
  for (const auto& e : events) {
    nlohmann::json args = nlohmann::json::array();
    for (const auto& a : e.arguments) {
      args.push_back({{"role", a.argument.role},
                      {"span", {a.argument.span.start, a.argument.span.end}},
                      {"confidence", a.confidence()},
                      {"start_prob", a.start_prob},
                      {"end_prob", a.end_prob}});
    }
    ev.push_back({{"type", e.type},
                  {"trigger",
                   {{"span", {e.trigger.start, e.trigger.end}},
                    {"start_prob", e.trigger_start_prob},
                    {"end_prob", e.trigger_end_prob}}},
                  {"args", args},
                  {"type_prob", e.type_prob},
                  {"confidence", e.score}});
  }
  nlohmann::json j;
  j["id"] = id;
  j["tokens"] = tokens;
  j["events"] = ev;
  return j;
}

}  // namespace cascade
