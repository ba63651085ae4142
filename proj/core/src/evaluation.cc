#include "cascade/evaluation.h"

#include <cstdio>
#include <map>

#include "cascade/errors.h"

namespace cascade {

const char* MetricName(Metric m) {
  switch (m) {
    case Metric::kTI: return "TI";
    case Metric::kTC: return "TC";
    case Metric::kAI: return "AI";
    case Metric::kAC: return "AC";
  }
  return "?";
}

const char* GroupName(Group g) {
  switch (g) {
    case Group::kAll: return "all";
    case Group::kOverlap: return "overlap";
    case Group::kNormal: return "normal";
  }
  return "?";
}

Prf MakePrf(double precision, double recall) {
  Prf out{precision, recall, 0.0};
  if (precision + recall > 0.0) out.f1 = 2.0 * precision * recall / (precision + recall);
  return out;
}

Prf Counts::ToPrf() const {
  const double p = predicted > 0 ? static_cast<double>(matched) / static_cast<double>(predicted) : 0.0;
  const double r = gold > 0 ? static_cast<double>(matched) / static_cast<double>(gold) : 0.0;
  return MakePrf(p, r);
}

namespace {

std::string SpanKey(const Span& s) {
  return std::to_string(s.start) + ":" + std::to_string(s.end);
}

}  // namespace

std::set<std::vector<std::string>> MetricTuples(const AnnotatedSentence& s, Metric m,
                                                const ScoreOptions& options) {
  std::set<std::vector<std::string>> out;
  for (const EventRecord& e : s.events) {
    switch (m) {
      case Metric::kTI:
        out.insert({SpanKey(e.trigger)});
        break;
      case Metric::kTC:
        out.insert({e.type, SpanKey(e.trigger)});
        break;
      case Metric::kAI:
      case Metric::kAC:
        for (const Argument& a : e.arguments) {
          std::vector<std::string> t{e.type};
          if (options.trigger_conditioned_arguments) t.push_back(SpanKey(e.trigger));
          t.push_back(SpanKey(a.span));
          if (m == Metric::kAC) t.push_back(a.role);
          out.insert(std::move(t));
        }
        break;
    }
  }
  return out;
}

MetricCounts CountSentence(const AnnotatedSentence& predicted, const AnnotatedSentence& gold,
                           const ScoreOptions& options) {
  MetricCounts counts;
  for (Metric m : kAllMetrics) {
    const auto pred = MetricTuples(predicted, m, options);
    const auto ref = MetricTuples(gold, m, options);
    Counts& c = counts[m];
    c.predicted = static_cast<int64_t>(pred.size());
    c.gold = static_cast<int64_t>(ref.size());
    for (const auto& t : pred) c.matched += ref.count(t);
  }
  return counts;
}

EvaluationReport Score(const std::vector<AnnotatedSentence>& predictions,
                       const std::vector<AnnotatedSentence>& gold,
                       const ScoreOptions& options) {
  if (predictions.size() != gold.size()) {
    throw ArgumentError("predictions and gold differ in sentence count");
  }
  EvaluationReport report;
  std::vector<std::set<std::string>> pred_types, gold_types;
  for (size_t i = 0; i < gold.size(); ++i) {
    if (predictions[i].id != gold[i].id) {
      throw ArgumentError("sentence id mismatch: " + predictions[i].id + " vs " + gold[i].id);
    }
    const MetricCounts c = CountSentence(predictions[i], gold[i], options);
    const Group g = ClassifyOverlap(gold[i]).empty() ? Group::kNormal : Group::kOverlap;
    report.groups[static_cast<size_t>(Group::kAll)] += c;
    report.groups[static_cast<size_t>(g)] += c;
    ++report.sentences[static_cast<size_t>(Group::kAll)];
    ++report.sentences[static_cast<size_t>(g)];
    std::set<std::string> pt, gt;
    for (const auto& e : predictions[i].events) pt.insert(e.type);
    for (const auto& e : gold[i].events) gt.insert(e.type);
    pred_types.push_back(std::move(pt));
    gold_types.push_back(std::move(gt));
  }
  report.macro_types = MacroTypeScores(pred_types, gold_types);
  return report;
}

Prf MacroTypeScores(const std::vector<std::set<std::string>>& predicted,
                    const std::vector<std::set<std::string>>& gold) {
  if (predicted.size() != gold.size()) {
    throw ArgumentError("macro type scores: sentence count mismatch");
  }
  std::map<std::string, Counts> per_type;
  for (size_t i = 0; i < gold.size(); ++i) {
    for (const auto& t : gold[i]) {
      ++per_type[t].gold;
      if (predicted[i].count(t) > 0) ++per_type[t].matched;
    }
    for (const auto& t : predicted[i]) ++per_type[t].predicted;
  }
  double p = 0.0, r = 0.0, f = 0.0;
  int types = 0;
  for (const auto& [type, c] : per_type) {
    if (c.gold == 0) continue;
    const Prf s = c.ToPrf();
    p += s.precision;
    r += s.recall;
    f += s.f1;
    ++types;
  }
  if (types == 0) return Prf{};
  return Prf{p / types, r / types, f / types};
}

nlohmann::json ReportToJson(const EvaluationReport& report) {
  nlohmann::json j;
  for (Group g : {Group::kAll, Group::kOverlap, Group::kNormal}) {
    nlohmann::json gj;
    gj["sentences"] = report.sentences[static_cast<size_t>(g)];
    for (Metric m : kAllMetrics) {
      const Counts& c = report.counts(g)[m];
      const Prf s = c.ToPrf();
      gj[MetricName(m)] = {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1},
                           {"matched", c.matched},     {"predicted", c.predicted},
                           {"gold", c.gold}};
    }
    j[GroupName(g)] = gj;
  }
  j["macro_type"] = {{"precision", report.macro_types.precision},
                     {"recall", report.macro_types.recall},
                     {"f1", report.macro_types.f1}};
  return j;
}

void PrintReportTable(const EvaluationReport& report, std::ostream& out) {
  char line[128];
  std::snprintf(line, sizeof(line), "%-8s %-6s %8s %8s %8s %8s %8s %8s\n", "group", "metric",
                "P(%)", "R(%)", "F1(%)", "match", "pred", "gold");
  out << line;
  for (Group g : {Group::kAll, Group::kOverlap, Group::kNormal}) {
    for (Metric m : kAllMetrics) {
      const Counts& c = report.counts(g)[m];
      const Prf s = c.ToPrf();
      std::snprintf(line, sizeof(line), "%-8s %-6s %8.1f %8.1f %8.1f %8lld %8lld %8lld\n",
                    GroupName(g), MetricName(m), 100.0 * s.precision, 100.0 * s.recall,
                    100.0 * s.f1, static_cast<long long>(c.matched),
                    static_cast<long long>(c.predicted), static_cast<long long>(c.gold));
      out << line;
    }
  }
  std::snprintf(line, sizeof(line), "%-8s %-6s %8.1f %8.1f %8.1f\n", "macro", "type",
                100.0 * report.macro_types.precision, 100.0 * report.macro_types.recall,
                100.0 * report.macro_types.f1);
  out << line;
}

}  // namespace cascade
