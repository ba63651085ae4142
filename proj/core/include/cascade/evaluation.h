#ifndef CASCADE_EVALUATION_H_
#define CASCADE_EVALUATION_H_

#include <array>
#include <cstdint>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cascade/schema.h"

namespace cascade {

// TI: trigger span. TC: (type, trigger span). AI: (type, argument span).
// AC: (type, argument span, role).
enum class Metric { kTI = 0, kTC = 1, kAI = 2, kAC = 3 };
inline constexpr std::array<Metric, 4> kAllMetrics = {Metric::kTI, Metric::kTC, Metric::kAI,
                                                      Metric::kAC};
const char* MetricName(Metric m);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// F1 = 2PR / (P + R); every ratio with a zero denominator is 0.
Prf MakePrf(double precision, double recall);

struct Counts {
  int64_t matched = 0;
  int64_t predicted = 0;
  int64_t gold = 0;

  Prf ToPrf() const;
  Counts& operator+=(const Counts& o) {
    matched += o.matched;
    predicted += o.predicted;
    gold += o.gold;
    return *this;
  }
  bool operator==(const Counts&) const = default;
};

struct MetricCounts {
  std::array<Counts, 4> by_metric;

  Counts& operator[](Metric m) { return by_metric[static_cast<size_t>(m)]; }
  const Counts& operator[](Metric m) const { return by_metric[static_cast<size_t>(m)]; }
  MetricCounts& operator+=(const MetricCounts& o) {
    for (size_t i = 0; i < 4; ++i) by_metric[i] += o.by_metric[i];
    return *this;
  }
  bool operator==(const MetricCounts&) const = default;
};

enum class Group { kAll = 0, kOverlap = 1, kNormal = 2 };
const char* GroupName(Group g);

struct EvaluationReport {
  std::array<MetricCounts, 3> groups;  // indexed by Group
  std::array<int, 3> sentences{};      // sentences per group
  Prf macro_types;

  const MetricCounts& counts(Group g) const { return groups[static_cast<size_t>(g)]; }
  Prf prf(Group g, Metric m) const { return counts(g)[m].ToPrf(); }
};

struct ScoreOptions {
  // When set, argument tuples also carry the trigger span, so an argument
  // only counts under a correctly spanned trigger.
  bool trigger_conditioned_arguments = false;
};

// Per-sentence tuple sets for one metric (duplicates collapse).
std::set<std::vector<std::string>> MetricTuples(const AnnotatedSentence& s, Metric m,
                                                const ScoreOptions& options = {});

MetricCounts CountSentence(const AnnotatedSentence& predicted, const AnnotatedSentence& gold,
                           const ScoreOptions& options = {});

// Micro-averaged scores over aligned sentences, overall and per overlap group
// (a gold sentence with any overlap pattern is "overlap", else "normal").
// Throws ArgumentError when the two lists do not carry the same ids in the
// same order.
EvaluationReport Score(const std::vector<AnnotatedSentence>& predictions,
                       const std::vector<AnnotatedSentence>& gold,
                       const ScoreOptions& options = {});

// Per-type precision / recall / F1 over sentence-level type membership,
// averaged without weights over the types that occur in gold.
Prf MacroTypeScores(const std::vector<std::set<std::string>>& predicted,
                    const std::vector<std::set<std::string>>& gold);

nlohmann::json ReportToJson(const EvaluationReport& report);
// Fixed-width table: one row per (group, metric) with P / R / F1 in percent.
void PrintReportTable(const EvaluationReport& report, std::ostream& out);

}  // namespace cascade

#endif  // CASCADE_EVALUATION_H_
