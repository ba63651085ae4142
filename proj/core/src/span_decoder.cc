#include "cascade/span_decoder.h"

#include <memory>

#include "cascade/errors.h"

namespace cascade {

std::vector<Span> AssembleSpans(std::span<const bool> is_start, std::span<const bool> is_end,
                                bool exclusive_ends) {
  if (is_start.size() != is_end.size()) {
    throw ArgumentError("start and end vectors differ in length");
  }
  const int n = static_cast<int>(is_start.size());
  std::vector<Span> spans;
  // Single right-to-left sweep: next_end holds the nearest end at or after i.
  std::vector<int> next_end(static_cast<size_t>(n), -1);
  int nearest = -1;
  for (int i = n - 1; i >= 0; --i) {
    if (is_end[static_cast<size_t>(i)]) nearest = i;
    next_end[static_cast<size_t>(i)] = nearest;
  }
  for (int i = 0; i < n; ++i) {
    const int j = next_end[static_cast<size_t>(i)];
    if (!is_start[static_cast<size_t>(i)] || j < 0) continue;
    if (!spans.empty() && exclusive_ends && spans.back().end == j) spans.pop_back();
    spans.push_back(Span{i, j});
  }
  return spans;
}

std::vector<Span> AssembleSpans(const SpanTagging& tagging) {
  if (tagging.start_probs.size() != tagging.end_probs.size()) {
    throw ArgumentError("start and end probabilities differ in length");
  }
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_unit(tagging.start_threshold) || !in_unit(tagging.end_threshold)) {
    throw ArgumentError("span thresholds must lie in [0, 1]");
  }
  const size_t n = tagging.start_probs.size();
  std::unique_ptr<bool[]> starts(new bool[n]);
  std::unique_ptr<bool[]> ends(new bool[n]);
  for (size_t i = 0; i < n; ++i) {
    starts[i] = tagging.start_probs[i] > tagging.start_threshold;
    ends[i] = tagging.end_probs[i] > tagging.end_threshold;
  }
  return AssembleSpans(std::span<const bool>(starts.get(), n), std::span<const bool>(ends.get(), n),
                       tagging.exclusive_ends);
}

}  // namespace cascade
