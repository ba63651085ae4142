#ifndef CASCADE_SPAN_DECODER_H_
#define CASCADE_SPAN_DECODER_H_

#include <span>
#include <vector>

#include "cascade/schema.h"

namespace cascade {

struct SpanTagging {
  std::vector<double> start_probs;
  std::vector<double> end_probs;
  double start_threshold = 0.5;
  double end_threshold = 0.5;
  // When set, an end closes only the last start before it; earlier starts
  // that would share it are dropped.
  bool exclusive_ends = false;
};

// Starts are tokens with start_prob > start_threshold, ends tokens with
// end_prob > end_threshold (strict). Each start i pairs with the nearest end
// j >= i; a start with no such end is dropped. An end may close several
// starts. Output is sorted by (start, end). Throws ArgumentError when the
// vectors differ in length or a threshold is outside [0, 1].
std::vector<Span> AssembleSpans(const SpanTagging& tagging);

// Same rule over precomputed boolean masks.
std::vector<Span> AssembleSpans(std::span<const bool> is_start, std::span<const bool> is_end,
                                bool exclusive_ends = false);

}  // namespace cascade

#endif  // CASCADE_SPAN_DECODER_H_
