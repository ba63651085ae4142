#ifndef CASCADE_SYNTHETIC_H_
#define CASCADE_SYNTHETIC_H_

#include <cstdint>
#include <set>
#include <vector>

#include "cascade/schema.h"

namespace cascade {

struct GeneratorConfig {
  int vocab_size = 200;
  int num_types = 6;
  int num_roles = 10;
  // Fraction of roles each type licenses (at least one).
  double role_density = 0.5;
  int min_length = 10;
  int max_length = 30;
  int sentences = 1000;
  // Target shares of sentences realizing each pattern. The rest are normal.
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;
  double normal = 1.0;
  uint64_t seed = 7;

  // Throws ConfigError on invalid or infeasible settings.
  void Validate() const;
};

struct GeneratedCorpus {
  Corpus corpus;
  // Pattern set each sentence was built to realize (aligned with sentences).
  std::vector<std::set<OverlapPattern>> intended;
};

// Lexically cued corpus. Every type has two signature trigger words; each
// pair of adjacent types (0,1), (2,3), ... shares one extra trigger word that
// always evokes both. Arguments come from entity classes:
//   exclusive class (t, r): role r of the type-t event,
//   shared class r:         role r of every event whose type licenses r,
//   dual class t:           two fixed roles of the type-t event.
// Each class has a one-word form and a two-word (head, tail) form, so span
// boundaries are cued by the words themselves. An entity whose class has no
// reading among the sentence's types is a distractor. Events in one sentence always have distinct types, so the gold
// annotation is a function of the words. P1 sentences use a pair trigger, P2
// sentences a shared entity under two events, P3 sentences a dual entity.
// Pattern counts are floor(fraction * sentences); leftovers are normal.
GeneratedCorpus Generate(const GeneratorConfig& config);

}  // namespace cascade

#endif  // CASCADE_SYNTHETIC_H_
