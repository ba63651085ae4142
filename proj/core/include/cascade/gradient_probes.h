#ifndef CASCADE_GRADIENT_PROBES_H_
#define CASCADE_GRADIENT_PROBES_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cascade/grad_check.h"

namespace cascade {

// A small module instance with a scalar loss over its output, ready for
// GradCheck. owner keeps the parameters alive.
struct GradProbe {
  std::string name;
  std::vector<Parameter*> params;
  LossBuilder loss;
  std::shared_ptr<void> owner;
};

// Probes at width 8 over sentences of at most 6 tokens:
// type_detector, cln, gate_fusion, self_attention, trigger_tagger,
// argument_tagger, joint_loss.
std::vector<GradProbe> StandardGradProbes(uint64_t seed = 1);

}  // namespace cascade

#endif  // CASCADE_GRADIENT_PROBES_H_
