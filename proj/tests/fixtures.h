#ifndef CASCADE_TESTS_FIXTURES_H_
#define CASCADE_TESTS_FIXTURES_H_

#include <string>
#include <vector>

#include "cascade/model.h"
#include "cascade/schema.h"
#include "cascade/synthetic.h"

namespace cascade::testing {

inline EventSchema ToySchema() {
  return EventSchema({"Invest", "Reduce"}, {"sub", "obj", "amount"},
                     {{"Invest", {"sub", "obj"}}, {"Reduce", {"sub", "amount"}}});
}

inline AnnotatedSentence MakeSentence(std::string id, std::vector<std::string> tokens,
                                      std::vector<EventRecord> events) {
  AnnotatedSentence s;
  s.id = std::move(id);
  s.tokens = std::move(tokens);
  s.events = std::move(events);
  return s;
}

// Three sentences: two types on one shared trigger, a single event, and none.
inline Corpus ToyCorpus() {
  Corpus c;
  c.schema = ToySchema();
  c.sentences.push_back(MakeSentence(
      "s0", {"acme", "bought", "and", "cut", "stakes", "in", "beta"},
      {{"Invest", {1, 1}, {{"sub", {0, 0}}, {"obj", {6, 6}}}},
       {"Reduce", {1, 1}, {{"sub", {0, 0}}, {"amount", {4, 4}}}}}));
  c.sentences.push_back(MakeSentence(
      "s1", {"beta", "corp", "invested", "in", "gamma", "ltd"},
      {{"Invest", {2, 2}, {{"sub", {0, 1}}, {"obj", {4, 5}}}}}));
  c.sentences.push_back(MakeSentence("s2", {"nothing", "happened", "today"}, {}));
  return c;
}

inline ModelConfig ToyModelConfig(uint64_t seed = 5) {
  ModelConfig m;
  m.encoder.hidden_dim = 8;
  m.encoder.layers = 1;
  m.encoder.heads = 2;
  m.encoder.ff_dim = 16;
  m.encoder.max_length = 32;
  m.encoder.dropout = 0.0;
  m.trigger.heads = 2;
  m.argument.extractor.heads = 2;
  m.argument.position_dim = 3;
  m.argument.max_distance = 4;
  m.seed = seed;
  return m;
}

// Small generated corpus with every overlap pattern present.
inline GeneratorConfig SmallGenerator(int sentences, uint64_t seed = 11) {
  GeneratorConfig g;
  g.sentences = sentences;
  g.min_length = 10;
  g.max_length = 24;
  g.p1 = 0.2;
  g.p2 = 0.2;
  g.p3 = 0.1;
  g.normal = 0.5;
  g.seed = seed;
  return g;
}

}  // namespace cascade::testing

#endif  // CASCADE_TESTS_FIXTURES_H_
