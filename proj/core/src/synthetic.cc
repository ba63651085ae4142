#include "cascade/synthetic.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "cascade/errors.h"

namespace cascade {
namespace {

using Rng = std::mt19937_64;

int Uniform(Rng& rng, int lo, int hi) {  // inclusive
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

bool Coin(Rng& rng) { return Uniform(rng, 0, 1) == 1; }

enum class EntityKind { kExclusive, kShared, kDual };

struct EntityClass {
  EntityKind kind;
  int type = -1;  // exclusive, dual
  int role = -1;  // exclusive, shared
};

struct Lexicon {
  std::vector<std::array<int, 2>> trigger;            // per type
  std::vector<int> pair_trigger;                      // per type pair (2i, 2i+1)
  // Entity classes carry {solo, head, tail}: a one-word mention is the solo
  // word, a two-word mention is head then tail. Boundaries stay lexical.
  std::map<std::pair<int, int>, std::array<int, 3>> exclusive;  // (type, role)
  std::vector<std::array<int, 3>> shared;             // per role
  std::map<int, std::array<int, 3>> dual;             // per type with >= 2 roles
  std::map<int, std::pair<int, int>> dual_roles;
  std::vector<int> fillers;
  int size = 0;
};

struct Plan {
  struct Event {
    int type;
    int trigger_segment;
  };
  std::vector<Event> events;
  // Segments: triggers first as pushed, then entities.
  struct Segment {
    bool trigger = false;
    EntityClass cls{EntityKind::kExclusive};
    std::vector<int> words;
    int solo = -1;  // one-word form of an entity
  };
  std::vector<Segment> segments;
  std::set<OverlapPattern> intended;
};

std::string Word(int id) { return "w" + std::to_string(id); }

std::vector<int> LegalRoles(const EventSchema& schema, int type) {
  std::vector<int> out;
  for (int r = 0; r < schema.num_roles(); ++r) {
    if (schema.IsLegal(type, r)) out.push_back(r);
  }
  return out;
}

// Roles this entity takes in an event of the given type (empty: not an argument).
std::vector<int> Readings(const EntityClass& c, int type, const EventSchema& schema,
                          const Lexicon& lex) {
  switch (c.kind) {
    case EntityKind::kExclusive:
      if (c.type == type) return {c.role};
      return {};
    case EntityKind::kShared:
      if (schema.IsLegal(type, c.role)) return {c.role};
      return {};
    case EntityKind::kDual:
      if (c.type == type) {
        const auto [a, b] = lex.dual_roles.at(c.type);
        return {a, b};
      }
      return {};
  }
  return {};
}

const std::array<int, 3>& ClassWords(const EntityClass& c, const Lexicon& lex) {
  switch (c.kind) {
    case EntityKind::kExclusive: return lex.exclusive.at({c.type, c.role});
    case EntityKind::kShared: return lex.shared.at(static_cast<size_t>(c.role));
    case EntityKind::kDual: break;
  }
  return lex.dual.at(c.type);
}

void AddTrigger(Plan& plan, int type, int word) {
  plan.segments.push_back({true, {}, {word}});
  plan.events.push_back({type, static_cast<int>(plan.segments.size()) - 1});
}

void AddEntity(Plan& plan, const EntityClass& c, const Lexicon& lex, Rng& rng) {
  const auto& words = ClassWords(c, lex);
  Plan::Segment seg;
  seg.cls = c;
  seg.solo = words[0];
  if (Coin(rng)) {
    seg.words = {words[1], words[2]};
  } else {
    seg.words = {words[0]};
  }
  plan.segments.push_back(std::move(seg));
}

// Up to max_count exclusive arguments of the type, avoiding the given roles.
void AddExclusiveArguments(Plan& plan, int type, int min_count, int max_count,
                           const std::vector<int>& avoid, const EventSchema& schema,
                           const Lexicon& lex, Rng& rng) {
  std::vector<int> roles;
  for (int r : LegalRoles(schema, type)) {
    if (std::find(avoid.begin(), avoid.end(), r) == avoid.end()) roles.push_back(r);
  }
  std::shuffle(roles.begin(), roles.end(), rng);
  const int hi = std::min<int>(max_count, static_cast<int>(roles.size()));
  const int lo = std::min(min_count, hi);
  const int count = Uniform(rng, lo, hi);
  for (int i = 0; i < count; ++i) {
    AddEntity(plan, {EntityKind::kExclusive, type, roles[static_cast<size_t>(i)]}, lex, rng);
  }
}

// Exclusive entity of a type absent from the sentence.
void MaybeAddDistractor(Plan& plan, const EventSchema& schema, const Lexicon& lex, Rng& rng) {
  if (!Coin(rng)) return;
  std::vector<int> absent;
  for (int t = 0; t < schema.num_types(); ++t) {
    bool present = false;
    for (const auto& e : plan.events) present = present || e.type == t;
    if (!present) absent.push_back(t);
  }
  if (absent.empty()) return;
  const int t = absent[static_cast<size_t>(Uniform(rng, 0, static_cast<int>(absent.size()) - 1))];
  const std::vector<int> roles = LegalRoles(schema, t);
  const int r = roles[static_cast<size_t>(Uniform(rng, 0, static_cast<int>(roles.size()) - 1))];
  AddEntity(plan, {EntityKind::kExclusive, t, r}, lex, rng);
}

std::vector<int> DistinctTypes(int count, int num_types, Rng& rng) {
  std::vector<int> types(static_cast<size_t>(num_types));
  std::iota(types.begin(), types.end(), 0);
  std::shuffle(types.begin(), types.end(), rng);
  types.resize(static_cast<size_t>(count));
  return types;
}

Plan PlanNormal(const EventSchema& schema, const Lexicon& lex, Rng& rng) {
  Plan plan;
  const int k = Coin(rng) ? 2 : 1;
  for (int t : DistinctTypes(k, schema.num_types(), rng)) {
    AddTrigger(plan, t, lex.trigger[static_cast<size_t>(t)][static_cast<size_t>(Uniform(rng, 0, 1))]);
    AddExclusiveArguments(plan, t, 1, 3, {}, schema, lex, rng);
  }
  MaybeAddDistractor(plan, schema, lex, rng);
  return plan;
}

Plan PlanP1(const EventSchema& schema, const Lexicon& lex, Rng& rng) {
  Plan plan;
  plan.intended = {OverlapPattern::kP1};
  const int pair = Uniform(rng, 0, static_cast<int>(lex.pair_trigger.size()) - 1);
  const int word = lex.pair_trigger[static_cast<size_t>(pair)];
  plan.segments.push_back({true, {}, {word}});
  const int seg = static_cast<int>(plan.segments.size()) - 1;
  for (int t : {2 * pair, 2 * pair + 1}) {
    plan.events.push_back({t, seg});
    AddExclusiveArguments(plan, t, 1, 2, {}, schema, lex, rng);
  }
  MaybeAddDistractor(plan, schema, lex, rng);
  return plan;
}

Plan PlanP2(const EventSchema& schema, const Lexicon& lex,
            const std::vector<std::array<int, 3>>& shareable, Rng& rng) {
  Plan plan;
  plan.intended = {OverlapPattern::kP2};
  const auto [a, b, role] =
      shareable[static_cast<size_t>(Uniform(rng, 0, static_cast<int>(shareable.size()) - 1))];
  // Avoid other roles that both types license so only one span is shared.
  std::vector<int> avoid;
  for (int r = 0; r < schema.num_roles(); ++r) {
    if (schema.IsLegal(a, r) && schema.IsLegal(b, r)) avoid.push_back(r);
  }
  for (int t : {a, b}) {
    AddTrigger(plan, t, lex.trigger[static_cast<size_t>(t)][static_cast<size_t>(Uniform(rng, 0, 1))]);
  }
  AddEntity(plan, {EntityKind::kShared, -1, role}, lex, rng);
  for (int t : {a, b}) AddExclusiveArguments(plan, t, 0, 2, avoid, schema, lex, rng);
  MaybeAddDistractor(plan, schema, lex, rng);
  return plan;
}

Plan PlanP3(const EventSchema& schema, const Lexicon& lex, Rng& rng) {
  Plan plan;
  plan.intended = {OverlapPattern::kP3};
  std::vector<int> dual_types;
  for (const auto& [t, words] : lex.dual) dual_types.push_back(t);
  const int t =
      dual_types[static_cast<size_t>(Uniform(rng, 0, static_cast<int>(dual_types.size()) - 1))];
  const auto [r1, r2] = lex.dual_roles.at(t);
  AddTrigger(plan, t, lex.trigger[static_cast<size_t>(t)][static_cast<size_t>(Uniform(rng, 0, 1))]);
  AddEntity(plan, {EntityKind::kDual, t, -1}, lex, rng);
  AddExclusiveArguments(plan, t, 0, 2, {r1, r2}, schema, lex, rng);
  if (Coin(rng)) {
    std::vector<int> others;
    for (int u = 0; u < schema.num_types(); ++u) {
      if (u != t) others.push_back(u);
    }
    const int u = others[static_cast<size_t>(Uniform(rng, 0, static_cast<int>(others.size()) - 1))];
    AddTrigger(plan, u, lex.trigger[static_cast<size_t>(u)][static_cast<size_t>(Uniform(rng, 0, 1))]);
    AddExclusiveArguments(plan, u, 1, 2, {}, schema, lex, rng);
  }
  MaybeAddDistractor(plan, schema, lex, rng);
  return plan;
}

AnnotatedSentence Realize(Plan& plan, const GeneratorConfig& config, const EventSchema& schema,
                          const Lexicon& lex, Rng& rng, const std::string& id) {
  const int s = static_cast<int>(plan.segments.size());
  auto needed = [&] {
    int words = 0;
    for (const auto& seg : plan.segments) words += static_cast<int>(seg.words.size());
    return words + s - 1;
  };
  // Shorten two-word entities until the minimum layout fits.
  for (auto& seg : plan.segments) {
    if (needed() <= config.max_length) break;
    if (seg.words.size() > 1) seg.words = {seg.solo};
  }
  if (needed() > config.max_length) {
    throw ConfigError("max_length " + std::to_string(config.max_length) +
                      " too small for the planned sentence");
  }
  const int length = std::max(Uniform(rng, config.min_length, config.max_length), needed());

  std::vector<int> order(static_cast<size_t>(s));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  // gaps[i] fillers before the i-th placed segment; gaps[s] after the last.
  std::vector<int> gaps(static_cast<size_t>(s) + 1, 0);
  for (int i = 1; i < s; ++i) gaps[static_cast<size_t>(i)] = 1;
  int words = 0;
  for (const auto& seg : plan.segments) words += static_cast<int>(seg.words.size());
  for (int extra = length - words - (s - 1); extra > 0; --extra) {
    ++gaps[static_cast<size_t>(Uniform(rng, 0, s))];
  }

  const int num_fillers = static_cast<int>(lex.fillers.size());
  AnnotatedSentence out;
  out.id = id;
  std::vector<Span> spans(static_cast<size_t>(s));
  auto fill = [&](int count) {
    for (int i = 0; i < count; ++i) {
      out.tokens.push_back(Word(lex.fillers[static_cast<size_t>(Uniform(rng, 0, num_fillers - 1))]));
    }
  };
  for (int i = 0; i < s; ++i) {
    fill(gaps[static_cast<size_t>(i)]);
    const auto& seg = plan.segments[static_cast<size_t>(order[static_cast<size_t>(i)])];
    const int start = static_cast<int>(out.tokens.size());
    for (int w : seg.words) out.tokens.push_back(Word(w));
    spans[static_cast<size_t>(order[static_cast<size_t>(i)])] =
        Span{start, static_cast<int>(out.tokens.size()) - 1};
  }
  fill(gaps[static_cast<size_t>(s)]);

  for (const auto& ev : plan.events) {
    EventRecord record;
    record.type = schema.types()[static_cast<size_t>(ev.type)];
    record.trigger = spans[static_cast<size_t>(ev.trigger_segment)];
    for (int k = 0; k < s; ++k) {
      const auto& seg = plan.segments[static_cast<size_t>(k)];
      if (seg.trigger) continue;
      for (int r : Readings(seg.cls, ev.type, schema, lex)) {
        record.arguments.push_back({schema.roles()[static_cast<size_t>(r)], spans[static_cast<size_t>(k)]});
      }
    }
    std::sort(record.arguments.begin(), record.arguments.end());
    out.events.push_back(std::move(record));
  }
  return out;
}

EventSchema MakeSchema(const GeneratorConfig& config, Rng& rng) {
  std::vector<std::string> types, roles;
  for (int t = 0; t < config.num_types; ++t) types.push_back("type_" + std::to_string(t));
  for (int r = 0; r < config.num_roles; ++r) roles.push_back("role_" + std::to_string(r));
  const int per_type = std::clamp(
      static_cast<int>(std::lround(config.role_density * config.num_roles)), 1, config.num_roles);
  std::map<std::string, std::vector<std::string>> legal;
  for (int t = 0; t < config.num_types; ++t) {
    std::vector<int> pick(static_cast<size_t>(config.num_roles));
    std::iota(pick.begin(), pick.end(), 0);
    std::shuffle(pick.begin(), pick.end(), rng);
    pick.resize(static_cast<size_t>(per_type));
    std::sort(pick.begin(), pick.end());
    auto& list = legal[types[static_cast<size_t>(t)]];
    for (int r : pick) list.push_back(roles[static_cast<size_t>(r)]);
  }
  return EventSchema(types, roles, legal);
}

Lexicon MakeLexicon(const GeneratorConfig& config, const EventSchema& schema, Rng& rng) {
  Lexicon lex;
  int next = 0;
  auto two = [&] { return std::array<int, 2>{next++, next++}; };
  auto three = [&] { return std::array<int, 3>{next++, next++, next++}; };
  for (int t = 0; t < schema.num_types(); ++t) lex.trigger.push_back(two());
  for (int p = 0; 2 * p + 1 < schema.num_types(); ++p) lex.pair_trigger.push_back(next++);
  for (int t = 0; t < schema.num_types(); ++t) {
    for (int r : LegalRoles(schema, t)) lex.exclusive[{t, r}] = three();
  }
  for (int r = 0; r < schema.num_roles(); ++r) lex.shared.push_back(three());
  for (int t = 0; t < schema.num_types(); ++t) {
    std::vector<int> roles = LegalRoles(schema, t);
    if (roles.size() < 2) continue;
    std::shuffle(roles.begin(), roles.end(), rng);
    lex.dual[t] = three();
    lex.dual_roles[t] = {std::min(roles[0], roles[1]), std::max(roles[0], roles[1])};
  }
  if (config.vocab_size <= next) {
    throw ConfigError("vocab_size " + std::to_string(config.vocab_size) + " leaves no filler words (" +
                      std::to_string(next) + " cue words needed)");
  }
  for (int w = next; w < config.vocab_size; ++w) lex.fillers.push_back(w);
  lex.size = config.vocab_size;
  return lex;
}

}  // namespace

void GeneratorConfig::Validate() const {
  if (num_types < 2) throw ConfigError("gen_types must be at least 2");
  if (num_roles < 2) throw ConfigError("gen_roles must be at least 2");
  if (!(role_density > 0.0 && role_density <= 1.0)) {
    throw ConfigError("gen_role_density must lie in (0, 1]");
  }
  if (min_length < 1 || min_length > max_length) {
    throw ConfigError("gen lengths need 1 <= min_length <= max_length");
  }
  if (sentences < 0) throw ConfigError("gen_sentences must be non-negative");
  for (double f : {p1, p2, p3, normal}) {
    if (!(f >= 0.0 && std::isfinite(f))) throw ConfigError("overlap fractions must be >= 0");
  }
  if (p1 + p2 + p3 + normal > 1.0 + 1e-9) throw ConfigError("overlap fractions sum above 1");
}

GeneratedCorpus Generate(const GeneratorConfig& config) {
  config.Validate();
  Rng rng(config.seed);
  GeneratedCorpus out;
  out.corpus.schema = MakeSchema(config, rng);
  const EventSchema& schema = out.corpus.schema;
  const Lexicon lex = MakeLexicon(config, schema, rng);

  std::vector<std::array<int, 3>> shareable;  // (type a, type b, role)
  for (int a = 0; a < schema.num_types(); ++a) {
    for (int b = a + 1; b < schema.num_types(); ++b) {
      for (int r = 0; r < schema.num_roles(); ++r) {
        if (schema.IsLegal(a, r) && schema.IsLegal(b, r)) shareable.push_back({a, b, r});
      }
    }
  }

  const double n = config.sentences;
  const int n1 = static_cast<int>(std::floor(config.p1 * n + 1e-9));
  const int n2 = static_cast<int>(std::floor(config.p2 * n + 1e-9));
  const int n3 = static_cast<int>(std::floor(config.p3 * n + 1e-9));
  if (n2 > 0 && shareable.empty()) {
    throw ConfigError("P2 requested but no two types share a legal role");
  }
  if (n3 > 0 && lex.dual.empty()) {
    throw ConfigError("P3 requested but every type has a single legal role");
  }
  std::vector<int> kinds;  // 0 normal, 1..3 pattern
  kinds.insert(kinds.end(), static_cast<size_t>(n1), 1);
  kinds.insert(kinds.end(), static_cast<size_t>(n2), 2);
  kinds.insert(kinds.end(), static_cast<size_t>(n3), 3);
  kinds.resize(static_cast<size_t>(config.sentences), 0);
  std::shuffle(kinds.begin(), kinds.end(), rng);

  char id[32];
  for (size_t i = 0; i < kinds.size(); ++i) {
    Plan plan;
    switch (kinds[i]) {
      case 1: plan = PlanP1(schema, lex, rng); break;
      case 2: plan = PlanP2(schema, lex, shareable, rng); break;
      case 3: plan = PlanP3(schema, lex, rng); break;
      default: plan = PlanNormal(schema, lex, rng); break;
    }
    std::snprintf(id, sizeof(id), "syn-%06zu", i);
    out.intended.push_back(plan.intended);
    out.corpus.sentences.push_back(Realize(plan, config, schema, lex, rng, id));
  }
  return out;
}

}  // namespace cascade
