#include "cascade/schema.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "cascade/errors.h"

namespace cascade {

using nlohmann::json;

EventSchema::EventSchema(std::vector<std::string> types, std::vector<std::string> roles,
                         std::map<std::string, std::vector<std::string>> legal_roles)
    : types_(std::move(types)), roles_(std::move(roles)), legal_roles_(std::move(legal_roles)) {
  for (size_t i = 0; i < types_.size(); ++i) {
    if (!type_index_.emplace(types_[i], static_cast<int>(i)).second) {
      throw ValidationError("schema: duplicate type " + types_[i]);
    }
  }
  for (size_t i = 0; i < roles_.size(); ++i) {
    if (!role_index_.emplace(roles_[i], static_cast<int>(i)).second) {
      throw ValidationError("schema: duplicate role " + roles_[i]);
    }
  }
  legal_.assign(types_.size() * roles_.size(), false);
  for (const auto& [type, legal] : legal_roles_) {
    auto t = type_index_.find(type);
    if (t == type_index_.end()) {
      throw ValidationError("schema: legal_roles names unknown type " + type);
    }
    if (legal.empty()) throw ValidationError("schema: type " + type + " has no legal roles");
    for (const std::string& role : legal) {
      auto r = role_index_.find(role);
      if (r == role_index_.end()) {
        throw ValidationError("schema: legal role " + role + " of " + type + " is not a role");
      }
      legal_[static_cast<size_t>(t->second) * roles_.size() + static_cast<size_t>(r->second)] =
          true;
    }
  }
  for (const std::string& type : types_) {
    if (legal_roles_.count(type) == 0) {
      throw ValidationError("schema: type " + type + " has no legal roles");
    }
  }
}

std::optional<int> EventSchema::TypeIndex(const std::string& type) const {
  auto it = type_index_.find(type);
  if (it == type_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> EventSchema::RoleIndex(const std::string& role) const {
  auto it = role_index_.find(role);
  if (it == role_index_.end()) return std::nullopt;
  return it->second;
}

bool EventSchema::IsLegal(int type_index, int role_index) const {
  if (type_index < 0 || type_index >= num_types() || role_index < 0 ||
      role_index >= num_roles()) {
    return false;
  }
  return legal_[static_cast<size_t>(type_index) * roles_.size() +
                static_cast<size_t>(role_index)];
}

bool EventSchema::IsLegal(const std::string& type, const std::string& role) const {
  auto t = TypeIndex(type);
  auto r = RoleIndex(role);
  return t && r && IsLegal(*t, *r);
}

std::string EventSchema::Hash() const {
  std::string canonical;
  for (const auto& t : types_) canonical += "t:" + t + "\n";
  for (const auto& r : roles_) canonical += "r:" + r + "\n";
  for (const auto& [type, legal] : legal_roles_) {
    canonical += "l:" + type;
    for (const auto& r : legal) canonical += "," + r;
    canonical += "\n";
  }
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int Corpus::num_events() const {
  int n = 0;
  for (const auto& s : sentences) n += static_cast<int>(s.events.size());
  return n;
}

EventSchema SchemaFromJson(const json& j) {
  try {
    if (!j.is_object()) throw ParseError("schema must be a JSON object");
    std::vector<std::string> types = j.at("types").get<std::vector<std::string>>();
    std::map<std::string, std::vector<std::string>> legal =
        j.at("legal_roles").get<std::map<std::string, std::vector<std::string>>>();
    std::vector<std::string> roles;
    if (j.contains("roles")) {
      roles = j.at("roles").get<std::vector<std::string>>();
    } else {
      // Role order follows first appearance, walking types in order.
      for (const auto& type : types) {
        auto it = legal.find(type);
        if (it == legal.end()) continue;
        for (const auto& r : it->second) {
          if (std::find(roles.begin(), roles.end(), r) == roles.end()) roles.push_back(r);
        }
      }
    }
    return EventSchema(std::move(types), std::move(roles), std::move(legal));
  } catch (const json::exception& e) {
    throw ParseError(std::string("schema: ") + e.what());
  }
}

json SchemaToJson(const EventSchema& schema) {
  json j;
  j["types"] = schema.types();
  j["roles"] = schema.roles();
  j["legal_roles"] = schema.legal_roles();
  return j;
}

EventSchema LoadSchema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open schema file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return SchemaFromJson(j);
}

void WriteSchema(const EventSchema& schema, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write schema file " + path);
  out << SchemaToJson(schema).dump(2) << "\n";
}

namespace {

Span SpanFromJson(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw ParseError("span must be [start, end] integers");
  }
  return Span{j[0].get<int>(), j[1].get<int>()};
}

json SpanToJson(const Span& s) { return json::array({s.start, s.end}); }

}  // namespace

void ValidateSentence(const AnnotatedSentence& s, const EventSchema& schema,
                      const LoadOptions& options) {
  const int n = s.size();
  auto fail = [&](const std::string& what) {
    throw ValidationError("sentence " + s.id + ": " + what);
  };
  if (n < 1) fail("no tokens");
  if (options.max_length > 0 && n > options.max_length) {
    fail("length " + std::to_string(n) + " exceeds maximum " +
         std::to_string(options.max_length));
  }
  auto check_span = [&](const Span& sp, const std::string& what) {
    if (sp.start < 0 || sp.start > sp.end || sp.end >= n) {
      fail(what + " span [" + std::to_string(sp.start) + ", " + std::to_string(sp.end) +
           "] outside [0, " + std::to_string(n) + ")");
    }
  };
  std::set<std::pair<std::string, Span>> seen_triggers;
  std::vector<const EventRecord*> seen;
  for (const EventRecord& e : s.events) {
    if (!schema.TypeIndex(e.type)) fail("unknown event type " + e.type);
    check_span(e.trigger, "trigger");
    std::set<Argument> args;
    for (const Argument& a : e.arguments) {
      if (!schema.RoleIndex(a.role)) fail("unknown role " + a.role);
      if (options.enforce_role_legality && !schema.IsLegal(e.type, a.role)) {
        fail("role " + a.role + " is not legal for type " + e.type);
      }
      check_span(a.span, "argument");
      if (!args.insert(a).second) fail("duplicate argument " + a.role + " in event " + e.type);
    }
    for (const EventRecord* other : seen) {
      if (other->type == e.type && other->trigger == e.trigger &&
          std::set<Argument>(other->arguments.begin(), other->arguments.end()) == args) {
        fail("duplicate event " + e.type);
      }
    }
    seen.push_back(&e);
  }
}

AnnotatedSentence ParseSentence(const std::string& line, int line_number,
                                const EventSchema& schema, const LoadOptions& options) {
  AnnotatedSentence s;
  try {
    json j = json::parse(line);
    if (!j.is_object()) throw ParseError("record must be a JSON object", line_number);
    s.id = j.at("id").get<std::string>();
    s.tokens = j.at("tokens").get<std::vector<std::string>>();
    const json& events = j.contains("events") ? j.at("events") : json::array();
    if (!events.is_array()) throw ParseError("events must be a list", line_number);
    for (const json& ej : events) {
      EventRecord e;
      e.type = ej.at("type").get<std::string>();
      e.trigger = SpanFromJson(ej.at("trigger").at("span"));
      if (ej.contains("args")) {
        for (const json& aj : ej.at("args")) {
          e.arguments.push_back(Argument{aj.at("role").get<std::string>(),
                                         SpanFromJson(aj.at("span"))});
        }
      }
      s.events.push_back(std::move(e));
    }
  } catch (const ParseError& e) {
    throw ParseError(e.what(), e.line() > 0 ? e.line() : line_number);
  } catch (const json::exception& e) {
    throw ParseError(e.what(), line_number);
  }
  ValidateSentence(s, schema, options);
  return s;
}

json SentenceToJson(const AnnotatedSentence& s) {
  json events = json::array();
  for (const EventRecord& e : s.events) {
    json args = json::array();
    for (const Argument& a : e.arguments) {
      args.push_back({{"role", a.role}, {"span", SpanToJson(a.span)}});
    }
    events.push_back(
        {{"type", e.type}, {"trigger", {{"span", SpanToJson(e.trigger)}}}, {"args", args}});
  }
  json j;
  j["id"] = s.id;
  j["tokens"] = s.tokens;
  j["events"] = events;
  return j;
}

Corpus ReadCorpus(std::istream& in, const EventSchema& schema, const LoadOptions& options) {
  Corpus corpus;
  corpus.schema = schema;
  std::set<std::string> ids;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    AnnotatedSentence s = ParseSentence(line, line_number, schema, options);
    if (!ids.insert(s.id).second) {
      throw ValidationError("sentence " + s.id + ": duplicate sentence id");
    }
    corpus.sentences.push_back(std::move(s));
  }
  return corpus;
}

Corpus LoadCorpus(const std::string& path, const EventSchema& schema,
                  const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open corpus file " + path);
  return ReadCorpus(in, schema, options);
}

void WriteCorpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& s : corpus.sentences) out << SentenceToJson(s).dump() << "\n";
}

void WriteCorpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write corpus file " + path);
  WriteCorpus(corpus, out);
}

const char* OverlapPatternName(OverlapPattern p) {
  switch (p) {
    case OverlapPattern::kP1: return "P1";
    case OverlapPattern::kP2: return "P2";
    case OverlapPattern::kP3: return "P3";
  }
  return "?";
}

std::set<OverlapPattern> ClassifyOverlap(const AnnotatedSentence& sentence) {
  std::set<OverlapPattern> out;
  std::map<Span, std::set<std::string>> trigger_types;
  std::map<Span, std::set<size_t>> arg_events;
  for (size_t i = 0; i < sentence.events.size(); ++i) {
    const EventRecord& e = sentence.events[i];
    trigger_types[e.trigger].insert(e.type);
    std::map<Span, std::set<std::string>> roles_by_span;
    for (const Argument& a : e.arguments) {
      roles_by_span[a.span].insert(a.role);
      arg_events[a.span].insert(i);
    }
    for (const auto& [span, roles] : roles_by_span) {
      if (roles.size() >= 2) out.insert(OverlapPattern::kP3);
    }
  }
  for (const auto& [span, types] : trigger_types) {
    if (types.size() >= 2) out.insert(OverlapPattern::kP1);
  }
  for (const auto& [span, events] : arg_events) {
    if (events.size() >= 2) out.insert(OverlapPattern::kP2);
  }
  return out;
}

std::array<int, 3> SplitSizes(int n, const std::array<double, 3>& ratios) {
  double total = 0.0;
  for (double r : ratios) {
    if (!(r > 0.0)) throw ArgumentError("split ratios must be positive");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ArgumentError("split ratios must sum to 1");
  std::array<int, 3> sizes{};
  std::array<double, 3> remainder{};
  int assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double exact = ratios[k] * n;
    // Absorb representation error so that e.g. 3600 * 5/6 floors to 3000.
    sizes[k] = static_cast<int>(std::floor(exact + 1e-9));
    remainder[k] = exact - sizes[k];
    assigned += sizes[k];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainder[a] > remainder[b] + 1e-12; });
  for (int k = 0; assigned < n; k = (k + 1) % 3) {
    ++sizes[order[k]];
    ++assigned;
  }
  return sizes;
}

std::array<Corpus, 3> SplitCorpus(const Corpus& corpus, const std::array<double, 3>& ratios,
                                  uint64_t seed) {
  const int n = static_cast<int>(corpus.sentences.size());
  const std::array<int, 3> sizes = SplitSizes(n, ratios);
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::array<Corpus, 3> parts;
  size_t at = 0;
  for (int k = 0; k < 3; ++k) {
    parts[k].schema = corpus.schema;
    for (int i = 0; i < sizes[k]; ++i) {
      parts[k].sentences.push_back(corpus.sentences[static_cast<size_t>(order[at++])]);
    }
  }
  return parts;
}

}  // namespace cascade
