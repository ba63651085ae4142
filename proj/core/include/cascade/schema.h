#ifndef CASCADE_SCHEMA_H_
#define CASCADE_SCHEMA_H_

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cascade {

// Token span with inclusive, 0-based boundaries.
struct Span {
  int start = 0;
  int end = 0;

  int length() const { return end - start + 1; }
  auto operator<=>(const Span&) const = default;
};

// Event type inventory, role inventory and the type -> legal roles map.
class EventSchema {
 public:
  EventSchema() = default;
  // Throws ValidationError if names repeat, a type has no legal roles, or a
  // legal role is not in the role inventory.
  EventSchema(std::vector<std::string> types, std::vector<std::string> roles,
              std::map<std::string, std::vector<std::string>> legal_roles);

  const std::vector<std::string>& types() const { return types_; }
  const std::vector<std::string>& roles() const { return roles_; }
  const std::map<std::string, std::vector<std::string>>& legal_roles() const {
    return legal_roles_;
  }
  int num_types() const { return static_cast<int>(types_.size()); }
  int num_roles() const { return static_cast<int>(roles_.size()); }

  std::optional<int> TypeIndex(const std::string& type) const;
  std::optional<int> RoleIndex(const std::string& role) const;
  bool IsLegal(int type_index, int role_index) const;
  bool IsLegal(const std::string& type, const std::string& role) const;

  // Stable 64-bit FNV-1a fingerprint of the canonical schema text, hex encoded.
  std::string Hash() const;

  bool operator==(const EventSchema& other) const {
    return types_ == other.types_ && roles_ == other.roles_ &&
           legal_roles_ == other.legal_roles_;
  }

 private:
  std::vector<std::string> types_;
  std::vector<std::string> roles_;
  std::map<std::string, std::vector<std::string>> legal_roles_;
  std::map<std::string, int> type_index_;
  std::map<std::string, int> role_index_;
  // legal_[type * num_roles + role]
  std::vector<bool> legal_;
};

struct Argument {
  std::string role;
  Span span;
  auto operator<=>(const Argument&) const = default;
};

struct EventRecord {
  std::string type;
  Span trigger;
  std::vector<Argument> arguments;
  bool operator==(const EventRecord&) const = default;
};

struct AnnotatedSentence {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<EventRecord> events;

  int size() const { return static_cast<int>(tokens.size()); }
  bool operator==(const AnnotatedSentence&) const = default;
};

struct Corpus {
  EventSchema schema;
  std::vector<AnnotatedSentence> sentences;

  int num_events() const;
  bool operator==(const Corpus&) const = default;
};

struct LoadOptions {
  int max_length = 512;
  // Predictions decoded without strict role masking may pair a type with a
  // role it does not license; scoring loads them with this switched off.
  bool enforce_role_legality = true;
};

EventSchema SchemaFromJson(const nlohmann::json& j);
nlohmann::json SchemaToJson(const EventSchema& schema);
EventSchema LoadSchema(const std::string& path);
void WriteSchema(const EventSchema& schema, const std::string& path);

// Parses and validates one sentence record. Throws ParseError for malformed
// JSON or fields of the wrong kind, ValidationError for schema violations.
AnnotatedSentence ParseSentence(const std::string& line, int line_number,
                                const EventSchema& schema, const LoadOptions& options = {});
void ValidateSentence(const AnnotatedSentence& sentence, const EventSchema& schema,
                      const LoadOptions& options = {});
nlohmann::json SentenceToJson(const AnnotatedSentence& sentence);

Corpus ReadCorpus(std::istream& in, const EventSchema& schema, const LoadOptions& options = {});
Corpus LoadCorpus(const std::string& path, const EventSchema& schema,
                  const LoadOptions& options = {});
void WriteCorpus(const Corpus& corpus, std::ostream& out);
void WriteCorpus(const Corpus& corpus, const std::string& path);

// Overlap taxonomy.
//   kP1: one span triggers events of two or more distinct types.
//   kP2: one span is an argument in two or more events.
//   kP3: one span holds two or more roles within a single event.
enum class OverlapPattern { kP1, kP2, kP3 };
const char* OverlapPatternName(OverlapPattern p);

// Empty result means a normal sentence.
std::set<OverlapPattern> ClassifyOverlap(const AnnotatedSentence& sentence);

// Shuffles with the seed and cuts into (train, valid, test). Sizes are the
// floors of ratio * n; leftover sentences go to the parts with the largest
// fractional remainders, ties resolved train first. Throws ArgumentError
// unless all ratios are positive and sum to 1 within 1e-9.
std::array<Corpus, 3> SplitCorpus(const Corpus& corpus, const std::array<double, 3>& ratios,
                                  uint64_t seed);
std::array<int, 3> SplitSizes(int n, const std::array<double, 3>& ratios);

}  // namespace cascade

#endif  // CASCADE_SCHEMA_H_
