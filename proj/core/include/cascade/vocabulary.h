#ifndef CASCADE_VOCABULARY_H_
#define CASCADE_VOCABULARY_H_

#include <string>
#include <unordered_map>
#include <vector>

#include "cascade/schema.h"

namespace cascade {

// Token <-> id table. Ids 0..2 are reserved for padding, unknown tokens and
// the synthetic sentence token used by CLS pooling.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kSentence = 2;

  Vocabulary();

  // Adds tokens in first-appearance order.
  static Vocabulary Build(const Corpus& corpus);
  // Inverse of tokens(): the reserved entries must come first. Throws
  // ParseError otherwise or on a duplicate.
  static Vocabulary FromTokens(const std::vector<std::string>& tokens);

  // One token per line; line number (0-based) is the id.
  static Vocabulary Load(const std::string& path);
  void Save(const std::string& path) const;

  int Add(const std::string& token);
  // Unknown tokens map to kUnk.
  int Id(const std::string& token) const;
  std::vector<int> Encode(const std::vector<std::string>& tokens) const;
  const std::string& Token(int id) const { return tokens_.at(static_cast<size_t>(id)); }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace cascade

#endif  // CASCADE_VOCABULARY_H_
