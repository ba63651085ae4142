#include "cascade/vocabulary.h"

#include <fstream>

#include "cascade/errors.h"

namespace cascade {

Vocabulary::Vocabulary() {
  Add("[PAD]");
  Add("[UNK]");
  Add("[SENT]");
}

Vocabulary Vocabulary::Build(const Corpus& corpus) {
  Vocabulary v;
  for (const auto& s : corpus.sentences) {
    for (const auto& t : s.tokens) v.Add(t);
  }
  return v;
}

Vocabulary Vocabulary::FromTokens(const std::vector<std::string>& tokens) {
  if (tokens.size() < 3 || tokens[0] != "[PAD]" || tokens[1] != "[UNK]" ||
      tokens[2] != "[SENT]") {
    throw ParseError("vocabulary must start with [PAD], [UNK], [SENT]");
  }
  Vocabulary v;
  for (size_t i = 3; i < tokens.size(); ++i) {
    if (v.Add(tokens[i]) != static_cast<int>(i)) {
      throw ParseError("duplicate vocabulary entry " + tokens[i], static_cast<int>(i) + 1);
    }
  }
  return v;
}

Vocabulary Vocabulary::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open vocabulary file " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) tokens.push_back(line);
  return FromTokens(tokens);
}

void Vocabulary::Save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write vocabulary file " + path);
  for (const auto& t : tokens_) out << t << "\n";
}

int Vocabulary::Add(const std::string& token) {
  auto it = ids_.find(token);
  if (it != ids_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  ids_.emplace(token, id);
  return id;
}

int Vocabulary::Id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

std::vector<int> Vocabulary::Encode(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(Id(t));
  return ids;
}

}  // namespace cascade
