#include "solicit/lexicon.h"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "json.hpp"
#include "solicit/error.h"
#include "solicit/util.h"

namespace solicit {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json ParseJson(std::string_view text, const std::string& source) {
  try {
    return ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(source, 0, std::string("invalid JSON: ") + e.what());
  }
}

bool IsWordByte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '\'' || c >= 0x80;
}

bool IsHandleByte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_';
}

bool IsSpace(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Position of the first URL start inside a whitespace-free chunk.
std::size_t FindUrl(const std::string& lower_chunk) {
  std::size_t pos = std::string::npos;
  for (const char* marker : {"http://", "https://", "www."}) {
    pos = std::min(pos, lower_chunk.find(marker));
  }
  return pos;
}

void EmitToken(std::string& current, TokenStream& out) {
  std::size_t b = current.find_first_not_of('\'');
  std::size_t e = current.find_last_not_of('\'');
  if (b != std::string::npos) {
    out.tokens.push_back(current.substr(b, e - b + 1));
  }
  current.clear();
}

void TokenizeChunk(std::string chunk, TokenStream& out) {
  // Typographic apostrophe (U+2019) behaves like '\''.
  for (std::size_t p = chunk.find("\xE2\x80\x99"); p != std::string::npos;
       p = chunk.find("\xE2\x80\x99", p)) {
    chunk.replace(p, 3, "'");
  }
  std::string lower = ToLower(chunk);
  const std::size_t url = FindUrl(lower);
  if (url != std::string::npos) lower.resize(url);

  std::string current;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(lower[i]);
    if (c == '@') {
      EmitToken(current, out);
      while (i + 1 < lower.size() &&
             IsHandleByte(static_cast<unsigned char>(lower[i + 1]))) {
        ++i;
      }
      continue;
    }
    if (IsWordByte(c)) {
      current.push_back(static_cast<char>(c));
    } else {
      EmitToken(current, out);
    }
  }
  EmitToken(current, out);
}

}  // namespace

CategoryLexicon CategoryLexicon::FromEntries(std::vector<Entry> entries) {
  CategoryLexicon lex;
  for (auto& [name, patterns] : entries) {
    if (name.empty()) throw ConfigError("lexicon category with empty name");
    if (patterns.empty()) {
      throw ConfigError("lexicon category '" + name + "' has no patterns");
    }
    const std::size_t idx = lex.names_.size();
    if (!lex.index_.emplace(name, idx).second) {
      throw ConfigError("duplicate lexicon category '" + name + "'");
    }
    std::vector<std::string> stored;
    std::set<std::string> seen;
    for (const std::string& raw : patterns) {
      const std::string p = ToLower(raw);
      const std::size_t star = p.find('*');
      if (p.empty() || p == "*") {
        throw ConfigError("empty pattern in category '" + name + "'");
      }
      if (star != std::string::npos && star != p.size() - 1) {
        throw ConfigError("pattern '" + raw + "' in category '" + name +
                          "': '*' must be the final character");
      }
      if (!seen.insert(p).second) continue;
      stored.push_back(p);
      if (star == std::string::npos) {
        lex.literals_[p].push_back(idx);
      } else {
        std::string stem = p.substr(0, p.size() - 1);
        lex.longest_stem_ = std::max(lex.longest_stem_, stem.size());
        lex.stems_[std::move(stem)].push_back(idx);
      }
    }
    lex.names_.push_back(name);
    lex.patterns_.push_back(std::move(stored));
  }
  for (auto* table : {&lex.literals_, &lex.stems_}) {
    for (auto& [key, cats] : *table) {
      std::sort(cats.begin(), cats.end());
      cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
    }
  }
  return lex;
}

CategoryLexicon CategoryLexicon::FromJsonText(std::string_view text,
                                              const std::string& source) {
  const ordered_json j = ParseJson(text, source);
  if (!j.is_object()) {
    throw ConfigError(source + ": lexicon must be a JSON object");
  }
  std::vector<Entry> entries;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_array()) {
      throw ConfigError(source + ": category '" + it.key() +
                        "' must map to an array of patterns");
    }
    std::vector<std::string> patterns;
    for (const auto& p : it.value()) {
      if (!p.is_string()) {
        throw ConfigError(source + ": non-string pattern in '" + it.key() +
                          "'");
      }
      patterns.push_back(p.get<std::string>());
    }
    entries.emplace_back(it.key(), std::move(patterns));
  }
  return FromEntries(std::move(entries));
}

std::optional<std::size_t> CategoryLexicon::IndexOf(
    std::string_view category) const {
  auto it = index_.find(std::string(category));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void CategoryLexicon::Match(std::string_view token,
                            std::vector<std::size_t>& out) const {
  const std::size_t start = out.size();
  if (auto it = literals_.find(std::string(token)); it != literals_.end()) {
    out.insert(out.end(), it->second.begin(), it->second.end());
  }
  const std::size_t max_len = std::min(longest_stem_, token.size());
  std::string prefix;
  prefix.reserve(max_len);
  for (std::size_t len = 1; len <= max_len; ++len) {
    prefix.push_back(token[len - 1]);
    if (auto it = stems_.find(prefix); it != stems_.end()) {
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
  }
  std::sort(out.begin() + static_cast<std::ptrdiff_t>(start), out.end());
  out.erase(std::unique(out.begin() + static_cast<std::ptrdiff_t>(start),
                        out.end()),
            out.end());
}

CategoryLexicon LoadLexicon(const std::string& path) {
  return CategoryLexicon::FromJsonText(ReadFile(path), path);
}

TraitCoefficients TraitCoefficients::FromJsonText(std::string_view text,
                                                  const CategoryLexicon& lexicon,
                                                  bool require_big5,
                                                  const std::string& source) {
  const ordered_json j = ParseJson(text, source);
  if (!j.is_object()) {
    throw ConfigError(source + ": coefficients must be a JSON object");
  }
  std::vector<Trait> traits;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_object()) {
      throw ConfigError(source + ": trait '" + it.key() +
                        "' must map to an object of category weights");
    }
    Trait trait{it.key(), {}};
    for (auto c = it.value().begin(); c != it.value().end(); ++c) {
      auto idx = lexicon.IndexOf(c.key());
      if (!idx) {
        throw ConfigError(source + ": trait '" + it.key() +
                          "' references unknown category '" + c.key() + "'");
      }
      if (!c.value().is_number()) {
        throw ConfigError(source + ": weight for '" + it.key() + "/" +
                          c.key() + "' is not a number");
      }
      trait.terms.push_back({*idx, c.value().get<double>()});
    }
    traits.push_back(std::move(trait));
  }
  TraitCoefficients out = FromTraits(std::move(traits));
  if (require_big5) {
    for (const char* name : kBig5) {
      const bool found =
          std::any_of(out.traits_.begin(), out.traits_.end(),
                      [&](const Trait& t) { return t.name == name; });
      if (!found) {
        throw ConfigError(source + ": missing Big5 trait '" +
                          std::string(name) + "'");
      }
    }
  }
  return out;
}

TraitCoefficients TraitCoefficients::FromTraits(std::vector<Trait> traits) {
  std::unordered_set<std::string> names;
  for (const Trait& t : traits) {
    if (!names.insert(t.name).second) {
      throw ConfigError("duplicate trait '" + t.name + "'");
    }
  }
  TraitCoefficients out;
  out.traits_ = std::move(traits);
  return out;
}

TraitCoefficients LoadTraitCoefficients(const std::string& path,
                                        const CategoryLexicon& lexicon,
                                        bool require_big5) {
  return TraitCoefficients::FromJsonText(ReadFile(path), lexicon, require_big5,
                                         path);
}

void AppendTokens(std::string_view text, TokenStream& stream) {
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    std::size_t j = i;
    while (j < text.size() && !IsSpace(static_cast<unsigned char>(text[j]))) {
      ++j;
    }
    if (j > i) TokenizeChunk(std::string(text.substr(i, j - i)), stream);
    i = j;
  }
}

TokenStream Tokenize(std::string_view text) {
  TokenStream out;
  AppendTokens(text, out);
  return out;
}

std::vector<std::int64_t> CountMatches(const TokenStream& tokens,
                                       const CategoryLexicon& lexicon) {
  std::vector<std::int64_t> counts(lexicon.size(), 0);
  std::vector<std::size_t> hits;
  for (const std::string& tok : tokens.tokens) {
    hits.clear();
    lexicon.Match(tok, hits);
    for (std::size_t c : hits) ++counts[c];
  }
  return counts;
}

}  // namespace solicit
