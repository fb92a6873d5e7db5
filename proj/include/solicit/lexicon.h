#ifndef SOLICIT_LEXICON_H_
#define SOLICIT_LEXICON_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace solicit {

// Named word categories. A pattern is a lowercase literal word, or a stem
// followed by a single trailing '*' that matches every token starting with the
// stem (including the stem itself). Category order is the file order.
class CategoryLexicon {
 public:
  using Entry = std::pair<std::string, std::vector<std::string>>;

  CategoryLexicon() = default;

  // Throws ConfigError when a category is empty, a name repeats, a pattern is
  // empty or has '*' anywhere but at the end.
  static CategoryLexicon FromEntries(std::vector<Entry> entries);
  static CategoryLexicon FromJsonText(std::string_view text,
                                      const std::string& source = "lexicon");

  const std::vector<std::string>& categories() const { return names_; }
  std::size_t size() const { return names_.size(); }
  std::optional<std::size_t> IndexOf(std::string_view category) const;
  const std::vector<std::string>& patterns(std::size_t category) const {
    return patterns_[category];
  }

  // Appends the indices of every category the token belongs to, each once,
  // in ascending order.
  void Match(std::string_view token, std::vector<std::size_t>& out) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<std::string>> patterns_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, std::vector<std::size_t>> literals_;
  std::unordered_map<std::string, std::vector<std::size_t>> stems_;
  std::size_t longest_stem_ = 0;
};

CategoryLexicon LoadLexicon(const std::string& path);

// Trait or facet scores as weighted sums of category scores.
class TraitCoefficients {
 public:
  struct Term {
    std::size_t category;
    double weight;
  };
  struct Trait {
    std::string name;
    std::vector<Term> terms;
  };

  static constexpr const char* kBig5[5] = {"Openness", "Conscientiousness",
                                           "Extraversion", "Agreeableness",
                                           "Neuroticism"};

  TraitCoefficients() = default;

  // Resolves category names against the lexicon; an unknown category or a
  // repeated trait name is a ConfigError. With `require_big5` the five Big5
  // trait names must be present.
  static TraitCoefficients FromJsonText(std::string_view text,
                                        const CategoryLexicon& lexicon,
                                        bool require_big5 = false,
                                        const std::string& source =
                                            "coefficients");

  static TraitCoefficients FromTraits(std::vector<Trait> traits);

  const std::vector<Trait>& traits() const { return traits_; }
  std::size_t size() const { return traits_.size(); }

 private:
  std::vector<Trait> traits_;
};

TraitCoefficients LoadTraitCoefficients(const std::string& path,
                                        const CategoryLexicon& lexicon,
                                        bool require_big5 = false);

struct TokenStream {
  std::vector<std::string> tokens;
  std::size_t total_count() const { return tokens.size(); }
};

// Drops URLs and @-mentions, strips '#', lowercases ASCII letters and splits
// on anything that is not a letter, digit or apostrophe. Apostrophes at a
// token's edges are trimmed. Bytes >= 0x80 are treated as letters so UTF-8
// words stay whole.
TokenStream Tokenize(std::string_view text);

// Appends the tokens of `text` to `stream`.
void AppendTokens(std::string_view text, TokenStream& stream);

// Per-category match counts aligned with lexicon.categories(). A token counts
// once toward every category it matches.
std::vector<std::int64_t> CountMatches(const TokenStream& tokens,
                                       const CategoryLexicon& lexicon);

}  // namespace solicit

#endif  // SOLICIT_LEXICON_H_
