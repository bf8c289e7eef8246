#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fluency/types.hpp"

namespace fluency {

enum class RuleContext { Any, WordInitial, WordFinal, BetweenVowels };

struct G2pRule {
  std::string pattern;                // grapheme pattern, non-empty
  std::u32string pattern_cps;         // decoded form, filled at load
  std::vector<std::string> phonemes;  // empty only for deletion rules
  RuleContext context = RuleContext::Any;
  bool deletion = false;
};

// Ordered rule set for one language's script. Rules are kept longest-pattern
// first; among equal-length patterns, context-specific rules come before Any.
struct RuleTable {
  Language language = Language::Malay;
  std::vector<G2pRule> rules;
  std::string inherent_vowel;  // Tamil: "a"; empty when unused
  char32_t virama = 0;         // Tamil: U+0BCD; 0 when unused

  // Code points of the script with no matching single-character rule,
  // collected at load time (fallback-completeness warning).
  std::vector<char32_t> uncovered;
};

struct PhonemeSequence {
  std::vector<std::string> phonemes;
  std::string source_word;
  std::vector<std::string> diagnostics;  // skipped characters etc.
};

// Parses the tab-separated rule file format:
//   pattern<TAB>phonemes (space-separated IPA, "-" for deletion)<TAB>context
// Context column optional (defaults to any). "#" comments and blank lines
// are ignored. Throws ParseError / ValidationError on bad files.
RuleTable load_rule_table(std::string_view bytes, Language language);

// Loads the rule table shipped for the language from a file path.
RuleTable load_rule_table_file(const std::string& path, Language language);

// Greedy longest-match left-to-right transduction of one word (no
// whitespace). For Tamil, a consonant letter without a following vowel sign
// or virama emits the inherent vowel; virama suppresses it. Unmatched code
// points are skipped with a diagnostic.
PhonemeSequence transcribe_word(std::string_view word, const RuleTable& table);

// Concatenated per-word transcription; word boundaries are dropped.
std::vector<std::string> transcribe_utterance(std::string_view text,
                                              const RuleTable& table);

}  // namespace fluency
