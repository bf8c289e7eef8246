#include "fluency/g2p.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "fluency/unicode.hpp"

namespace fluency {

namespace {

RuleContext parse_context(std::string_view s, size_t line_no) {
  if (s.empty() || s == "any") return RuleContext::Any;
  if (s == "word_initial") return RuleContext::WordInitial;
  if (s == "word_final") return RuleContext::WordFinal;
  if (s == "between_vowels") return RuleContext::BetweenVowels;
  throw ParseError("rule file line " + std::to_string(line_no) +
                   ": unknown context \"" + std::string(s) + "\"");
}

bool is_vowel_cp(char32_t cp, Language language) {
  if (language == Language::Malay) {
    char32_t lower = (cp >= U'A' && cp <= U'Z') ? cp + 32 : cp;
    return lower == U'a' || lower == U'e' || lower == U'i' || lower == U'o' ||
           lower == U'u';
  }
  return (cp >= 0x0B85 && cp <= 0x0B94) || unicode::is_tamil_vowel_sign(cp);
}

std::vector<char32_t> script_code_points(Language language) {
  std::vector<char32_t> cps;
  if (language == Language::Malay) {
    for (char32_t c = U'a'; c <= U'z'; ++c) cps.push_back(c);
  } else {
    // Tamil letters and dependent signs; gaps in the block are unassigned.
    static const char32_t tamil[] = {
        0x0B85, 0x0B86, 0x0B87, 0x0B88, 0x0B89, 0x0B8A, 0x0B8E, 0x0B8F,
        0x0B90, 0x0B92, 0x0B93, 0x0B94, 0x0B95, 0x0B99, 0x0B9A, 0x0B9C,
        0x0B9E, 0x0B9F, 0x0BA3, 0x0BA4, 0x0BA8, 0x0BA9, 0x0BAA, 0x0BAE,
        0x0BAF, 0x0BB0, 0x0BB1, 0x0BB2, 0x0BB3, 0x0BB4, 0x0BB5, 0x0BB7,
        0x0BB8, 0x0BB9, 0x0BBE, 0x0BBF, 0x0BC0, 0x0BC1, 0x0BC2, 0x0BC6,
        0x0BC7, 0x0BC8, 0x0BCA, 0x0BCB, 0x0BCC};
    cps.assign(std::begin(tamil), std::end(tamil));
  }
  return cps;
}

bool context_ok(const G2pRule& rule, const std::u32string& word, size_t pos,
                Language language) {
  switch (rule.context) {
    case RuleContext::Any:
      return true;
    case RuleContext::WordInitial:
      return pos == 0;
    case RuleContext::WordFinal:
      return pos + rule.pattern_cps.size() == word.size();
    case RuleContext::BetweenVowels: {
      size_t after = pos + rule.pattern_cps.size();
      return pos > 0 && after < word.size() &&
             is_vowel_cp(word[pos - 1], language) &&
             is_vowel_cp(word[after], language);
    }
  }
  return false;
}

std::string cp_hex(char32_t cp) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "U+%04X", static_cast<unsigned>(cp));
  return buf;
}

}  // namespace

RuleTable load_rule_table(std::string_view bytes, Language language) {
  RuleTable table;
  table.language = language;
  if (language == Language::Tamil) {
    table.inherent_vowel = "a";
    table.virama = 0x0BCD;
  }
  std::set<std::pair<std::string, RuleContext>> seen;
  std::istringstream in{std::string(bytes)};
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> cols;
    size_t start = 0;
    while (true) {
      size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos
                                            ? std::string::npos
                                            : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() < 2 || cols.size() > 3) {
      throw ParseError("rule file line " + std::to_string(line_no) +
                       ": expected pattern<TAB>phonemes[<TAB>context]");
    }
    G2pRule rule;
    rule.pattern = unicode::nfc(cols[0]);
    if (rule.pattern.empty()) {
      throw ParseError("rule file line " + std::to_string(line_no) +
                       ": empty pattern");
    }
    std::vector<char32_t> cps = unicode::decode_utf8(rule.pattern);
    rule.pattern_cps.assign(cps.begin(), cps.end());
    if (cols[1] == "-") {
      rule.deletion = true;
    } else {
      for (const std::string& ph : unicode::split_tokens(cols[1])) {
        rule.phonemes.push_back(ph);
      }
      if (rule.phonemes.empty()) {
        throw ValidationError("rule file line " + std::to_string(line_no) +
                              ": empty phoneme output for pattern \"" +
                              rule.pattern + "\" (use \"-\" for deletion)");
      }
    }
    rule.context = parse_context(cols.size() == 3 ? cols[2] : "", line_no);
    if (!seen.insert({rule.pattern, rule.context}).second) {
      throw ValidationError("duplicate rule for pattern \"" + rule.pattern +
                            "\" at line " + std::to_string(line_no));
    }
    table.rules.push_back(std::move(rule));
  }
  if (table.rules.empty()) throw ValidationError("no rules");

  // Longest-match-first; context-specific rules before Any at equal length.
  std::stable_sort(table.rules.begin(), table.rules.end(),
                   [](const G2pRule& a, const G2pRule& b) {
                     if (a.pattern_cps.size() != b.pattern_cps.size()) {
                       return a.pattern_cps.size() > b.pattern_cps.size();
                     }
                     return (a.context != RuleContext::Any) &&
                            (b.context == RuleContext::Any);
                   });

  for (char32_t cp : script_code_points(language)) {
    if (cp == table.virama) continue;
    bool covered = false;
    for (const G2pRule& rule : table.rules) {
      if (rule.pattern_cps.size() == 1 && rule.pattern_cps[0] == cp &&
          rule.context == RuleContext::Any) {
        covered = true;
        break;
      }
    }
    if (!covered) table.uncovered.push_back(cp);
  }
  return table;
}

RuleTable load_rule_table_file(const std::string& path, Language language) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open rule file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_rule_table(buf.str(), language);
}

PhonemeSequence transcribe_word(std::string_view word, const RuleTable& table) {
  PhonemeSequence seq;
  seq.source_word = std::string(word);
  std::vector<char32_t> cps_vec = unicode::decode_utf8(unicode::nfc(word));
  std::u32string cps(cps_vec.begin(), cps_vec.end());
  size_t pos = 0;
  while (pos < cps.size()) {
    const G2pRule* matched = nullptr;
    for (const G2pRule& rule : table.rules) {
      if (pos + rule.pattern_cps.size() > cps.size()) continue;
      if (cps.compare(pos, rule.pattern_cps.size(), rule.pattern_cps) != 0) {
        continue;
      }
      if (!context_ok(rule, cps, pos, table.language)) continue;
      matched = &rule;
      break;
    }
    if (matched == nullptr) {
      if (table.virama != 0 && cps[pos] == table.virama) {
        // Stray virama with no preceding consonant match; nothing to emit.
        ++pos;
        continue;
      }
      seq.diagnostics.push_back("skipped unmatched " + cp_hex(cps[pos]) +
                                " in \"" + seq.source_word + "\"");
      ++pos;
      continue;
    }
    for (const std::string& ph : matched->phonemes) seq.phonemes.push_back(ph);
    size_t next = pos + matched->pattern_cps.size();
    // Tamil inherent vowel: a bare consonant letter carries /a/ unless a
    // vowel sign follows or a virama cancels it.
    if (!table.inherent_vowel.empty() && matched->pattern_cps.size() == 1 &&
        unicode::is_tamil_consonant(matched->pattern_cps[0])) {
      if (next < cps.size() && cps[next] == table.virama) {
        ++next;  // virama consumed, no vowel
      } else if (!(next < cps.size() &&
                   unicode::is_tamil_vowel_sign(cps[next]))) {
        seq.phonemes.push_back(table.inherent_vowel);
      }
    }
    pos = next;
  }
  return seq;
}

std::vector<std::string> transcribe_utterance(std::string_view text,
                                              const RuleTable& table) {
  std::vector<std::string> phonemes;
  for (const std::string& word : unicode::split_tokens(text)) {
    PhonemeSequence seq = transcribe_word(word, table);
    phonemes.insert(phonemes.end(), seq.phonemes.begin(), seq.phonemes.end());
  }
  return phonemes;
}

}  // namespace fluency
