#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Minimal Unicode handling for the scripts this toolkit processes (Latin for
// Malay, Tamil script). Composition and cluster rules cover those scripts;
// anything else passes through code point by code point.

namespace fluency::unicode {

std::vector<char32_t> decode_utf8(std::string_view text);
std::string encode_utf8(char32_t cp);
std::string encode_utf8(const std::vector<char32_t>& cps);

// Canonical composition for the script repertoire in scope. Tamil two-part
// vowel signs (e.g. U+0BC6 + U+0BBE -> U+0BCA) are composed; other sequences
// are left as-is.
std::string nfc(std::string_view text);

// True for code points that extend a grapheme cluster: combining diacritics,
// Tamil dependent vowel signs, virama, anusvara, ZWJ/ZWNJ.
bool is_combining_mark(char32_t cp);

// Extended grapheme clusters of NFC-normalized text, one UTF-8 string each.
std::vector<std::string> grapheme_clusters(std::string_view text);

bool is_whitespace(char32_t cp);

// Split on runs of whitespace; never returns empty tokens.
std::vector<std::string> split_tokens(std::string_view text);

bool is_tamil_consonant(char32_t cp);
bool is_tamil_vowel_sign(char32_t cp);

}  // namespace fluency::unicode
