#include "fluency/unicode.hpp"

namespace fluency::unicode {

std::vector<char32_t> decode_utf8(std::string_view text) {
  std::vector<char32_t> out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    unsigned char b0 = static_cast<unsigned char>(text[i]);
    char32_t cp = 0xFFFD;
    size_t len = 1;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0 && i + 1 < text.size() &&
               (text[i + 1] & 0xC0) == 0x80) {
      cp = (b0 & 0x1F) << 6 | (text[i + 1] & 0x3F);
      len = 2;
      if (cp < 0x80) cp = 0xFFFD;
    } else if ((b0 & 0xF0) == 0xE0 && i + 2 < text.size() &&
               (text[i + 1] & 0xC0) == 0x80 && (text[i + 2] & 0xC0) == 0x80) {
      cp = (b0 & 0x0F) << 12 | (text[i + 1] & 0x3F) << 6 | (text[i + 2] & 0x3F);
      len = 3;
      if (cp < 0x800) cp = 0xFFFD;
    } else if ((b0 & 0xF8) == 0xF0 && i + 3 < text.size() &&
               (text[i + 1] & 0xC0) == 0x80 && (text[i + 2] & 0xC0) == 0x80 &&
               (text[i + 3] & 0xC0) == 0x80) {
      cp = (b0 & 0x07) << 18 | (text[i + 1] & 0x3F) << 12 |
           (text[i + 2] & 0x3F) << 6 | (text[i + 3] & 0x3F);
      len = 4;
      if (cp < 0x10000 || cp > 0x10FFFF) cp = 0xFFFD;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return out;
}

std::string encode_utf8(const std::vector<char32_t>& cps) {
  std::string out;
  for (char32_t cp : cps) out += encode_utf8(cp);
  return out;
}

namespace {

// Canonical compositions for Tamil two-part vowel signs and ஔ.
char32_t compose_pair(char32_t a, char32_t b) {
  if (a == 0x0BC6 && b == 0x0BBE) return 0x0BCA;
  if (a == 0x0BC7 && b == 0x0BBE) return 0x0BCB;
  if (a == 0x0BC6 && b == 0x0BD7) return 0x0BCC;
  if (a == 0x0B92 && b == 0x0BD7) return 0x0B94;
  return 0;
}

}  // namespace

std::string nfc(std::string_view text) {
  std::vector<char32_t> cps = decode_utf8(text);
  std::vector<char32_t> out;
  out.reserve(cps.size());
  for (char32_t cp : cps) {
    if (!out.empty()) {
      if (char32_t composed = compose_pair(out.back(), cp)) {
        out.back() = composed;
        continue;
      }
    }
    out.push_back(cp);
  }
  return encode_utf8(out);
}

bool is_combining_mark(char32_t cp) {
  if (cp >= 0x0300 && cp <= 0x036F) return true;  // combining diacriticals
  if (cp == 0x0B82) return true;                  // Tamil anusvara
  if (cp >= 0x0BBE && cp <= 0x0BC2) return true;  // Tamil vowel signs
  if (cp >= 0x0BC6 && cp <= 0x0BC8) return true;
  if (cp >= 0x0BCA && cp <= 0x0BCD) return true;  // incl. virama U+0BCD
  if (cp == 0x0BD7) return true;                  // Tamil AU length mark
  if (cp == 0x200C || cp == 0x200D) return true;  // ZWNJ / ZWJ
  return false;
}

std::vector<std::string> grapheme_clusters(std::string_view text) {
  std::vector<char32_t> cps = decode_utf8(nfc(text));
  std::vector<std::string> clusters;
  size_t i = 0;
  while (i < cps.size()) {
    std::string cluster = encode_utf8(cps[i]);
    size_t j = i + 1;
    while (j < cps.size() && is_combining_mark(cps[j])) {
      cluster += encode_utf8(cps[j]);
      ++j;
    }
    clusters.push_back(std::move(cluster));
    i = j;
  }
  return clusters;
}

bool is_whitespace(char32_t cp) {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' ||
         cp == U'\f' || cp == U'\v' || cp == 0x00A0 || cp == 0x3000;
}

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<char32_t> cps = decode_utf8(text);
  std::vector<std::string> tokens;
  std::string current;
  for (char32_t cp : cps) {
    if (is_whitespace(cp)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current += encode_utf8(cp);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

bool is_tamil_consonant(char32_t cp) { return cp >= 0x0B95 && cp <= 0x0BB9; }

bool is_tamil_vowel_sign(char32_t cp) {
  return (cp >= 0x0BBE && cp <= 0x0BC2) || (cp >= 0x0BC6 && cp <= 0x0BC8) ||
         (cp >= 0x0BCA && cp <= 0x0BCC) || cp == 0x0BD7;
}

}  // namespace fluency::unicode
