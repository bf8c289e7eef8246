#include "fluency/alignment.hpp"

#include "fluency/unicode.hpp"

namespace fluency {

double error_rate(const AlignmentResult& result) {
  if (result.reference_length == 0) {
    return result.insertions == 0 ? 0.0 : 1.0;
  }
  return static_cast<double>(result.distance()) /
         static_cast<double>(result.reference_length);
}

double wer(std::string_view reference, std::string_view hypothesis) {
  std::vector<std::string> ref = unicode::split_tokens(unicode::nfc(reference));
  std::vector<std::string> hyp = unicode::split_tokens(unicode::nfc(hypothesis));
  return error_rate(align(ref, hyp));
}

namespace {

// Grapheme clusters of each word, with one space cluster between words.
std::vector<std::string> cer_units(std::string_view text) {
  std::vector<std::string> units;
  for (const std::string& word : unicode::split_tokens(text)) {
    if (!units.empty()) units.push_back(" ");
    for (std::string& cluster : unicode::grapheme_clusters(word)) {
      units.push_back(std::move(cluster));
    }
  }
  return units;
}

}  // namespace

double cer(std::string_view reference, std::string_view hypothesis) {
  return error_rate(align(cer_units(reference), cer_units(hypothesis)));
}

double per(const std::vector<std::string>& reference_phonemes,
           const std::vector<std::string>& hypothesis_phonemes) {
  return error_rate(align(reference_phonemes, hypothesis_phonemes));
}

}  // namespace fluency
