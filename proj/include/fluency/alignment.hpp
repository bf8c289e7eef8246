#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fluency {

// Edit-operation counts of one minimum-cost alignment.
// hits + substitutions + deletions == reference_length.
struct AlignmentResult {
  int64_t substitutions = 0;
  int64_t insertions = 0;
  int64_t deletions = 0;
  int64_t hits = 0;
  int64_t reference_length = 0;

  int64_t distance() const { return substitutions + insertions + deletions; }
};

// Minimum-edit-distance alignment with unit costs. Tie-breaking prefers a
// substitution over an insertion+deletion pair; op counts for other
// equal-cost alignments follow the backtrack order (diagonal, deletion,
// insertion), total cost is always the Levenshtein distance.
template <typename T>
AlignmentResult align(std::span<const T> reference, std::span<const T> hypothesis) {
  const size_t m = reference.size();
  const size_t n = hypothesis.size();
  std::vector<int64_t> dp((m + 1) * (n + 1));
  auto at = [&](size_t i, size_t j) -> int64_t& { return dp[i * (n + 1) + j]; };
  for (size_t i = 0; i <= m; ++i) at(i, 0) = static_cast<int64_t>(i);
  for (size_t j = 0; j <= n; ++j) at(0, j) = static_cast<int64_t>(j);
  for (size_t i = 1; i <= m; ++i) {
    for (size_t j = 1; j <= n; ++j) {
      int64_t diag = at(i - 1, j - 1) + (reference[i - 1] == hypothesis[j - 1] ? 0 : 1);
      int64_t del = at(i - 1, j) + 1;
      int64_t ins = at(i, j - 1) + 1;
      at(i, j) = std::min({diag, del, ins});
    }
  }
  AlignmentResult result;
  result.reference_length = static_cast<int64_t>(m);
  size_t i = m, j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      bool match = reference[i - 1] == hypothesis[j - 1];
      int64_t diag = at(i - 1, j - 1) + (match ? 0 : 1);
      if (diag == at(i, j)) {
        match ? ++result.hits : ++result.substitutions;
        --i, --j;
        continue;
      }
    }
    if (i > 0 && at(i - 1, j) + 1 == at(i, j)) {
      ++result.deletions;
      --i;
    } else {
      ++result.insertions;
      --j;
    }
  }
  return result;
}

template <typename T>
AlignmentResult align(const std::vector<T>& reference, const std::vector<T>& hypothesis) {
  return align(std::span<const T>(reference), std::span<const T>(hypothesis));
}

// (S+I+D)/N. Empty-reference convention: 0.0 when the hypothesis is also
// empty, 1.0 otherwise; rates stay bounded for downstream classifiers.
double error_rate(const AlignmentResult& result);

// Error rate over whitespace-split, NFC-normalized word tokens.
double wer(std::string_view reference, std::string_view hypothesis);

// Error rate over extended grapheme clusters of NFC-normalized text, with
// inter-word whitespace collapsed to a single separator cluster.
double cer(std::string_view reference, std::string_view hypothesis);

// Error rate over phoneme tokens (as produced by the g2p module).
double per(const std::vector<std::string>& reference_phonemes,
           const std::vector<std::string>& hypothesis_phonemes);

}  // namespace fluency
