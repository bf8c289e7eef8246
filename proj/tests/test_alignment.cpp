#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fluency/alignment.hpp"
#include "support/oracles.hpp"

using namespace fluency;

namespace {

std::vector<std::string> toks(std::initializer_list<const char*> list) {
  std::vector<std::string> out;
  for (const char* s : list) out.emplace_back(s);
  return out;
}

// All sequences over {a,b,c} up to the given length.
std::vector<std::vector<std::string>> all_sequences(size_t max_len) {
  const std::vector<std::string> alphabet = {"a", "b", "c"};
  std::vector<std::vector<std::string>> out = {{}};
  std::vector<std::vector<std::string>> frontier = {{}};
  for (size_t len = 1; len <= max_len; ++len) {
    std::vector<std::vector<std::string>> next;
    for (const auto& seq : frontier) {
      for (const auto& tok : alphabet) {
        auto extended = seq;
        extended.push_back(tok);
        next.push_back(extended);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

}  // namespace

TEST_CASE("align identity") {
  auto r = align(toks({"a", "b", "c"}), toks({"a", "b", "c"}));
  CHECK(r.substitutions == 0);
  CHECK(r.insertions == 0);
  CHECK(r.deletions == 0);
  CHECK(r.hits == 3);
  CHECK(r.reference_length == 3);
}

TEST_CASE("align single deletion") {
  auto r = align(toks({"a", "b", "c"}), toks({"a", "c"}));
  CHECK(r.distance() == oracle::edit_distance(toks({"a", "b", "c"}), toks({"a", "c"})));
  CHECK(r.distance() == 1);
  CHECK(r.deletions == 1);
}

TEST_CASE("align empty reference") {
  auto r = align(toks({}), toks({"x", "y"}));
  CHECK(r.insertions == 2);
  CHECK(r.reference_length == 0);
}

TEST_CASE("error_rate basics") {
  CHECK(error_rate({0, 0, 0, 3, 3}) == 0.0);
  // saya suka makan nasi vs saya makan nasi goreng: distance 2 over 4
  CHECK(wer("saya suka makan nasi", "saya makan nasi goreng") == doctest::Approx(0.5));
  CHECK(error_rate({0, 2, 0, 0, 0}) == 1.0);  // capped empty-reference case
  CHECK(error_rate({0, 0, 0, 0, 0}) == 0.0);
}

TEST_CASE("alignment counts satisfy the conservation invariant") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> len(0, 8);
  std::uniform_int_distribution<int> ch(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> a, b;
    for (int i = len(rng); i > 0; --i) a.push_back(std::string(1, 'a' + ch(rng)));
    for (int i = len(rng); i > 0; --i) b.push_back(std::string(1, 'a' + ch(rng)));
    auto r = align(a, b);
    CHECK(r.hits + r.substitutions + r.deletions == r.reference_length);
    CHECK(r.hits >= 0);
    CHECK(r.distance() == oracle::edit_distance(a, b));
  }
}

TEST_CASE("distance symmetry swaps insertions and deletions") {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> len(0, 6);
  std::uniform_int_distribution<int> ch(0, 2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> a, b;
    for (int i = len(rng); i > 0; --i) a.push_back(std::string(1, 'a' + ch(rng)));
    for (int i = len(rng); i > 0; --i) b.push_back(std::string(1, 'a' + ch(rng)));
    auto fwd = align(a, b);
    auto rev = align(b, a);
    CHECK(fwd.distance() == rev.distance());
    CHECK(fwd.insertions == rev.deletions);
    CHECK(fwd.deletions == rev.insertions);
  }
}

TEST_CASE("triangle inequality over random triples") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> len(0, 6);
  std::uniform_int_distribution<int> ch(0, 2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> a, b, c;
    for (int i = len(rng); i > 0; --i) a.push_back(std::string(1, 'a' + ch(rng)));
    for (int i = len(rng); i > 0; --i) b.push_back(std::string(1, 'a' + ch(rng)));
    for (int i = len(rng); i > 0; --i) c.push_back(std::string(1, 'a' + ch(rng)));
    CHECK(align(a, c).distance() <=
          align(a, b).distance() + align(b, c).distance());
  }
}

TEST_CASE("self-alignment has zero rate") {
  auto seqs = all_sequences(4);
  for (const auto& s : seqs) {
    CHECK(error_rate(align(s, s)) == 0.0);
  }
}

TEST_CASE("wer cases") {
  CHECK(wer("abc def", "abc def") == 0.0);
  CHECK(wer("a b c", "a c") == doctest::Approx(1.0 / 3.0));
  CHECK(wer("a b", "") == 1.0);
}

TEST_CASE("wer ignores runs of whitespace") {
  CHECK(wer("a  b\tc", "a b   c") == 0.0);
  CHECK(wer("saya \t suka", "saya suka") == 0.0);
}

TEST_CASE("cer on grapheme clusters") {
  CHECK(cer("identical", "identical") == 0.0);
  // Tamil: clusters of the reference are [அ][ம்][மா]; one deletion
  CHECK(cer("அம்மா", "அமா") == doctest::Approx(1.0 / 3.0));
  CHECK(cer("ab", "ba") == doctest::Approx(1.0));
}

TEST_CASE("cer collapses inter-word whitespace to one separator") {
  CHECK(cer("ab  cd", "ab cd") == 0.0);
}

TEST_CASE("per over phoneme tokens") {
  std::vector<std::string> ref = {"m", "a", "k", "a", "n"};
  std::vector<std::string> hyp = {"m", "a", "k", "a", "m"};
  CHECK(per(ref, ref) == 0.0);
  CHECK(per(ref, hyp) == doctest::Approx(0.2));
  CHECK(per({"ɲ", "a", "ɲ", "i"}, {"n", "a", "n", "i"}) == doctest::Approx(0.5));
}
