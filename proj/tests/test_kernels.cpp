#include <random>
#include <string>
#include <vector>

#include <doctest.h>

#include "atf/errors.hpp"
#include "atf/kernels/similarity.hpp"

namespace kernels = atf::kernels;

TEST_CASE("utf8 decoding counts codepoints, not bytes") {
  CHECK(kernels::utf8_codepoints("abc").size() == 3);
  CHECK(kernels::utf8_codepoints("\xe2\x88\x80x").size() == 2);
  CHECK(kernels::utf8_codepoints("").empty());
  // A stray continuation byte decodes as one unit instead of derailing.
  CHECK(kernels::utf8_codepoints("a\x80z").size() == 3);
}

TEST_CASE("levenshtein classic example") {
  auto a = kernels::utf8_codepoints("kitten");
  auto b = kernels::utf8_codepoints("sitting");
  CHECK(kernels::levenshtein(a, b) == 3);
  CHECK(kernels::levenshtein(b, a) == 3);
  CHECK(kernels::levenshtein(a, a) == 0);
  CHECK(kernels::levenshtein({}, b) == 7);
}

TEST_CASE("normalized similarity values") {
  CHECK(kernels::normalized_levenshtein("kitten", "sitting") ==
        doctest::Approx(0.5714285714285714).epsilon(1e-15));
  CHECK(kernels::normalized_levenshtein("", "") == 1.0);
  CHECK(kernels::normalized_levenshtein("a", "") == 0.0);
  CHECK(kernels::normalized_levenshtein("same", "same") == 1.0);
  // One substitution in a two-codepoint string, measured per codepoint.
  CHECK(kernels::normalized_levenshtein("\xe2\x88\x80x", "\xe2\x88\x83x") ==
        doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("similarity batch: serial and openmp agree") {
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<int> letter('a', 'z');
  std::uniform_int_distribution<size_t> length(0, 60);
  std::vector<std::string> candidates;
  for (int i = 0; i < 200; ++i) {
    std::string s;
    size_t n = length(gen);
    for (size_t j = 0; j < n; ++j) s.push_back(static_cast<char>(letter(gen)));
    candidates.push_back(std::move(s));
  }
  std::string reference = "theorem t : 1 + 1 = 2 := by sorry";
  auto serial = kernels::similarity_batch_serial(reference, candidates);
  auto parallel = kernels::similarity_batch_openmp(reference, candidates);
  CHECK(serial == parallel);
  CHECK(kernels::similarity_batch(reference, candidates, 1) == serial);
  CHECK(serial.size() == candidates.size());
}

TEST_CASE("cosine handles zero vectors and mismatched widths") {
  std::vector<float> a{1.0f, 0.0f};
  std::vector<float> b{0.0f, 1.0f};
  std::vector<float> zero{0.0f, 0.0f};
  std::vector<float> wide{1.0f, 0.0f, 0.0f};
  CHECK(kernels::cosine(a, a) == doctest::Approx(1.0));
  CHECK(kernels::cosine(a, b) == 0.0);
  CHECK(kernels::cosine(a, zero) == 0.0);
  CHECK_THROWS_AS(kernels::cosine(a, wide), atf::DomainError);
}

TEST_CASE("embedding matrix appends enforce a fixed width") {
  kernels::EmbeddingMatrix m{3, {}};
  m.append(std::vector<float>{1, 2, 3});
  CHECK(m.rows() == 1);
  CHECK_THROWS_AS(m.append(std::vector<float>{1, 2}), atf::DomainError);
}

TEST_CASE("max cosine per query row") {
  kernels::EmbeddingMatrix queries{2, {1, 0, 0, 1, 1, 1}};
  kernels::EmbeddingMatrix corpus{2, {1, 0, -1, 0}};
  auto scores = kernels::max_cosine(queries, corpus);
  REQUIRE(scores.size() == 3);
  CHECK(scores[0] == doctest::Approx(1.0));
  CHECK(scores[1] == doctest::Approx(0.0));
  CHECK(scores[2] == doctest::Approx(0.7071067811865475));

  kernels::EmbeddingMatrix empty{2, {}};
  auto against_empty = kernels::max_cosine(queries, empty);
  CHECK(against_empty == std::vector<double>{0.0, 0.0, 0.0});

  CHECK(kernels::max_cosine_serial(queries, corpus) ==
        kernels::max_cosine_openmp(queries, corpus));
}
