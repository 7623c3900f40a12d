#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace atf::kernels {

// Decodes UTF-8 into codepoints; invalid bytes become one codepoint each.
std::vector<uint32_t> utf8_codepoints(std::string_view text);

size_t levenshtein(std::span<const uint32_t> a, std::span<const uint32_t> b);

// 1 - distance / max(len_a, len_b) over codepoints; 1.0 when both empty.
double normalized_levenshtein(std::string_view a, std::string_view b);

// Similarity of one reference against every candidate.
std::vector<double> similarity_batch_serial(
    std::string_view reference, const std::vector<std::string>& candidates);
std::vector<double> similarity_batch_openmp(
    std::string_view reference, const std::vector<std::string>& candidates);
std::vector<double> similarity_batch(std::string_view reference,
                                     const std::vector<std::string>& candidates,
                                     int workers = 0);

// Row-major embedding block; every row has the same width.
struct EmbeddingMatrix {
  size_t dim = 0;
  std::vector<float> data;

  size_t rows() const { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const float> row(size_t i) const {
    return std::span<const float>(data.data() + i * dim, dim);
  }
  void append(std::span<const float> values);
};

double cosine(std::span<const float> a, std::span<const float> b);

// Per row of `queries`, the maximum cosine against any row of `corpus`.
// Empty corpus yields 0 for every row.
std::vector<double> max_cosine_serial(const EmbeddingMatrix& queries,
                                      const EmbeddingMatrix& corpus);
std::vector<double> max_cosine_openmp(const EmbeddingMatrix& queries,
                                      const EmbeddingMatrix& corpus);
std::vector<double> max_cosine(const EmbeddingMatrix& queries,
                               const EmbeddingMatrix& corpus, int workers = 0);

}  // namespace atf::kernels
