#include "atf/kernels/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "atf/errors.hpp"

namespace atf::kernels {

std::vector<uint32_t> utf8_codepoints(std::string_view text) {
  std::vector<uint32_t> cps;
  cps.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    uint32_t cp = c;
    size_t extra = 0;
    if (c >= 0xf0) {
      extra = 3;
      cp = c & 0x07u;
    } else if (c >= 0xe0) {
      extra = 2;
      cp = c & 0x0fu;
    } else if (c >= 0xc0) {
      extra = 1;
      cp = c & 0x1fu;
    }
    if (i + extra >= text.size() && extra > 0) {
      cps.push_back(c);  // truncated sequence, keep the byte
      ++i;
      continue;
    }
    bool ok = true;
    for (size_t k = 1; k <= extra; ++k) {
      unsigned char cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xc0u) != 0x80u) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cc & 0x3fu);
    }
    if (!ok) {
      cps.push_back(c);
      ++i;
      continue;
    }
    cps.push_back(cp);
    i += extra + 1;
  }
  return cps;
}

size_t levenshtein(std::span<const uint32_t> a, std::span<const uint32_t> b) {
  if (a.size() < b.size()) return levenshtein(b, a);
  if (b.empty()) return a.size();

  std::vector<size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), size_t{0});
  for (size_t i = 1; i <= a.size(); ++i) {
    size_t diag = row[0];
    row[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      diag = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
    }
  }
  return row[b.size()];
}

double normalized_levenshtein(std::string_view a, std::string_view b) {
  auto ca = utf8_codepoints(a);
  auto cb = utf8_codepoints(b);
  size_t longest = std::max(ca.size(), cb.size());
  if (longest == 0) return 1.0;
  size_t dist = levenshtein(ca, cb);
  return 1.0 - static_cast<double>(dist) / static_cast<double>(longest);
}

std::vector<double> similarity_batch_serial(
    std::string_view reference, const std::vector<std::string>& candidates) {
  std::vector<double> out(candidates.size());
  auto ref = utf8_codepoints(reference);
  for (size_t i = 0; i < candidates.size(); ++i) {
    auto cand = utf8_codepoints(candidates[i]);
    size_t longest = std::max(ref.size(), cand.size());
    out[i] = longest == 0
                 ? 1.0
                 : 1.0 - static_cast<double>(levenshtein(ref, cand)) /
                             static_cast<double>(longest);
  }
  return out;
}

std::vector<double> similarity_batch_openmp(
    std::string_view reference, const std::vector<std::string>& candidates) {
  std::vector<double> out(candidates.size());
  auto ref = utf8_codepoints(reference);
  const int64_t n = static_cast<int64_t>(candidates.size());
#pragma omp parallel for schedule(dynamic)
  for (int64_t i = 0; i < n; ++i) {
    auto cand = utf8_codepoints(candidates[static_cast<size_t>(i)]);
    size_t longest = std::max(ref.size(), cand.size());
    out[static_cast<size_t>(i)] =
        longest == 0 ? 1.0
                     : 1.0 - static_cast<double>(levenshtein(ref, cand)) /
                                 static_cast<double>(longest);
  }
  return out;
}

std::vector<double> similarity_batch(std::string_view reference,
                                     const std::vector<std::string>& candidates,
                                     int workers) {
#ifdef _OPENMP
  if (workers != 1) {
    if (workers > 1) omp_set_num_threads(workers);
    return similarity_batch_openmp(reference, candidates);
  }
#endif
  (void)workers;
  return similarity_batch_serial(reference, candidates);
}

void EmbeddingMatrix::append(std::span<const float> values) {
  if (dim == 0) dim = values.size();
  if (values.size() != dim) {
    throw DomainError("embedding width mismatch: expected " +
                      std::to_string(dim) + ", got " +
                      std::to_string(values.size()));
  }
  data.insert(data.end(), values.begin(), values.end());
}

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw DomainError("cosine over vectors of different widths");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<double> max_cosine_serial(const EmbeddingMatrix& queries,
                                      const EmbeddingMatrix& corpus) {
  if (corpus.rows() > 0 && queries.rows() > 0 && queries.dim != corpus.dim) {
    throw DomainError("embedding width mismatch between matrices");
  }
  std::vector<double> out(queries.rows(), 0.0);
  for (size_t i = 0; i < queries.rows(); ++i) {
    double best = 0.0;
    for (size_t j = 0; j < corpus.rows(); ++j) {
      best = std::max(best, cosine(queries.row(i), corpus.row(j)));
    }
    out[i] = best;
  }
  return out;
}

std::vector<double> max_cosine_openmp(const EmbeddingMatrix& queries,
                                      const EmbeddingMatrix& corpus) {
  if (corpus.rows() > 0 && queries.rows() > 0 && queries.dim != corpus.dim) {
    throw DomainError("embedding width mismatch between matrices");
  }
  std::vector<double> out(queries.rows(), 0.0);
  const int64_t n = static_cast<int64_t>(queries.rows());
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) {
    double best = 0.0;
    for (size_t j = 0; j < corpus.rows(); ++j) {
      best = std::max(best,
                      cosine(queries.row(static_cast<size_t>(i)),
                             corpus.row(j)));
    }
    out[static_cast<size_t>(i)] = best;
  }
  return out;
}

std::vector<double> max_cosine(const EmbeddingMatrix& queries,
                               const EmbeddingMatrix& corpus, int workers) {
#ifdef _OPENMP
  if (workers != 1) {
    if (workers > 1) omp_set_num_threads(workers);
    return max_cosine_openmp(queries, corpus);
  }
#endif
  (void)workers;
  return max_cosine_serial(queries, corpus);
}

}  // namespace atf::kernels
