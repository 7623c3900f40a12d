// Compares the serial reference kernels against their OpenMP variants and
// checks that both produce identical results. Exits nonzero on mismatch.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "atf/backends/mocks.hpp"
#include "atf/kernels/similarity.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string random_statement(std::mt19937_64& gen, size_t length) {
  static const std::string alphabet =
      "abcdefghijklmnopqrstuvwxyz ():=->∀∃∧∨ℕℝ0123456789\n";
  std::vector<uint32_t> pool = atf::kernels::utf8_codepoints(alphabet);
  std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
  std::string out = "theorem t : ";
  for (size_t i = 0; i < length; ++i) {
    uint32_t cp = pool[pick(gen)];
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out + " := by sorry";
}

bool report(const char* name, double serial_s, double parallel_s,
            bool match) {
  std::printf("%-18s serial %8.3f s   openmp %8.3f s   speedup %5.2fx   %s\n",
              name, serial_s, parallel_s,
              parallel_s > 0 ? serial_s / parallel_s : 0.0,
              match ? "results match" : "RESULTS DIFFER");
  return match;
}

}  // namespace

int main(int argc, char** argv) {
  size_t candidates = argc > 1 ? std::stoul(argv[1]) : 2000;
  size_t train_rows = argc > 2 ? std::stoul(argv[2]) : 1500;
  size_t bench_rows = argc > 3 ? std::stoul(argv[3]) : 400;

#ifdef _OPENMP
  std::printf("openmp enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("openmp disabled at build time; comparing serial to serial\n");
#endif

  std::mt19937_64 gen(20240817);
  std::string reference = random_statement(gen, 400);
  std::vector<std::string> pool;
  pool.reserve(candidates);
  for (size_t i = 0; i < candidates; ++i) {
    pool.push_back(random_statement(gen, 380 + (i % 41)));
  }

  auto start = Clock::now();
  std::vector<double> serial =
      atf::kernels::similarity_batch_serial(reference, pool);
  double serial_s = seconds_since(start);

  start = Clock::now();
  std::vector<double> parallel =
      atf::kernels::similarity_batch_openmp(reference, pool);
  double parallel_s = seconds_since(start);

  bool ok = report("edit-similarity", serial_s, parallel_s,
                   serial == parallel);

  atf::backends::HashEmbeddingClient embedder(384);
  atf::kernels::EmbeddingMatrix train{384, {}};
  atf::kernels::EmbeddingMatrix bench{384, {}};
  for (size_t i = 0; i < train_rows; ++i) {
    train.append(embedder.embed_one(random_statement(gen, 200)));
  }
  for (size_t i = 0; i < bench_rows; ++i) {
    bench.append(embedder.embed_one(random_statement(gen, 200)));
  }

  start = Clock::now();
  std::vector<double> cos_serial =
      atf::kernels::max_cosine_serial(train, bench);
  double cos_serial_s = seconds_since(start);

  start = Clock::now();
  std::vector<double> cos_parallel =
      atf::kernels::max_cosine_openmp(train, bench);
  double cos_parallel_s = seconds_since(start);

  ok = report("max-cosine", cos_serial_s, cos_parallel_s,
              cos_serial == cos_parallel) &&
       ok;

  return ok ? 0 : 1;
}
