#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "pdrb/errors.hpp"
#include "pdrb/problem.hpp"

namespace pdrb::greedy {

/// Ξ_train: n points uniform on `box`, drawn from std::mt19937_64(seed).
/// Each coordinate is lo + (hi − lo)·u with u = (rng() >> 11)·2⁻⁵³, so the
/// sequence does not depend on the standard library's distribution code.
inline std::vector<Parameter> make_training_set(std::size_t n, std::uint64_t seed, const ParameterBox& box = {}) {
  PDRB_THROW_IF(n == 0, ErrorCode::invalid_argument, "make_training_set: n must be at least 1");
  std::mt19937_64 rng(seed);
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<Parameter> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = box.lo[0] + (box.hi[0] - box.lo[0]) * unit();
    const double b = box.lo[1] + (box.hi[1] - box.lo[1]) * unit();
    out.emplace_back(a, b);
  }
  return out;
}

/// Worker count: `requested` if nonzero, else PDRB_THREADS, else the
/// hardware concurrency.
inline unsigned worker_count(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PDRB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [begin, end) on up to `threads` workers. The first
/// exception thrown by any body is rethrown after all workers join.
template <class Body>
void parallel_for(std::size_t begin, std::size_t end, unsigned threads, Body&& body) {
  const std::size_t n = end > begin ? end - begin : 0;
  const unsigned w = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
  if (w <= 1) {
    for (std::size_t i = begin; i < end; ++i) body(i);
    return;
  }
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (unsigned k = 0; k < w; ++k)
    pool.emplace_back([&, k] {
      try {
        for (std::size_t i = begin + k; i < end; i += w) body(i);
      } catch (...) {
        const std::lock_guard<std::mutex> g(mu);
        if (!err) err = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace pdrb::greedy
