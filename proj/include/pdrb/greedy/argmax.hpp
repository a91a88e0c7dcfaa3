#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "pdrb/greedy/training.hpp"
#include "pdrb/rb/model.hpp"

namespace pdrb::greedy {

/// Last known η_rb per training point, with the basis size and mesh it was
/// computed for. On one mesh the values are upper bounds for any larger
/// basis, because η_rb is non-increasing in N for nested spaces.
struct SaturationCache {
  fe::MeshStamp stamp;
  std::vector<double> bound;           // NaN = never evaluated
  std::vector<std::size_t> basis_size;

  void reset(std::size_t n) {
    stamp = {};
    bound.assign(n, std::numeric_limits<double>::quiet_NaN());
    basis_size.assign(n, 0);
  }
};

struct ArgmaxOptions {
  bool use_cache = true;
  std::size_t chunk = 256;  // fixed, so the skip pattern is independent of the thread count
  unsigned threads = 0;     // 0 = worker_count()
};

struct ArgmaxResult {
  std::size_t index = 0;
  Parameter mu;
  double eta = 0.0;
  std::size_t skipped = 0;   // skipped in the first pass
  std::size_t verified = 0;  // skipped points re-evaluated because the cache came from another mesh
};

/// argmax of η_rb over `train`, ties to the first occurrence.
///
/// Points are swept in chunks. Inside a chunk, a point is skipped when its
/// cached bound is ≤ the best value found in earlier chunks. If the cache
/// was filled on a different mesh the bounds are only heuristic there, so
/// every skipped point is evaluated afterwards and the result is exact.
inline ArgmaxResult argmax_train(const rb::RBModel& m, std::span<const Parameter> train, SaturationCache* cache,
                                 const ArgmaxOptions& opts = {}) {
  PDRB_THROW_IF(train.empty(), ErrorCode::invalid_argument, "argmax_train: empty training set");
  PDRB_THROW_IF(opts.chunk == 0, ErrorCode::invalid_argument, "argmax_train: chunk size must be positive");
  const std::size_t n = train.size();
  const bool cached = opts.use_cache && cache != nullptr;
  if (cache != nullptr && cache->bound.size() != n) cache->reset(n);
  const bool same_mesh = cached && cache->stamp == m.stamp;
  const unsigned threads = worker_count(opts.threads);

  constexpr double none = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> eta(n, none);
  std::vector<std::size_t> todo;
  ArgmaxResult r;
  double best = -std::numeric_limits<double>::infinity();
  auto eval = [&](std::span<const std::size_t> idx) {
    parallel_for(0, idx.size(), threads, [&](std::size_t k) {
      const std::size_t i = idx[k];
      eta[i] = rb::online_solve(m, train[i]).eta_rb;
    });
  };

  std::vector<std::size_t> skipped;
  for (std::size_t lo = 0; lo < n; lo += opts.chunk) {
    const std::size_t hi = std::min(n, lo + opts.chunk);
    todo.clear();
    for (std::size_t i = lo; i < hi; ++i) {
      const double b = cached ? cache->bound[i] : none;
      if (!std::isnan(b) && b <= best)
        skipped.push_back(i);
      else
        todo.push_back(i);
    }
    eval(todo);
    for (auto i : todo) best = std::max(best, eta[i]);
  }
  r.skipped = skipped.size();
  if (cached && !same_mesh && !skipped.empty()) {
    eval(skipped);
    r.verified = skipped.size();
  }

  best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isnan(eta[i]) && eta[i] > best) {
      best = eta[i];
      r.index = i;
    }
  r.mu = train[r.index];
  r.eta = best;

  if (cache != nullptr) {
    if (!same_mesh) {
      // entries not refreshed here came from the old mesh; drop them
      for (std::size_t i = 0; i < n; ++i)
        if (std::isnan(eta[i])) cache->bound[i] = none;
      cache->stamp = m.stamp;
    }
    for (std::size_t i = 0; i < n; ++i)
      if (!std::isnan(eta[i])) {
        cache->bound[i] = eta[i];
        cache->basis_size[i] = m.N();
      }
  }
  return r;
}

}  // namespace pdrb::greedy
