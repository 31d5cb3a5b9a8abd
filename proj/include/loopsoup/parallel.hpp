#pragma once

#include <cstdint>
#include <cstdlib>
#include <vector>

#ifdef LOOPSOUP_HAVE_OPENMP
#include <omp.h>
#endif

#include "loopsoup/rng.hpp"

namespace loopsoup {

inline int worker_count() {
#ifdef LOOPSOUP_HAVE_OPENMP
  int t = omp_get_max_threads();
#else
  int t = 1;
#endif
  if (const char* env = std::getenv("LOOPSOUP_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1 && cap < t) t = cap;
  }
  return t;
}

// Replication driver: runs body(acc, rep, rng) for rep = 0..reps-1 with one
// independent stream per replication, accumulating into fixed-size blocks that
// are merged in index order. The result is a pure function of (seed, tag,
// reps) - identical under any thread count, and identical to the serial
// reference path.
template <typename Acc, typename Body>
Acc replicate_parallel(long reps, uint64_t seed, uint64_t tag, Body&& body) {
  constexpr long kBlock = 1024;
  const long nblocks = (reps + kBlock - 1) / kBlock;
  std::vector<Acc> blocks(static_cast<size_t>(nblocks));
#ifdef LOOPSOUP_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count())
#endif
  for (long b = 0; b < nblocks; ++b) {
    Acc& acc = blocks[b];
    const long hi = std::min(reps, (b + 1) * kBlock);
    for (long r = b * kBlock; r < hi; ++r) {
      Rng rng(seed, tag, static_cast<uint64_t>(r));
      body(acc, r, rng);
    }
  }
  Acc total;
  for (Acc& a : blocks) total.merge(std::move(a));
  return total;
}

// serial reference implementation with the same contract
template <typename Acc, typename Body>
Acc replicate_serial(long reps, uint64_t seed, uint64_t tag, Body&& body) {
  constexpr long kBlock = 1024;
  const long nblocks = (reps + kBlock - 1) / kBlock;
  Acc total;
  for (long b = 0; b < nblocks; ++b) {
    Acc acc;
    const long hi = std::min(reps, (b + 1) * kBlock);
    for (long r = b * kBlock; r < hi; ++r) {
      Rng rng(seed, tag, static_cast<uint64_t>(r));
      body(acc, r, rng);
    }
    total.merge(std::move(acc));
  }
  return total;
}

template <typename Acc, typename Body>
Acc replicate(long reps, uint64_t seed, uint64_t tag, Body&& body, bool serial = false) {
  if (serial) return replicate_serial<Acc>(reps, seed, tag, body);
  return replicate_parallel<Acc>(reps, seed, tag, body);
}

}  // namespace loopsoup
