#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace flumn {

// Raised for anything a user could have caused: malformed input files,
// inconsistent dimensions, out-of-range configuration, violated call
// preconditions.  The CLI maps it to exit code 1; every other exception is
// treated as an internal failure (exit code 2).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent per-item seeds so that
// parallel loops give identical results regardless of thread schedule.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);

// Worker count for embarrassingly parallel loops: FLUMN_THREADS if set
// (minimum 1), otherwise the hardware concurrency.
int thread_cap();

// Runs fn(0..n-1), possibly across threads.  fn must not touch shared
// mutable state other than its own slot.  Exceptions are rethrown in the
// calling thread (first one wins).
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace flumn
