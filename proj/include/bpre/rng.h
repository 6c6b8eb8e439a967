#pragma once

#include <cstdint>
#include <random>

namespace bpre {

// Independent stream per (root_seed, replicate_index).  Same key, same draws,
// regardless of which worker consumes it.
class Rng_stream {
 public:
  Rng_stream(std::uint64_t root_seed, std::uint64_t replicate_index);

  auto engine() -> std::mt19937_64& { return engine_; }
  auto uniform() -> double;  // in [0, 1)
  auto root_seed() const -> std::uint64_t { return root_seed_; }
  auto replicate_index() const -> std::uint64_t { return replicate_index_; }

 private:
  std::uint64_t root_seed_;
  std::uint64_t replicate_index_;
  std::mt19937_64 engine_;
};

// Worker count from BPRE_THREADS (default 1, clamped to [1, 256]).
auto worker_count() -> int;

}  // namespace bpre
