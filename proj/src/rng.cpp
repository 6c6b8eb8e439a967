#include "bpre/rng.h"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace bpre {

namespace {
auto lo32(std::uint64_t x) -> std::uint32_t { return static_cast<std::uint32_t>(x & 0xffffffffu); }
auto hi32(std::uint64_t x) -> std::uint32_t { return static_cast<std::uint32_t>(x >> 32); }
}  // namespace

Rng_stream::Rng_stream(std::uint64_t root_seed, std::uint64_t replicate_index)
    : root_seed_{root_seed}, replicate_index_{replicate_index} {
  // Domain tag keeps these streams apart from a bare seed_seq on the same words
  auto seq = std::seed_seq{0x62707265u, lo32(root_seed), hi32(root_seed),
                           lo32(replicate_index), hi32(replicate_index)};
  engine_.seed(seq);
}

auto Rng_stream::uniform() -> double {
  return std::uniform_real_distribution<double>{0.0, 1.0}(engine_);
}

auto worker_count() -> int {
  const char* env = std::getenv("BPRE_THREADS");
  if (env == nullptr) { return 1; }
  try {
    return std::clamp(std::stoi(env), 1, 256);
  } catch (...) {
    return 1;
  }
}

}  // namespace bpre
