#include "trajsal/common/random.hpp"

#include <vector>

namespace trajsal {

namespace {

// splitmix64 finalizer; spreads nearby tags over the whole seed space.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng derive_rng(std::uint64_t master_seed, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = mix(master_seed);
  for (std::uint64_t t : tags) h = mix(h ^ mix(t));
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                                   static_cast<std::uint32_t>(master_seed),
                                   static_cast<std::uint32_t>(master_seed >> 32)};
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

bool bernoulli(Rng& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return std::bernoulli_distribution(p)(rng);
}

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

}  // namespace trajsal
