#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace trajsal {

using Rng = std::mt19937_64;

/// Derives an independent generator from a master seed and a list of stream
/// tags (split, iteration, worker...). Same inputs give the same stream.
Rng derive_rng(std::uint64_t master_seed, std::initializer_list<std::uint64_t> tags);

double uniform(Rng& rng, double lo, double hi);
double standard_normal(Rng& rng);
bool bernoulli(Rng& rng, double p);
int uniform_int(Rng& rng, int lo, int hi);  // inclusive bounds

}  // namespace trajsal
