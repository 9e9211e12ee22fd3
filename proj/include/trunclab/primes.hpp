#pragma once
#include <cstdint>
#include <vector>

namespace trunclab {

// Exactly the primes <= bound, ascending.
struct PrimeList {
    int64_t bound = 0;
    std::vector<int64_t> primes;
};

PrimeList primes_up_to(int64_t bound);

// Deterministic Miller-Rabin, valid for all n < 2^64.
bool is_prime_u64(uint64_t n);

// mulmod/powmod on 64-bit words via 128-bit intermediates.
uint64_t mulmod_u64(uint64_t a, uint64_t b, uint64_t m);
uint64_t powmod_u64(uint64_t base, uint64_t exp, uint64_t m);

} // namespace trunclab
