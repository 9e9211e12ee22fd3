#include "trunclab/primes.hpp"

#include "trunclab/errors.hpp"

namespace trunclab {

PrimeList primes_up_to(int64_t bound) {
    if (bound < 0) throw ValidationError("primes_up_to: negative bound");
    PrimeList out;
    out.bound = bound;
    if (bound < 2) return out;
    std::vector<char> composite(static_cast<size_t>(bound) + 1, 0);
    for (int64_t i = 2; i * i <= bound; ++i)
        if (!composite[i])
            for (int64_t j = i * i; j <= bound; j += i) composite[j] = 1;
    for (int64_t i = 2; i <= bound; ++i)
        if (!composite[i]) out.primes.push_back(i);
    return out;
}

uint64_t mulmod_u64(uint64_t a, uint64_t b, uint64_t m) {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

uint64_t powmod_u64(uint64_t base, uint64_t exp, uint64_t m) {
    uint64_t r = 1 % m;
    base %= m;
    while (exp) {
        if (exp & 1) r = mulmod_u64(r, base, m);
        base = mulmod_u64(base, base, m);
        exp >>= 1;
    }
    return r;
}

bool is_prime_u64(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    // these twelve bases are a known deterministic witness set for n < 2^64
    for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        uint64_t x = powmod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) { witness = false; break; }
        }
        if (witness) return false;
    }
    return true;
}

} // namespace trunclab
