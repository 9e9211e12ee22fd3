#pragma once
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "trunclab/multfunc.hpp"

namespace trunclab {

// Jacobi symbol (a/n); n must be odd and positive
int jacobi(int64_t a, int64_t n);

// f = lambda flipped to +1 exactly on the primes in (x/(N+1), x/N]
struct WindowConstruction {
    int64_t x = 0;
    int64_t N = 0;
    std::vector<int64_t> window_primes;
    PrimeAssignment assignment;
};

struct WindowIdentity {
    ExactSum lhs;  // sum_{n<=x} f(n)/n
    ExactSum rhs;  // sum_{n<=x} lambda(n)/n + window correction
    bool exact_equal = false;
    // true when the correction reduces to the single-prime display
    // 2 sum_p (1/p) sum_{l<=x/p} lambda(l)/l, i.e. no integer <= x carries
    // two window-prime factors
    bool single_prime_form = false;
};

std::pair<WindowConstruction, WindowIdentity> liouville_window(int64_t x, int64_t N,
                                                               SumMode mode = SumMode::exact);

struct WindowSweepResult {
    int64_t pairs_checked = 0;
    std::vector<std::pair<int64_t, int64_t>> failures; // (x, N) with lhs != rhs
    int64_t single_prime_pairs = 0; // pairs in the clean regime x >= (N+1)^2
    int64_t direct_checked = 0;     // pairs re-verified by term-by-term summation
    std::vector<std::pair<int64_t, int64_t>> direct_failures;
};

// exact identity check over all N <= n_max, N^2 < x <= x_max
WindowSweepResult window_identity_sweep(int64_t n_max, int64_t x_max);

struct MeanDecomposition {
    Rat S;            // sum_{n<=x} f(n)/n
    Rat G;            // (1/x) sum_{n<=x} g(n)
    Rat M;            // (1/x) sum_{n<=x} f(n)
    double residual;  // S - G - (1-gamma) M
    bool floor_identity_ok; // sum g(n) = x S - sum_d f(d){x/d}, exact
};

MeanDecomposition divisor_mean_decomposition(const PrimeAssignment& f, int64_t x);

// f*(2^k) = -1; f*(p^k) = +1 for odd p <= y = x^(1/(1+sqrt(e)));
// f*(p^k) = (-1)^k for p > y
struct ExtremalConstruction {
    int64_t x = 2;
    double y = 0;
    MultSpec spec;
    ExactSum value;
};

ExtremalConstruction extremal_multiplicative(int64_t x, SumMode mode = SumMode::exact);

// float value by segmented sieve, without materializing the function table
ExactSum extremal_multiplicative_value(int64_t x, int threads = 1);

struct WitnessCheck {
    int64_t n;
    int jacobi_value;
    int expected;
};

struct CharacterWitness {
    int64_t q = 0;
    int64_t x = 0;
    int64_t candidates_tested = 0;
    std::vector<WitnessCheck> checks;
};

// Least prime q > x in the residue classes fixing (2/q) = pattern(2), with
// (r/q) = pattern(r) for every odd prime r <= x; the returned witness is
// re-verified by direct Jacobi evaluation at every n <= x.
CharacterWitness realize_as_character(const PrimeAssignment& pattern, int64_t x,
                                      int64_t max_candidates);

std::string witness_to_json(const CharacterWitness& w);

} // namespace trunclab
