#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "trunclab/multfunc.hpp"

namespace trunclab {

struct RoundingStep {
    int j = 0;             // 1-based prime index, k down to 1
    int64_t p = 0;         // the prime rounded at this step
    Rat S_x;               // full truncated sum before the change
    Rat S_prime;           // sum over m <= x/p coprime to p, before the change
    Rat old_value;
    int new_sign = 0;      // -1 if S_prime > 0, else +1
};

struct RoundingTrace {
    int64_t x = 1;
    std::vector<RoundingStep> steps; // ordered j = k down to 1
    Rat initial_sum;
    Rat final_sum;
};

// S'(y) = sum_{m <= y, p does not divide m} f(m)/m, exact
Rat s_prime(const PrimeAssignment& f, int64_t p, int64_t y);

// Rounds f into the +-1 class one prime at a time, largest prime first,
// choosing -1 when the coprime tail sum is positive and +1 otherwise.
std::pair<PrimeAssignment, RoundingTrace> round_to_pm1(const PrimeAssignment& f, int64_t x);

std::string trace_to_json(const RoundingTrace& t);

} // namespace trunclab
