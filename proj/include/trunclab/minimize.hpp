#pragma once
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "trunclab/multfunc.hpp"

namespace trunclab {

enum class MinMethod { brute, bnb, descent };
enum class Certificate { global, local };

const char* min_method_name(MinMethod m);
const char* certificate_name(Certificate c);

struct BnBConfig {
    int64_t node_budget = 200'000'000;
    int parallel_width = 1;
};

struct MinResult {
    int64_t x = 1;
    FuncClass cls = FuncClass::F1;
    ExactSum value;
    PrimeAssignment minimizer;
    MinMethod method = MinMethod::brute;
    Certificate certificate = Certificate::global;
    int64_t nodes_visited = 0;
};

// exact global minimum of sum_{n<=x} f(n)/n over {-1,+1} assignments;
// ties broken toward the lexicographically least assignment (-1 < +1,
// primes ascending)
MinResult delta1_brute(int64_t x);

// same over {-1,0,+1} assignments (-1 < 0 < +1 in ties)
MinResult delta0_brute(int64_t x);

// exact global minimum over F1: branches on primes <= sqrt(x) only, large
// primes settled by the linear reduction, pruning by the harmonic mass of
// untouched integers
MinResult delta1_bnb(int64_t x, const BnBConfig& cfg = {});

// For p > sqrt(x) every n <= x divisible by p is p*m with m <= x/p < p, so
// p contributes (f(p)/p) * S(x/p); the optimal completion takes
// f(p) = -sign S(floor(x/p)), ties -> -1.
std::vector<std::pair<int64_t, Rat>> large_prime_reduction(const PrimeAssignment& partial,
                                                           int64_t x);

// box-constrained coordinate descent over f(p) in [-1,1]; multistart with
// `starts` random starts plus the all-(-1) start; certificate is local.
// When the final point lies at a +-1 vertex the value is reported exactly.
MinResult delta_descent(int64_t x, int starts, uint64_t seed);

struct VertexReport {
    MinResult descent;
    MinResult bnb;
    bool descent_at_vertex = false;
    bool values_equal = false; // exact comparison when the vertex snap fired
    double value_gap = 0.0;    // descent minus bnb, as floats
};

VertexReport vertex_report(int64_t x, int starts = 8, uint64_t seed = 1,
                           const BnBConfig& cfg = {});

std::string min_result_to_json(const MinResult& r);

} // namespace trunclab
