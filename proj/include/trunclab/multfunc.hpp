#pragma once
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "trunclab/primes.hpp"
#include "trunclab/rational.hpp"

namespace trunclab {

enum class FuncClass { F, F0, F1 };

const char* func_class_name(FuncClass c);
FuncClass func_class_from_name(const std::string& s);

// Completely multiplicative function given by its rational values on the
// primes <= x_max. Class F: values in [-1,1]; F0: {-1,0,1}; F1: {-1,1}.
struct PrimeAssignment {
    int64_t x_max = 1;
    FuncClass cls = FuncClass::F;
    std::vector<int64_t> primes; // ascending, exactly the primes <= x_max
    std::vector<Rat> values;     // aligned with primes

    int index_of(int64_t p) const;
    const Rat& at(int64_t p) const;
};

PrimeAssignment make_assignment(int64_t x_max, FuncClass cls,
                                const std::vector<std::pair<int64_t, Rat>>& prime_values);
PrimeAssignment constant_assignment(int64_t x_max, FuncClass cls, const Rat& v);
PrimeAssignment lambda_pattern(int64_t x_max); // all primes -> -1

// Multiplicative function given by its values on prime powers p^k <= x_max.
struct MultSpec {
    int64_t x_max = 1;
    std::vector<int64_t> primes;
    std::vector<std::vector<Rat>> powers; // powers[i][k-1] = f*(p_i^k)

    int index_of(int64_t p) const;
    // f*(p^k); the completely multiplicative continuation f(p)^(k-K) f*(p^K)
    // applies beyond the stored range
    Rat value_at(int64_t p, int k) const;
};

MultSpec make_multspec(int64_t x_max,
                       const std::vector<std::pair<int64_t, std::vector<Rat>>>& prime_powers);
MultSpec multspec_from_cm(const PrimeAssignment& f);

enum class SumMode { exact, floating };

// Exact rational value, or a float paired with a proven error enclosure.
struct ExactSum {
    bool exact = true;
    Rat value;
    double fvalue = 0.0;
    double error_bound = 0.0;

    static ExactSum from_rat(Rat v);
    static ExactSum from_float(double v, double err);
};

Rat eval_cm(const PrimeAssignment& f, int64_t n);

// S_f(x) = sum_{n<=x} f(n)/n
ExactSum truncated_sum(const PrimeAssignment& f, int64_t x, SumMode mode = SumMode::exact);
ExactSum truncated_sum(const MultSpec& fstar, int64_t x, SumMode mode = SumMode::exact);

// F(x) = (1/x) sum_{n<=x} f(n)
ExactSum mean_value(const PrimeAssignment& f, int64_t x, SumMode mode = SumMode::exact);
ExactSum mean_value(const MultSpec& fstar, int64_t x, SumMode mode = SumMode::exact);

// g(n) = sum_{d|n} f(d), n = 1..x (slot 0 unused); every entry is >= 0
std::vector<Rat> divisor_transform(const PrimeAssignment& f, int64_t x);

// h with f* = h * f (Dirichlet), h(p^k) = f*(p^k) - f(p) f*(p^(k-1)).
// h(p) = 0 always, so h is supported on 1 and square-full integers.
struct HSeries {
    int64_t truncation_bound = 0;
    std::vector<std::pair<int64_t, Rat>> h_values; // (p^k, h(p^k)) over stored powers
    Rat H0;                      // sum_{d<=bound} h(d)/d, exact
    double H0_tail_bound = 0.0;  // |sum_{d>bound} h(d)/d| <= this
    double H1 = 0.0;             // -sum_{d<=bound} h(d) log(d)/d
    double H1_tail_bound = 0.0;

    Rat h_at(int64_t prime_power) const; // 0 for powers outside the table
};

HSeries h_transform(const MultSpec& fstar, int64_t truncation_bound = 0);

struct ConvolutionReport {
    bool ok = true;
    int64_t worst_n = 0;
    Rat max_abs_deviation;
};

// checks f*(n) = sum_{d|n} h(d) f(n/d) exactly for every n <= x
ConvolutionReport convolution_check(const MultSpec& fstar, int64_t x);

std::string assignment_to_json(const PrimeAssignment& f);
PrimeAssignment assignment_from_json(const std::string& text);
std::string multspec_to_json(const MultSpec& spec);
MultSpec multspec_from_json(const std::string& text);

// Enumerates (n, f(n)) for n <= x by recursive generation over prime powers.
// Visits every n exactly once, in no particular order.
void enumerate_cm(const PrimeAssignment& f, int64_t x,
                  const std::function<void(int64_t, const Rat&)>& visit);
void enumerate_mult(const MultSpec& fstar, int64_t x,
                    const std::function<void(int64_t, const Rat&)>& visit);

// lcm(1..x)
Int lcm_upto(int64_t x);

} // namespace trunclab
