#pragma once
#include <gmpxx.h>

#include <cstdint>
#include <string>

#include "trunclab/errors.hpp"

namespace trunclab {

using Rat = mpq_class;
using Int = mpz_class;

inline Rat make_rat(int64_t num, int64_t den) {
    if (den == 0) throw ValidationError("rational with zero denominator");
    Rat r(static_cast<long>(num), static_cast<long>(den));
    r.canonicalize();
    return r;
}

// Accepts "p", "-p", "p/q"; canonical form enforced on return.
inline Rat parse_rat(const std::string& s) {
    if (s.empty()) throw ValidationError("empty rational literal");
    Rat r;
    if (r.set_str(s, 10) != 0)
        throw ValidationError("not a rational literal: '" + s + "'");
    if (r.get_den() == 0) throw ValidationError("zero denominator in '" + s + "'");
    r.canonicalize();
    return r;
}

inline std::string rat_str(const Rat& r) { return r.get_str(); }

inline Rat rat_pow(const Rat& base, uint64_t k) {
    Rat out;
    mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), k);
    mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), k);
    return out; // canonical base stays canonical under powering
}

inline int rat_sign(const Rat& r) { return sgn(r); }

inline bool rat_abs_le_one(const Rat& r) {
    return mpz_cmpabs(r.get_num_mpz_t(), r.get_den_mpz_t()) <= 0;
}

// Exact running sum of sign(n)/n for n = 1, 2, 3, ... kept as an unreduced
// fraction over lcm(1..n), so each step costs linear big-integer work only.
class ExactSignedHarmonic {
public:
    ExactSignedHarmonic() = default;

    int64_t upto() const { return n_; }
    const Int& num() const { return num_; }
    const Int& den() const { return den_; }

    // appends the term sign/(n+1); sign in {-1, +1}
    void add_next(int sign) {
        const int64_t n = n_ + 1;
        int64_t base = prime_power_base(n);
        if (base != 0) {
            num_ *= base;
            den_ *= base;
        }
        Int q;
        mpz_divexact(q.get_mpz_t(), den_.get_mpz_t(), Int(static_cast<long>(n)).get_mpz_t());
        if (sign > 0) num_ += q; else num_ -= q;
        n_ = n;
    }

    Rat value() const {
        Rat r(num_, den_);
        r.canonicalize();
        return r;
    }

    // |value - d| <= bound, decided exactly
    bool within(double d, double bound) const;

private:
    // returns p if n = p^k, else 0
    static int64_t prime_power_base(int64_t n) {
        for (int64_t p = 2; p * p <= n; ++p) {
            if (n % p) continue;
            int64_t m = n;
            while (m % p == 0) m /= p;
            return m == 1 ? p : 0;
        }
        return n; // n is prime (or 1, handled by caller starting at n=1)
    }

    int64_t n_ = 1;
    Int num_{1};
    Int den_{1};
};

// Unreduced big fraction num/den; exact arithmetic without per-step gcds.
// Used by the harmonic-scale accumulators where den = lcm(1..x).
struct BigFraction {
    Int num{0};
    Int den{1};

    Rat to_rat() const {
        Rat r(num, den);
        r.canonicalize();
        return r;
    }
    double to_double() const { return to_rat().get_d(); }

    // |*this - d| <= bound, all exact.
    bool within(double d, double bound) const {
        Rat fd(d);      // exact binary value of d
        Rat b(bound);   // exact binary value of bound
        Int lhs_num = num * fd.get_den() - fd.get_num() * den;
        Int rhs = b.get_num() * den * fd.get_den() / b.get_den();
        if (rhs < 0) rhs = -rhs;
        return mpz_cmpabs(lhs_num.get_mpz_t(), rhs.get_mpz_t()) <= 0;
    }
};

inline bool ExactSignedHarmonic::within(double d, double bound) const {
    BigFraction f;
    f.num = num_;
    f.den = den_;
    return f.within(d, bound);
}

} // namespace trunclab
