#include "trunclab/multfunc.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <json.hpp>

#include "trunclab/errors.hpp"
#include "trunclab/util.hpp"

namespace trunclab {

namespace {
constexpr double kUnitRound = 1.1102230246251565e-16; // 2^-53

void check_value_in_class(const Rat& v, FuncClass cls, int64_t p) {
    if (!rat_abs_le_one(v))
        throw ValidationError("value at prime " + std::to_string(p) + " outside [-1,1]");
    if (cls == FuncClass::F) return;
    const bool is_unit = v == 1 || v == -1;
    if (cls == FuncClass::F1 && !is_unit)
        throw ValidationError("class f1 requires +-1 at prime " + std::to_string(p));
    if (cls == FuncClass::F0 && !(is_unit || v == 0))
        throw ValidationError("class f0 requires -1, 0 or 1 at prime " + std::to_string(p));
}

// smallest-prime-factor table for 1..x
std::vector<int32_t> spf_table(int64_t x) {
    std::vector<int32_t> spf(static_cast<size_t>(x) + 1, 0);
    for (int64_t i = 2; i <= x; ++i) {
        if (spf[i]) continue;
        for (int64_t j = i; j <= x; j += i)
            if (!spf[j]) spf[j] = static_cast<int32_t>(i);
    }
    return spf;
}

} // namespace

const char* func_class_name(FuncClass c) {
    switch (c) {
        case FuncClass::F: return "f";
        case FuncClass::F0: return "f0";
        case FuncClass::F1: return "f1";
    }
    return "?";
}

FuncClass func_class_from_name(const std::string& s) {
    if (s == "f") return FuncClass::F;
    if (s == "f0") return FuncClass::F0;
    if (s == "f1") return FuncClass::F1;
    throw ValidationError("unknown function class '" + s + "' (expected f, f0 or f1)");
}

int PrimeAssignment::index_of(int64_t p) const {
    auto it = std::lower_bound(primes.begin(), primes.end(), p);
    if (it == primes.end() || *it != p) return -1;
    return static_cast<int>(it - primes.begin());
}

const Rat& PrimeAssignment::at(int64_t p) const {
    int i = index_of(p);
    if (i < 0)
        throw ValidationError("assignment has no value at prime " + std::to_string(p));
    return values[i];
}

PrimeAssignment make_assignment(int64_t x_max, FuncClass cls,
                                const std::vector<std::pair<int64_t, Rat>>& prime_values) {
    if (x_max < 1) throw ValidationError("x_max must be >= 1");
    PrimeAssignment f;
    f.x_max = x_max;
    f.cls = cls;
    f.primes = primes_up_to(x_max).primes;
    f.values.assign(f.primes.size(), Rat(0));
    std::vector<char> seen(f.primes.size(), 0);
    for (const auto& [p, v] : prime_values) {
        int i = f.index_of(p);
        if (i < 0)
            throw ValidationError("key " + std::to_string(p) + " is not a prime <= x_max");
        if (seen[i]) throw ValidationError("duplicate prime " + std::to_string(p));
        check_value_in_class(v, cls, p);
        f.values[i] = v;
        seen[i] = 1;
    }
    for (size_t i = 0; i < seen.size(); ++i)
        if (!seen[i])
            throw ValidationError("missing value at prime " + std::to_string(f.primes[i]));
    return f;
}

PrimeAssignment constant_assignment(int64_t x_max, FuncClass cls, const Rat& v) {
    PrimeAssignment f;
    f.x_max = x_max;
    f.cls = cls;
    f.primes = primes_up_to(x_max).primes;
    check_value_in_class(v, cls, 0);
    f.values.assign(f.primes.size(), v);
    return f;
}

PrimeAssignment lambda_pattern(int64_t x_max) {
    return constant_assignment(x_max, FuncClass::F1, Rat(-1));
}

int MultSpec::index_of(int64_t p) const {
    auto it = std::lower_bound(primes.begin(), primes.end(), p);
    if (it == primes.end() || *it != p) return -1;
    return static_cast<int>(it - primes.begin());
}

Rat MultSpec::value_at(int64_t p, int k) const {
    int i = index_of(p);
    if (i < 0) throw ValidationError("spec has no prime " + std::to_string(p));
    if (k < 0) throw ValidationError("negative power");
    if (k == 0) return Rat(1);
    const auto& pw = powers[i];
    if (k <= static_cast<int>(pw.size())) return pw[k - 1];
    // completely multiplicative continuation by f(p) beyond the stored range
    Rat tail = rat_pow(pw[0], static_cast<uint64_t>(k - pw.size()));
    return pw.back() * tail;
}

MultSpec make_multspec(int64_t x_max,
                       const std::vector<std::pair<int64_t, std::vector<Rat>>>& prime_powers) {
    if (x_max < 1) throw ValidationError("x_max must be >= 1");
    MultSpec spec;
    spec.x_max = x_max;
    spec.primes = primes_up_to(x_max).primes;
    spec.powers.resize(spec.primes.size());
    std::vector<char> seen(spec.primes.size(), 0);
    for (const auto& [p, vals] : prime_powers) {
        int i = spec.index_of(p);
        if (i < 0)
            throw ValidationError("key " + std::to_string(p) + " is not a prime <= x_max");
        if (seen[i]) throw ValidationError("duplicate prime " + std::to_string(p));
        size_t want = 0;
        for (int64_t q = p; q <= x_max; q *= p) {
            ++want;
            if (q > x_max / p) break;
        }
        if (vals.size() != want)
            throw ValidationError("prime " + std::to_string(p) + " needs exactly " +
                                  std::to_string(want) + " power values");
        for (const Rat& v : vals)
            if (!rat_abs_le_one(v))
                throw ValidationError("power value outside [-1,1] at prime " + std::to_string(p));
        spec.powers[i] = vals;
        seen[i] = 1;
    }
    for (size_t i = 0; i < seen.size(); ++i)
        if (!seen[i])
            throw ValidationError("missing powers at prime " + std::to_string(spec.primes[i]));
    return spec;
}

MultSpec multspec_from_cm(const PrimeAssignment& f) {
    std::vector<std::pair<int64_t, std::vector<Rat>>> pv;
    pv.reserve(f.primes.size());
    for (size_t i = 0; i < f.primes.size(); ++i) {
        const int64_t p = f.primes[i];
        std::vector<Rat> vals;
        Rat v = f.values[i];
        for (int64_t q = p; q <= f.x_max; q *= p) {
            vals.push_back(v);
            if (q > f.x_max / p) break;
            v *= f.values[i];
        }
        pv.emplace_back(p, std::move(vals));
    }
    return make_multspec(f.x_max, pv);
}

ExactSum ExactSum::from_rat(Rat v) {
    ExactSum s;
    s.exact = true;
    s.fvalue = v.get_d();
    s.value = std::move(v);
    s.error_bound = 0.0;
    return s;
}

ExactSum ExactSum::from_float(double v, double err) {
    ExactSum s;
    s.exact = false;
    s.fvalue = v;
    s.error_bound = err;
    return s;
}

Rat eval_cm(const PrimeAssignment& f, int64_t n) {
    if (n < 1 || n > f.x_max)
        throw ValidationError("eval_cm: n outside [1, x_max]");
    Rat out(1);
    int64_t m = n;
    for (size_t i = 0; i < f.primes.size() && m > 1; ++i) {
        const int64_t p = f.primes[i];
        if (p * p > m) break;
        int k = 0;
        while (m % p == 0) { m /= p; ++k; }
        if (k) out *= rat_pow(f.values[i], static_cast<uint64_t>(k));
    }
    if (m > 1) out *= f.at(m); // leftover prime
    return out;
}

void enumerate_cm(const PrimeAssignment& f, int64_t x,
                  const std::function<void(int64_t, const Rat&)>& visit) {
    Rat one(1);
    visit(1, one);
    // recursive generation: extend by powers of primes above index i
    std::function<void(size_t, int64_t, const Rat&)> rec = [&](size_t i, int64_t n,
                                                               const Rat& val) {
        for (size_t j = i; j < f.primes.size() && f.primes[j] <= x / n; ++j) {
            int64_t m = n * f.primes[j];
            Rat v = val * f.values[j];
            while (true) {
                visit(m, v);
                rec(j + 1, m, v);
                if (m > x / f.primes[j]) break;
                m *= f.primes[j];
                v *= f.values[j];
            }
        }
    };
    rec(0, 1, one);
}

void enumerate_mult(const MultSpec& fstar, int64_t x,
                    const std::function<void(int64_t, const Rat&)>& visit) {
    Rat one(1);
    visit(1, one);
    std::function<void(size_t, int64_t, const Rat&)> rec = [&](size_t i, int64_t n,
                                                               const Rat& val) {
        for (size_t j = i; j < fstar.primes.size() && fstar.primes[j] <= x / n; ++j) {
            const int64_t p = fstar.primes[j];
            int64_t m = n * p;
            int k = 1;
            while (true) {
                Rat v = val * fstar.powers[j][k - 1];
                visit(m, v);
                rec(j + 1, m, v);
                if (m > x / p) break;
                m *= p;
                ++k;
            }
        }
    };
    rec(0, 1, one);
}

Int lcm_upto(int64_t x) {
    Int d(1);
    for (int64_t p : primes_up_to(x).primes) {
        int64_t q = p;
        while (q <= x / p) q *= p;
        d *= q;
    }
    return d;
}

namespace {

// true when every value is -1, 0 or +1 (denominator 1, |num| <= 1)
bool all_unit_values(const std::vector<Rat>& vals) {
    for (const Rat& v : vals)
        if (!(v == 0 || v == 1 || v == -1)) return false;
    return true;
}

// sign-valued completely multiplicative enumeration; visit(n, sign)
template <typename Visit>
void enumerate_signs(const std::vector<int64_t>& primes, const std::vector<int>& sgn, int64_t x,
                     Visit&& visit) {
    visit(int64_t(1), 1);
    std::function<void(size_t, int64_t, int)> rec = [&](size_t i, int64_t n, int s) {
        for (size_t j = i; j < primes.size() && primes[j] <= x / n; ++j) {
            if (sgn[j] == 0) continue; // whole subtree vanishes
            int64_t m = n * primes[j];
            int v = s * sgn[j];
            while (true) {
                visit(m, v);
                rec(j + 1, m, v);
                if (m > x / primes[j]) break;
                m *= primes[j];
                v *= sgn[j];
            }
        }
    };
    rec(0, 1, 1);
}

struct FloatSumResult {
    double value;
    double err;
};

// kahan-accumulated sum of val(n)/n with a proven enclosure
template <typename Enumerate>
FloatSumResult float_weighted_sum(int64_t x, bool over_n, Enumerate&& enumerate) {
    Kahan acc, mag;
    enumerate([&](int64_t n, double v) {
        const double term = over_n ? v / static_cast<double>(n) : v;
        acc.add(term);
        mag.add(std::abs(term));
    });
    const double err = (std::log2(static_cast<double>(x) + 1) + 6.0) * kUnitRound * mag.value;
    return {acc.value, err};
}

} // namespace

ExactSum truncated_sum(const PrimeAssignment& f, int64_t x, SumMode mode) {
    if (x < 1 || x > f.x_max) throw ValidationError("truncated_sum: x outside [1, x_max]");
    if (mode == SumMode::floating) {
        std::vector<double> dv(f.values.size());
        for (size_t i = 0; i < f.values.size(); ++i) dv[i] = f.values[i].get_d();
        auto res = float_weighted_sum(x, true, [&](auto&& take) {
            take(1, 1.0);
            std::function<void(size_t, int64_t, double)> rec = [&](size_t i, int64_t n, double val) {
                for (size_t j = i; j < f.primes.size() && f.primes[j] <= x / n; ++j) {
                    int64_t m = n * f.primes[j];
                    double v = val * dv[j];
                    while (true) {
                        take(m, v);
                        rec(j + 1, m, v);
                        if (m > x / f.primes[j]) break;
                        m *= f.primes[j];
                        v *= dv[j];
                    }
                }
            };
            rec(0, 1, 1.0);
        });
        return ExactSum::from_float(res.value, res.err);
    }
    if (all_unit_values(f.values) && x >= 512) {
        // common-denominator path: acc/D with D = lcm(1..x)
        Int D = lcm_upto(x);
        Int acc(0), q;
        std::vector<int> sgn(f.values.size());
        for (size_t i = 0; i < f.values.size(); ++i) sgn[i] = static_cast<int>(f.values[i].get_d());
        enumerate_signs(f.primes, sgn, x, [&](int64_t n, int s) {
            mpz_divexact_ui(q.get_mpz_t(), D.get_mpz_t(), static_cast<unsigned long>(n));
            if (s > 0) acc += q; else acc -= q;
        });
        Rat r(acc, D);
        r.canonicalize();
        return ExactSum::from_rat(std::move(r));
    }
    Rat total(0);
    enumerate_cm(f, x, [&](int64_t n, const Rat& v) {
        Rat t = v / Rat(static_cast<long>(n));
        total += t;
    });
    return ExactSum::from_rat(std::move(total));
}

ExactSum truncated_sum(const MultSpec& fstar, int64_t x, SumMode mode) {
    if (x < 1 || x > fstar.x_max) throw ValidationError("truncated_sum: x outside [1, x_max]");
    if (mode == SumMode::floating) {
        std::vector<std::vector<double>> dv(fstar.powers.size());
        for (size_t i = 0; i < fstar.powers.size(); ++i)
            for (const Rat& r : fstar.powers[i]) dv[i].push_back(r.get_d());
        auto res = float_weighted_sum(x, true, [&](auto&& take) {
            take(1, 1.0);
            std::function<void(size_t, int64_t, double)> rec = [&](size_t i, int64_t n, double val) {
                for (size_t j = i; j < fstar.primes.size() && fstar.primes[j] <= x / n; ++j) {
                    const int64_t p = fstar.primes[j];
                    int64_t m = n * p;
                    int k = 1;
                    while (true) {
                        double v = val * dv[j][k - 1];
                        take(m, v);
                        rec(j + 1, m, v);
                        if (m > x / p) break;
                        m *= p;
                        ++k;
                    }
                }
            };
            rec(0, 1, 1.0);
        });
        return ExactSum::from_float(res.value, res.err);
    }
    bool units = true;
    for (const auto& pw : fstar.powers)
        if (!all_unit_values(pw)) { units = false; break; }
    if (units && x >= 512) {
        Int D = lcm_upto(x);
        Int acc(0), q;
        std::function<void(size_t, int64_t, int)> rec;
        auto take = [&](int64_t n, int s) {
            if (s == 0) return;
            mpz_divexact_ui(q.get_mpz_t(), D.get_mpz_t(), static_cast<unsigned long>(n));
            if (s > 0) acc += q; else acc -= q;
        };
        take(1, 1);
        rec = [&](size_t i, int64_t n, int s) {
            for (size_t j = i; j < fstar.primes.size() && fstar.primes[j] <= x / n; ++j) {
                const int64_t p = fstar.primes[j];
                int64_t m = n * p;
                int k = 1;
                while (true) {
                    // a zero value kills the whole subtree below m, but higher
                    // powers of p may still be nonzero
                    int v = s * static_cast<int>(fstar.powers[j][k - 1].get_d());
                    take(m, v);
                    if (v != 0) rec(j + 1, m, v);
                    if (m > x / p) break;
                    m *= p;
                    ++k;
                }
            }
        };
        rec(0, 1, 1);
        Rat r(acc, D);
        r.canonicalize();
        return ExactSum::from_rat(std::move(r));
    }
    Rat total(0);
    enumerate_mult(fstar, x, [&](int64_t n, const Rat& v) {
        Rat t = v / Rat(static_cast<long>(n));
        total += t;
    });
    return ExactSum::from_rat(std::move(total));
}

ExactSum mean_value(const PrimeAssignment& f, int64_t x, SumMode mode) {
    if (x < 1 || x > f.x_max) throw ValidationError("mean_value: x outside [1, x_max]");
    if (mode == SumMode::floating) {
        std::vector<double> dv(f.values.size());
        for (size_t i = 0; i < f.values.size(); ++i) dv[i] = f.values[i].get_d();
        auto res = float_weighted_sum(x, false, [&](auto&& take) {
            take(1, 1.0);
            std::function<void(size_t, int64_t, double)> rec = [&](size_t i, int64_t n, double val) {
                for (size_t j = i; j < f.primes.size() && f.primes[j] <= x / n; ++j) {
                    int64_t m = n * f.primes[j];
                    double v = val * dv[j];
                    while (true) {
                        take(m, v);
                        rec(j + 1, m, v);
                        if (m > x / f.primes[j]) break;
                        m *= f.primes[j];
                        v *= dv[j];
                    }
                }
            };
            rec(0, 1, 1.0);
        });
        return ExactSum::from_float(res.value / static_cast<double>(x),
                                    res.err / static_cast<double>(x));
    }
    Rat total(0);
    enumerate_cm(f, x, [&](int64_t, const Rat& v) { total += v; });
    total /= Rat(static_cast<long>(x));
    return ExactSum::from_rat(std::move(total));
}

ExactSum mean_value(const MultSpec& fstar, int64_t x, SumMode mode) {
    if (x < 1 || x > fstar.x_max) throw ValidationError("mean_value: x outside [1, x_max]");
    if (mode == SumMode::floating) {
        std::vector<std::vector<double>> dv(fstar.powers.size());
        for (size_t i = 0; i < fstar.powers.size(); ++i)
            for (const Rat& r : fstar.powers[i]) dv[i].push_back(r.get_d());
        auto res = float_weighted_sum(x, false, [&](auto&& take) {
            take(1, 1.0);
            std::function<void(size_t, int64_t, double)> rec = [&](size_t i, int64_t n, double val) {
                for (size_t j = i; j < fstar.primes.size() && fstar.primes[j] <= x / n; ++j) {
                    const int64_t p = fstar.primes[j];
                    int64_t m = n * p;
                    int k = 1;
                    while (true) {
                        double v = val * dv[j][k - 1];
                        take(m, v);
                        rec(j + 1, m, v);
                        if (m > x / p) break;
                        m *= p;
                        ++k;
                    }
                }
            };
            rec(0, 1, 1.0);
        });
        return ExactSum::from_float(res.value / static_cast<double>(x),
                                    res.err / static_cast<double>(x));
    }
    Rat total(0);
    enumerate_mult(fstar, x, [&](int64_t, const Rat& v) { total += v; });
    total /= Rat(static_cast<long>(x));
    return ExactSum::from_rat(std::move(total));
}

std::vector<Rat> divisor_transform(const PrimeAssignment& f, int64_t x) {
    if (x < 1 || x > f.x_max) throw ValidationError("divisor_transform: x outside [1, x_max]");
    auto spf = spf_table(x);
    std::vector<Rat> g(static_cast<size_t>(x) + 1, Rat(0));
    g[1] = 1;
    // g(p^k) = 1 + f(p) + ... + f(p)^k, assembled per prime power
    std::unordered_map<int64_t, Rat> gpp;
    for (size_t i = 0; i < f.primes.size() && f.primes[i] <= x; ++i) {
        const int64_t p = f.primes[i];
        Rat s(1), fp(1);
        for (int64_t q = p; q <= x; q *= p) {
            fp *= f.values[i];
            s += fp;
            gpp.emplace(q, s);
            if (q > x / p) break;
        }
    }
    for (int64_t n = 2; n <= x; ++n) {
        const int64_t p = spf[n];
        int64_t q = p, m = n / p;
        while (m % p == 0) { q *= p; m /= p; }
        g[n] = g[m] * gpp[q];
    }
    return g;
}

Rat HSeries::h_at(int64_t prime_power) const {
    auto it = std::lower_bound(h_values.begin(), h_values.end(), prime_power,
                               [](const auto& a, int64_t b) { return a.first < b; });
    if (it == h_values.end() || it->first != prime_power) return Rat(0);
    return it->second;
}

HSeries h_transform(const MultSpec& fstar, int64_t truncation_bound) {
    HSeries out;
    out.truncation_bound =
        truncation_bound > 0 ? truncation_bound : std::max<int64_t>(fstar.x_max, 1'000'000);
    const int64_t trunc = out.truncation_bound;

    // h over the stored prime powers
    for (size_t i = 0; i < fstar.primes.size(); ++i) {
        const int64_t p = fstar.primes[i];
        const auto& pw = fstar.powers[i];
        const Rat& fp = pw[0];
        int64_t q = p;
        for (size_t k = 1; k <= pw.size(); ++k) {
            Rat prev = (k == 1) ? Rat(1) : pw[k - 2];
            out.h_values.emplace_back(q, pw[k - 1] - fp * prev);
            if (k < pw.size()) q *= p;
        }
    }
    std::sort(out.h_values.begin(), out.h_values.end());

    // per-prime list of (p^k, h) with k >= 2 and h != 0, for the support walk
    std::vector<std::vector<std::pair<int64_t, Rat>>> sq(fstar.primes.size());
    for (size_t i = 0; i < fstar.primes.size(); ++i) {
        const int64_t p = fstar.primes[i];
        if (p > trunc / p) continue;
        int64_t q = p * p;
        for (size_t k = 2; k <= fstar.powers[i].size() && q <= trunc; ++k) {
            Rat h = out.h_at(q);
            if (h != 0) sq[i].emplace_back(q, h);
            if (q > trunc / p) break;
            q *= p;
        }
    }

    Rat H0(1);
    Kahan h1;
    std::function<void(size_t, int64_t, const Rat&)> rec = [&](size_t i, int64_t d,
                                                               const Rat& hd) {
        for (size_t j = i; j < sq.size(); ++j) {
            const int64_t p = fstar.primes[j];
            if (p > trunc / d / p) break; // even p^2 no longer fits
            if (sq[j].empty()) continue;
            for (const auto& [q, hq] : sq[j]) {
                if (q > trunc / d) break;
                const int64_t nd = d * q;
                Rat nh = hd * hq;
                Rat term = nh / Rat(static_cast<long>(nd));
                H0 += term;
                h1.add(-term.get_d() * std::log(static_cast<double>(nd)));
                rec(j + 1, nd, nh);
            }
        }
    };
    rec(0, 1, Rat(1));
    out.H0 = H0;
    out.H1 = h1.value;

    // geometric tail: sum_{d>D}|h(d)|/d <= C * D^(-1/3) with
    // C = prod_p (1 + sum_{k>=2} 2 p^(-2k/3)), since |h(p^k)| <= 2.
    static const double kTwoThirdsConstant = [] {
        double log_c = 0.0;
        for (int64_t p : primes_up_to(100000).primes) {
            const double a = std::pow(static_cast<double>(p), -2.0 / 3.0);
            log_c += std::log1p(2.0 * a * a / (1.0 - a));
        }
        log_c += 2.001 * 3.0 * std::pow(1e5, -1.0 / 3.0); // primes beyond the table
        return std::exp(log_c);
    }();
    const double d13 = std::cbrt(static_cast<double>(trunc));
    out.H0_tail_bound = kTwoThirdsConstant / d13 * 1.0000001;
    // log d <= (12/e) d^(1/12), so the log-weighted tail loses another d^(1/6)
    const double logw = std::max(12.0 / std::exp(1.0),
                                 std::log(static_cast<double>(trunc)) /
                                     std::pow(static_cast<double>(trunc), 1.0 / 12.0));
    out.H1_tail_bound = kTwoThirdsConstant * logw * std::pow(static_cast<double>(trunc), -0.25) *
                        1.0000001;
    return out;
}

ConvolutionReport convolution_check(const MultSpec& fstar, int64_t x) {
    if (x < 1 || x > fstar.x_max) throw ValidationError("convolution_check: x outside [1, x_max]");
    auto spf = spf_table(x);

    // f(n): completely multiplicative part, f(p) = f*(p)
    std::vector<Rat> fv(static_cast<size_t>(x) + 1, Rat(0));
    fv[1] = 1;
    for (int64_t n = 2; n <= x; ++n) {
        int i = fstar.index_of(spf[n]);
        fv[n] = fv[n / spf[n]] * fstar.powers[i][0];
    }
    // f*(n)
    std::vector<Rat> fs(static_cast<size_t>(x) + 1, Rat(0));
    fs[1] = 1;
    for (int64_t n = 2; n <= x; ++n) {
        const int64_t p = spf[n];
        int64_t q = p, m = n / p;
        int k = 1;
        while (m % p == 0) { q *= p; m /= p; ++k; }
        fs[n] = fs[m] * fstar.value_at(p, k);
    }

    // accumulate sum_{d|n} h(d) f(n/d); h lives on 1 and square-full d
    HSeries hs = h_transform(fstar, x);
    std::vector<std::pair<int64_t, Rat>> support; // d > 1 with h(d) != 0, d <= x
    {
        std::vector<std::vector<std::pair<int64_t, Rat>>> sq(fstar.primes.size());
        for (size_t i = 0; i < fstar.primes.size(); ++i) {
            const int64_t p = fstar.primes[i];
            if (p > x / p) continue;
            int64_t q = p * p;
            for (size_t k = 2; k <= fstar.powers[i].size() && q <= x; ++k) {
                Rat h = hs.h_at(q);
                if (h != 0) sq[i].emplace_back(q, h);
                if (q > x / p) break;
                q *= p;
            }
        }
        std::function<void(size_t, int64_t, const Rat&)> rec = [&](size_t i, int64_t d,
                                                                   const Rat& hd) {
            for (size_t j = i; j < sq.size(); ++j) {
                const int64_t p = fstar.primes[j];
                if (p > x / d / p) break;
                if (sq[j].empty()) continue;
                for (const auto& [q, hq] : sq[j]) {
                    if (q > x / d) break;
                    Rat nh = hd * hq;
                    support.emplace_back(d * q, nh);
                    rec(j + 1, d * q, nh);
                }
            }
        };
        rec(0, 1, Rat(1));
    }

    std::vector<Rat> acc = fv; // d = 1 term
    for (const auto& [d, hd] : support)
        for (int64_t m = 1; m <= x / d; ++m) acc[d * m] += hd * fv[m];

    ConvolutionReport rep;
    rep.max_abs_deviation = 0;
    for (int64_t n = 1; n <= x; ++n) {
        Rat dev = acc[n] - fs[n];
        if (dev < 0) dev = -dev;
        if (dev > rep.max_abs_deviation) {
            rep.max_abs_deviation = dev;
            rep.worst_n = n;
        }
    }
    rep.ok = rep.max_abs_deviation == 0;
    return rep;
}

std::string assignment_to_json(const PrimeAssignment& f) {
    nlohmann::ordered_json j;
    j["x_max"] = f.x_max;
    j["class"] = func_class_name(f.cls);
    nlohmann::ordered_json primes = nlohmann::ordered_json::object();
    for (size_t i = 0; i < f.primes.size(); ++i)
        primes[std::to_string(f.primes[i])] = rat_str(f.values[i]);
    j["primes"] = std::move(primes);
    return j.dump(2);
}

PrimeAssignment assignment_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("assignment is not valid JSON: ") + e.what());
    }
    try {
        int64_t x_max = j.at("x_max").get<int64_t>();
        FuncClass cls = func_class_from_name(j.at("class").get<std::string>());
        std::vector<std::pair<int64_t, Rat>> vals;
        for (const auto& [key, val] : j.at("primes").items())
            vals.emplace_back(std::stoll(key), parse_rat(val.get<std::string>()));
        return make_assignment(x_max, cls, vals);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("assignment missing or malformed field: ") + e.what());
    }
}

std::string multspec_to_json(const MultSpec& spec) {
    nlohmann::ordered_json j;
    j["x_max"] = spec.x_max;
    nlohmann::ordered_json pp = nlohmann::ordered_json::object();
    for (size_t i = 0; i < spec.primes.size(); ++i) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const Rat& v : spec.powers[i]) arr.push_back(rat_str(v));
        pp[std::to_string(spec.primes[i])] = std::move(arr);
    }
    j["prime_powers"] = std::move(pp);
    return j.dump(2);
}

MultSpec multspec_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("spec is not valid JSON: ") + e.what());
    }
    try {
        int64_t x_max = j.at("x_max").get<int64_t>();
        std::vector<std::pair<int64_t, std::vector<Rat>>> pv;
        for (const auto& [key, val] : j.at("prime_powers").items()) {
            std::vector<Rat> vals;
            for (const auto& s : val) vals.push_back(parse_rat(s.get<std::string>()));
            pv.emplace_back(std::stoll(key), std::move(vals));
        }
        return make_multspec(x_max, pv);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("spec missing or malformed field: ") + e.what());
    }
}

} // namespace trunclab
