#include "trunclab/rounding.hpp"

#include <json.hpp>

#include "trunclab/errors.hpp"

namespace trunclab {

Rat s_prime(const PrimeAssignment& f, int64_t p, int64_t y) {
    if (y < 1 || y > f.x_max) throw ValidationError("s_prime: y outside [1, x_max]");
    Rat total(0);
    enumerate_cm(f, y, [&](int64_t n, const Rat& v) {
        if (n % p == 0) return;
        total += v / Rat(static_cast<long>(n));
    });
    return total;
}

std::pair<PrimeAssignment, RoundingTrace> round_to_pm1(const PrimeAssignment& f, int64_t x) {
    if (x < 1 || x > f.x_max) throw ValidationError("round_to_pm1: x outside [1, x_max]");
    const auto primes = primes_up_to(x).primes;
    const int k = static_cast<int>(primes.size());

    // f(m) table for m <= x, updated as prime values change
    std::vector<Rat> fv(static_cast<size_t>(x) + 1, Rat(0));
    fv[1] = 1;
    std::vector<Rat> cur(primes.size());
    for (size_t i = 0; i < primes.size(); ++i) cur[i] = f.at(primes[i]);
    auto refresh_multiples = [&](size_t pi) {
        const int64_t p = primes[pi];
        for (int64_t m = p; m <= x; m += p) {
            int64_t r = m;
            int e = 0;
            while (r % p == 0) { r /= p; ++e; }
            fv[m] = rat_pow(cur[pi], static_cast<uint64_t>(e)) * fv[r];
        }
    };
    {
        // initial table via the enumeration (faster than per-prime refresh)
        enumerate_cm(f, x, [&](int64_t n, const Rat& v) { fv[n] = v; });
    }

    auto full_sum = [&]() {
        Rat s(0);
        for (int64_t n = 1; n <= x; ++n) s += fv[n] / Rat(static_cast<long>(n));
        return s;
    };
    auto coprime_sum = [&](int64_t p, int64_t y) {
        Rat s(0);
        for (int64_t n = 1; n <= y; ++n)
            if (n % p != 0) s += fv[n] / Rat(static_cast<long>(n));
        return s;
    };

    RoundingTrace trace;
    trace.x = x;
    trace.initial_sum = full_sum();

    for (int j = k; j >= 1; --j) {
        const size_t pi = static_cast<size_t>(j - 1);
        const int64_t p = primes[pi];
        RoundingStep step;
        step.j = j;
        step.p = p;
        step.S_x = full_sum();
        step.S_prime = coprime_sum(p, x / p);
        step.old_value = cur[pi];
        step.new_sign = rat_sign(step.S_prime) > 0 ? -1 : +1;
        trace.steps.push_back(step);
        if (cur[pi] != step.new_sign) {
            cur[pi] = Rat(static_cast<long>(step.new_sign));
            refresh_multiples(pi);
        }
    }
    trace.final_sum = full_sum();

    std::vector<std::pair<int64_t, Rat>> vals;
    for (size_t i = 0; i < primes.size(); ++i) vals.emplace_back(primes[i], cur[i]);
    PrimeAssignment rounded = make_assignment(x, FuncClass::F1, vals);
    return {std::move(rounded), std::move(trace)};
}

std::string trace_to_json(const RoundingTrace& t) {
    nlohmann::ordered_json j;
    j["x"] = t.x;
    j["initial_sum"] = rat_str(t.initial_sum);
    j["final_sum"] = rat_str(t.final_sum);
    nlohmann::ordered_json steps = nlohmann::ordered_json::array();
    for (const auto& s : t.steps) {
        nlohmann::ordered_json row;
        row["j"] = s.j;
        row["p"] = s.p;
        row["S_x"] = rat_str(s.S_x);
        row["S_prime"] = rat_str(s.S_prime);
        row["old_value"] = rat_str(s.old_value);
        row["new_sign"] = s.new_sign;
        steps.push_back(std::move(row));
    }
    j["steps"] = std::move(steps);
    return j.dump(2);
}

} // namespace trunclab
