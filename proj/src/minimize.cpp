#include "trunclab/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>

#include <json.hpp>

#include "trunclab/errors.hpp"
#include "trunclab/util.hpp"

namespace trunclab {

const char* min_method_name(MinMethod m) {
    switch (m) {
        case MinMethod::brute: return "brute";
        case MinMethod::bnb: return "bnb";
        case MinMethod::descent: return "descent";
    }
    return "?";
}

const char* certificate_name(Certificate c) {
    return c == Certificate::global ? "global" : "local";
}

namespace {

// Incrementally maintained list of integers n <= x whose prime factors are
// all assigned, with the sign of f(n). Signs are +-1; zero-valued subtrees
// are simply never generated.
struct SmoothList {
    int64_t x;
    std::vector<int64_t> nums{1};
    std::vector<int8_t> signs{1};

    // appends all multiples m * p^k of existing entries; returns the added
    // contribution to sum f(n)/n and the list watermark for rollback
    std::pair<Rat, size_t> extend(int64_t p, int sign_value) {
        const size_t mark = nums.size();
        Rat delta(0);
        if (sign_value == 0) return {delta, mark};
        for (size_t i = 0; i < mark; ++i) {
            if (nums[i] > x / p) continue;
            int64_t q = nums[i] * p;
            int s = signs[i] * sign_value;
            while (true) {
                nums.push_back(q);
                signs.push_back(static_cast<int8_t>(s));
                delta += Rat(static_cast<long>(s), static_cast<long>(q));
                if (q > x / p) break;
                q *= p;
                s *= sign_value;
            }
        }
        return {delta, mark};
    }

    void rollback(size_t mark) {
        nums.resize(mark);
        signs.resize(mark);
    }
};

PrimeAssignment assignment_from_signs(int64_t x, FuncClass cls,
                                      const std::vector<int64_t>& primes,
                                      const std::vector<int>& signs) {
    std::vector<std::pair<int64_t, Rat>> vals;
    vals.reserve(primes.size());
    for (size_t i = 0; i < primes.size(); ++i)
        vals.emplace_back(primes[i], Rat(static_cast<long>(signs[i])));
    return make_assignment(x, cls, vals);
}

struct BruteSearch {
    int64_t x;
    std::vector<int64_t> primes;
    std::vector<int> choices; // candidate values per coordinate, lex order
    SmoothList list;
    Rat S{1}; // contribution of n = 1
    std::vector<int> current;
    bool have_best = false;
    Rat best;
    std::vector<int> best_signs;
    int64_t nodes = 0;

    void rec(size_t depth) {
        ++nodes;
        if (depth == primes.size()) {
            if (!have_best || S < best) {
                have_best = true;
                best = S;
                best_signs = current;
            }
            return;
        }
        for (int sv : choices) {
            auto [delta, mark] = list.extend(primes[depth], sv);
            S += delta;
            current[depth] = sv;
            rec(depth + 1);
            S -= delta;
            list.rollback(mark);
        }
    }
};

MinResult run_brute(int64_t x, FuncClass cls, const std::vector<int>& choices) {
    BruteSearch search;
    search.x = x;
    search.primes = primes_up_to(x).primes;
    search.choices = choices;
    search.list.x = x;
    search.current.assign(search.primes.size(), 0);
    search.rec(0);

    MinResult out;
    out.x = x;
    out.cls = cls;
    out.method = MinMethod::brute;
    out.certificate = Certificate::global;
    out.nodes_visited = search.nodes;
    out.value = ExactSum::from_rat(search.best);
    out.minimizer = assignment_from_signs(x, cls, search.primes, search.best_signs);
    return out;
}

} // namespace

MinResult delta1_brute(int64_t x) {
    if (x < 1) throw ValidationError("delta1_brute: x must be >= 1");
    const size_t k = primes_up_to(x).primes.size();
    if (k > 28)
        throw BudgetError("delta1_brute requires pi(x) <= 28; pi(" + std::to_string(x) +
                          ") = " + std::to_string(k));
    return run_brute(x, FuncClass::F1, {-1, +1});
}

MinResult delta0_brute(int64_t x) {
    if (x < 1) throw ValidationError("delta0_brute: x must be >= 1");
    const size_t k = primes_up_to(x).primes.size();
    if (k > 14)
        throw BudgetError("delta0_brute requires pi(x) <= 14 (3^pi assignments); pi(" +
                          std::to_string(x) + ") = " + std::to_string(k));
    MinResult out = run_brute(x, FuncClass::F0, {-1, 0, +1});
    out.cls = FuncClass::F0;
    return out;
}

std::vector<std::pair<int64_t, Rat>> large_prime_reduction(const PrimeAssignment& partial,
                                                           int64_t x) {
    const int64_t root = isqrt64(x);
    if (partial.x_max < root)
        throw ValidationError("large_prime_reduction: partial must assign all primes <= sqrt(x)");
    // f over 1..sqrt(x): these integers only contain assigned primes
    std::vector<Rat> val(static_cast<size_t>(root) + 1, Rat(0));
    enumerate_cm(partial, root, [&](int64_t n, const Rat& v) {
        if (n <= root) val[n] = v;
    });
    std::vector<Rat> prefix(static_cast<size_t>(root) + 1, Rat(0));
    Rat run(0);
    for (int64_t m = 1; m <= root; ++m) {
        run += val[m] / Rat(static_cast<long>(m));
        prefix[m] = run;
    }
    std::vector<std::pair<int64_t, Rat>> completion;
    for (int64_t p : primes_up_to(x).primes) {
        if (p <= root) continue;
        const Rat& s = prefix[x / p];
        completion.emplace_back(p, Rat(rat_sign(s) > 0 ? -1 : (rat_sign(s) < 0 ? 1 : -1)));
    }
    return completion;
}

namespace {

struct BnbShared {
    int64_t x;
    std::vector<int64_t> small;   // branching primes, ascending
    std::vector<int64_t> large;   // (sqrt(x), x]
    std::vector<Rat> tail_mass;   // R[j] = sum 1/n over n touched by primes beyond depth j
    int64_t y_max = 0;            // largest floor(x/p) over large p
    std::vector<Rat> weight;      // weight[y] = sum of 1/p over large p with floor(x/p) = y
};

struct BnbResult {
    bool have = false;
    Rat value;
    std::vector<int> signs;
    int64_t nodes = 0;
    bool budget_hit = false;
};

struct BnbWorker {
    const BnbShared& sh;
    int64_t node_budget;
    SmoothList list;
    Rat S{1};
    std::vector<int> current;
    BnbResult res;

    explicit BnbWorker(const BnbShared& shared, int64_t budget)
        : sh(shared), node_budget(budget) {
        list.x = sh.x;
        current.assign(sh.small.size(), 0);
    }

    // exact value of the optimal large-prime completion of the current node
    Rat leaf_value() {
        Rat total = S;
        if (sh.y_max == 0) return total;
        std::vector<Rat> prefix(static_cast<size_t>(sh.y_max) + 1, Rat(0));
        std::vector<int8_t> val(static_cast<size_t>(sh.y_max) + 1, 0);
        for (size_t i = 0; i < list.nums.size(); ++i)
            if (list.nums[i] <= sh.y_max) val[list.nums[i]] = list.signs[i];
        Rat run(0);
        for (int64_t m = 1; m <= sh.y_max; ++m) {
            if (val[m]) run += Rat(static_cast<long>(val[m]), static_cast<long>(m));
            prefix[m] = run;
        }
        for (int64_t y = 1; y <= sh.y_max; ++y) {
            if (sh.weight[y] == 0) continue;
            Rat a = prefix[y];
            if (a < 0) a = -a;
            total -= sh.weight[y] * a;
        }
        return total;
    }

    void candidate() {
        Rat v = leaf_value();
        if (!res.have || v < res.value) {
            res.have = true;
            res.value = v;
            res.signs = current;
        }
    }

    void rec(size_t depth) {
        if (++res.nodes > node_budget) { res.budget_hit = true; return; }
        if (depth == sh.small.size()) {
            candidate();
            return;
        }
        // everything still touched by unassigned primes is worth >= -tail_mass
        if (res.have && S - sh.tail_mass[depth] >= res.value) return;
        for (int sv : {-1, +1}) {
            auto [delta, mark] = list.extend(sh.small[depth], sv);
            S += delta;
            current[depth] = sv;
            rec(depth + 1);
            S -= delta;
            list.rollback(mark);
            if (res.budget_hit) return;
        }
    }

    // explore with the first `prefix.size()` coordinates pinned
    void run(const std::vector<int>& prefix) {
        size_t depth = 0;
        for (int sv : prefix) {
            S += list.extend(sh.small[depth], sv).first;
            current[depth] = sv;
            ++depth;
        }
        rec(depth);
    }
};

// harmonic sum over 1..x as an exact rational
Rat harmonic_exact(int64_t x) {
    Int d = lcm_upto(x);
    Int acc(0), q;
    for (int64_t n = 1; n <= x; ++n) {
        mpz_divexact_ui(q.get_mpz_t(), d.get_mpz_t(), static_cast<unsigned long>(n));
        acc += q;
    }
    Rat r(acc, d);
    r.canonicalize();
    return r;
}

} // namespace

MinResult delta1_bnb(int64_t x, const BnBConfig& cfg) {
    if (x < 1) throw ValidationError("delta1_bnb: x must be >= 1");
    if (cfg.node_budget < 1) throw ValidationError("node_budget must be >= 1");

    BnbShared sh;
    sh.x = x;
    const int64_t root = isqrt64(x);
    for (int64_t p : primes_up_to(x).primes)
        (p <= root ? sh.small : sh.large).push_back(p);

    if (!sh.large.empty()) {
        sh.y_max = x / sh.large.front();
        sh.weight.assign(static_cast<size_t>(sh.y_max) + 1, Rat(0));
        for (int64_t p : sh.large) sh.weight[x / p] += Rat(1, static_cast<long>(p));
    }

    // tail_mass[j] = H(x) - sum of 1/n over {p_1..p_j}-smooth n <= x
    sh.tail_mass.resize(sh.small.size() + 1);
    {
        Rat H = harmonic_exact(x);
        SmoothList probe;
        probe.x = x;
        Rat smooth_sum(1);
        sh.tail_mass[0] = H - smooth_sum;
        for (size_t j = 0; j < sh.small.size(); ++j) {
            auto [delta, mark] = probe.extend(sh.small[j], +1);
            (void)mark;
            smooth_sum += delta;
            sh.tail_mass[j + 1] = H - smooth_sum;
        }
    }

    // split the top of the tree into independent subtrees; no shared
    // incumbent, so artifacts are identical for any width
    int width = std::max(1, cfg.parallel_width);
    size_t split_depth = 0;
    while ((size_t(1) << split_depth) < static_cast<size_t>(width) &&
           split_depth < sh.small.size())
        ++split_depth;
    const size_t tasks = size_t(1) << split_depth;

    std::vector<BnbResult> results(tasks);
    const int64_t per_budget = std::max<int64_t>(1, cfg.node_budget / static_cast<int64_t>(tasks));
    {
        std::vector<std::future<BnbResult>> futs;
        for (size_t t = 0; t < tasks; ++t) {
            std::vector<int> prefix(split_depth);
            for (size_t b = 0; b < split_depth; ++b)
                prefix[b] = (t >> (split_depth - 1 - b)) & 1 ? +1 : -1;
            auto policy = width == 1 ? std::launch::deferred : std::launch::async;
            futs.push_back(std::async(policy, [&sh, per_budget, prefix] {
                BnbWorker w(sh, per_budget);
                w.run(prefix);
                return std::move(w.res);
            }));
        }
        for (size_t t = 0; t < tasks; ++t) results[t] = futs[t].get();
    }

    BnbResult merged;
    for (auto& r : results) {
        merged.nodes += r.nodes;
        merged.budget_hit = merged.budget_hit || r.budget_hit;
        if (!r.have) continue;
        if (!merged.have || r.value < merged.value ||
            (r.value == merged.value && r.signs < merged.signs)) {
            merged.have = true;
            merged.value = r.value;
            merged.signs = r.signs;
        }
    }
    if (!merged.have) {
        // budget died before any leaf: fall back to the all-(-1) incumbent,
        // which is always well defined
        merged.have = true;
        merged.budget_hit = true;
        merged.signs.assign(sh.small.size(), -1);
        BnbWorker w(sh, std::numeric_limits<int64_t>::max());
        w.run(merged.signs);
        merged.value = w.res.value;
        merged.signs = w.res.signs;
    }

    // assemble the full minimizer: branched small primes + reduced large primes
    std::vector<std::pair<int64_t, Rat>> vals;
    for (size_t i = 0; i < sh.small.size(); ++i)
        vals.emplace_back(sh.small[i], Rat(static_cast<long>(merged.signs[i])));
    if (!sh.large.empty()) {
        PrimeAssignment small_part =
            make_assignment(std::max<int64_t>(root, 1), FuncClass::F1, vals);
        for (auto& [p, v] : large_prime_reduction(small_part, x)) vals.emplace_back(p, v);
    }

    MinResult out;
    out.x = x;
    out.cls = FuncClass::F1;
    out.method = MinMethod::bnb;
    out.certificate = merged.budget_hit ? Certificate::local : Certificate::global;
    out.nodes_visited = merged.nodes;
    out.value = ExactSum::from_rat(merged.value);
    out.minimizer = make_assignment(x, FuncClass::F1, vals);
    return out;
}

namespace {

// minimizes a polynomial sum_k coef[k] a^k over [-1,1]; interior minima are
// bracketed by sign changes of the derivative and bisected to convergence
double minimize_poly_on_box(const std::vector<double>& coef, double* best_a) {
    auto eval = [&](double a) {
        double v = 0;
        for (size_t k = coef.size(); k-- > 0;) v = v * a + coef[k];
        return v;
    };
    std::vector<double> der;
    for (size_t k = 1; k < coef.size(); ++k) der.push_back(coef[k] * static_cast<double>(k));
    auto deval = [&](double a) {
        double v = 0;
        for (size_t k = der.size(); k-- > 0;) v = v * a + der[k];
        return v;
    };
    double best = eval(-1.0), arg = -1.0;
    if (eval(1.0) < best) { best = eval(1.0); arg = 1.0; }
    const int grid = 256;
    double prev_a = -1.0, prev_d = deval(-1.0);
    for (int i = 1; i <= grid; ++i) {
        double a = -1.0 + 2.0 * i / grid;
        double d = deval(a);
        if ((prev_d < 0 && d >= 0)) { // minimum bracketed
            double lo = prev_a, hi = a;
            for (int it = 0; it < 100; ++it) {
                double mid = 0.5 * (lo + hi);
                (deval(mid) < 0 ? lo : hi) = mid;
            }
            double root = 0.5 * (lo + hi);
            double v = eval(root);
            if (v < best) { best = v; arg = root; }
        }
        prev_a = a;
        prev_d = d;
    }
    *best_a = arg;
    return best;
}

} // namespace

MinResult delta_descent(int64_t x, int starts, uint64_t seed) {
    if (x < 1) throw ValidationError("delta_descent: x must be >= 1");
    if (starts < 0) throw ValidationError("delta_descent: starts must be >= 0");
    const auto primes = primes_up_to(x).primes;
    const size_t np = primes.size();

    // smallest prime factor sieve for value-table updates
    std::vector<int32_t> spf(static_cast<size_t>(x) + 1, 0);
    for (int64_t i = 2; i <= x; ++i)
        if (!spf[i])
            for (int64_t j = i; j <= x; j += i)
                if (!spf[j]) spf[j] = static_cast<int32_t>(i);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);

    std::vector<double> best_point;
    double best_value = 0;
    bool have_best = false;

    const int total_starts = starts + 1;
    for (int s = 0; s < total_starts; ++s) {
        std::vector<double> a(np, -1.0);
        if (s > 0)
            for (double& v : a) v = uni(rng);

        // value table f(n) for the current point
        std::vector<double> fv(static_cast<size_t>(x) + 1, 1.0);
        std::vector<int> pindex(static_cast<size_t>(x) + 1, -1);
        for (size_t i = 0; i < np; ++i) pindex[primes[i]] = static_cast<int>(i);
        for (int64_t n = 2; n <= x; ++n) fv[n] = fv[n / spf[n]] * a[pindex[spf[n]]];

        double S = 0;
        {
            Kahan k;
            for (int64_t n = 1; n <= x; ++n) k.add(fv[n] / static_cast<double>(n));
            S = k.value;
        }

        for (int sweep = 0; sweep < 400; ++sweep) {
            double max_improve = 0;
            for (size_t ii = np; ii-- > 0;) { // largest prime first
                const int64_t p = primes[ii];
                // objective restricted to a_p: sum_k coef[k] a^k
                std::vector<double> coef;
                coef.push_back(0.0);
                double removed = 0;
                {
                    int64_t pk = 1;
                    int deg = 0;
                    while (pk <= x / p) {
                        pk *= p;
                        ++deg;
                        Kahan ck;
                        for (int64_t m = 1; m <= x / pk; ++m)
                            if (m % p != 0) ck.add(fv[m] / static_cast<double>(m));
                        coef.push_back(ck.value / static_cast<double>(pk));
                    }
                    // c0 = S - current contribution of p-divisible terms
                    double apow = 1;
                    for (int k = 1; k <= deg; ++k) {
                        apow *= a[ii];
                        removed += coef[k] * apow;
                    }
                    coef[0] = S - removed;
                }
                double anew;
                double vnew = minimize_poly_on_box(coef, &anew);
                if (vnew >= S) continue; // objective is never allowed uphill
                if (S - vnew > max_improve) max_improve = S - vnew;
                if (anew != a[ii]) {
                    a[ii] = anew;
                    // refresh f on multiples of p
                    for (int64_t m = p; m <= x; m += p) {
                        int64_t q = 1, r = m;
                        int k = 0;
                        while (r % p == 0) { r /= p; q *= p; ++k; }
                        double av = 1;
                        for (int t = 0; t < k; ++t) av *= anew;
                        fv[m] = av * fv[r];
                    }
                    S = vnew;
                }
            }
            if (max_improve <= 1e-12) break;
        }

        if (!have_best || S < best_value) {
            have_best = true;
            best_value = S;
            best_point = a;
        }
    }

    // snap to an exact vertex when the optimum landed on +-1 coordinates
    bool at_vertex = true;
    for (double v : best_point)
        if (std::abs(std::abs(v) - 1.0) > 1e-9) { at_vertex = false; break; }

    MinResult out;
    out.x = x;
    out.cls = FuncClass::F;
    out.method = MinMethod::descent;
    out.certificate = Certificate::local;
    out.nodes_visited = total_starts;

    std::vector<std::pair<int64_t, Rat>> vals;
    for (size_t i = 0; i < np; ++i) {
        Rat v = at_vertex ? Rat(best_point[i] < 0 ? -1 : 1) : Rat(best_point[i]);
        if (!at_vertex && !rat_abs_le_one(v)) v = v < 0 ? Rat(-1) : Rat(1);
        vals.emplace_back(primes[i], v);
    }
    out.minimizer = make_assignment(x, FuncClass::F, vals);
    out.value = at_vertex ? truncated_sum(out.minimizer, x, SumMode::exact)
                          : truncated_sum(out.minimizer, x, SumMode::floating);
    return out;
}

VertexReport vertex_report(int64_t x, int starts, uint64_t seed, const BnBConfig& cfg) {
    VertexReport rep;
    rep.descent = delta_descent(x, starts, seed);
    rep.bnb = delta1_bnb(x, cfg);
    rep.descent_at_vertex = rep.descent.value.exact;
    if (rep.descent.value.exact)
        rep.values_equal = rep.descent.value.value == rep.bnb.value.value;
    else
        rep.values_equal = false;
    rep.value_gap = rep.descent.value.fvalue - rep.bnb.value.fvalue;
    return rep;
}

std::string min_result_to_json(const MinResult& r) {
    nlohmann::ordered_json j;
    j["x"] = r.x;
    j["class"] = func_class_name(r.cls);
    j["method"] = min_method_name(r.method);
    if (r.value.exact)
        j["value"] = rat_str(r.value.value);
    else
        j["value"] = double_to_exact_string(r.value.fvalue);
    j["value_float"] = r.value.fvalue;
    j["minimizer"] = nlohmann::ordered_json::parse(assignment_to_json(r.minimizer));
    j["certificate"] = certificate_name(r.certificate);
    j["nodes_visited"] = r.nodes_visited;
    return j.dump(2);
}

} // namespace trunclab
