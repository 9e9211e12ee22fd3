#include <doctest.h>

#include <random>

#include "trunclab/errors.hpp"
#include "trunclab/minimize.hpp"
#include "trunclab/util.hpp"

using namespace trunclab;

TEST_CASE("delta1 brute small values") {
    auto r1 = delta1_brute(1);
    CHECK(r1.value.value == 1);
    CHECK(r1.minimizer.primes.empty());

    auto r4 = delta1_brute(4);
    CHECK(r4.value.value == make_rat(5, 12));
    CHECK(r4.minimizer.at(2) == -1);
    CHECK(r4.minimizer.at(3) == -1);

    auto r9 = delta1_brute(9);
    CHECK(r9.value.value == make_rat(571, 2520));

    auto r10 = delta1_brute(10);
    CHECK(r10.value.value == make_rat(823, 2520));
    for (const auto& v : r10.minimizer.values) CHECK(v == -1);
    CHECK(r10.certificate == Certificate::global);
}

TEST_CASE("delta0 brute small values") {
    CHECK(delta0_brute(1).value.value == 1);
    auto r2 = delta0_brute(2);
    CHECK(r2.value.value == make_rat(1, 2));
    CHECK(r2.minimizer.at(2) == -1);
    auto r4 = delta0_brute(4);
    CHECK(r4.value.value == make_rat(5, 12));
    // class chain at small x: delta(x) <= delta0(x) <= delta1(x)
    for (int64_t x : {2, 6, 10, 14}) {
        auto d0 = delta0_brute(x);
        auto d1 = delta1_brute(x);
        CHECK(d0.value.value <= d1.value.value);
    }
}

TEST_CASE("budget guards name their bound") {
    CHECK_THROWS_AS(delta1_brute(200), BudgetError); // pi(200) = 46
    CHECK_THROWS_AS(delta0_brute(100), BudgetError);
    CHECK_THROWS_AS(delta1_brute(0), ValidationError);
}

TEST_CASE("bnb equals brute") {
    for (int64_t x = 1; x <= 40; ++x) {
        auto a = delta1_brute(x);
        auto b = delta1_bnb(x);
        CHECK(a.value.value == b.value.value);
        CHECK(a.minimizer.values == b.minimizer.values);
        CHECK(b.certificate == Certificate::global);
    }
    // frozen independent enumeration value at x = 30
    auto b30 = delta1_bnb(30);
    CHECK(b30.value.value == parse_rat("205338352127/2329089562800"));
    for (const auto& v : b30.minimizer.values) CHECK(v == -1);
}

TEST_CASE("bnb honors the minimizer contract") {
    for (int64_t x : {17, 29, 44, 60}) {
        auto r = delta1_bnb(x);
        CHECK(truncated_sum(r.minimizer, x).value == r.value.value);
        CHECK(r.minimizer.cls == FuncClass::F1);
    }
}

TEST_CASE("bnb parallel width determinism") {
    for (int width : {1, 4, 16}) {
        BnBConfig cfg;
        cfg.parallel_width = width;
        auto r = delta1_bnb(42, cfg);
        auto base = delta1_bnb(42);
        CHECK(r.value.value == base.value.value);
        CHECK(r.minimizer.values == base.minimizer.values);
        // repeated runs at the same width are byte-identical
        CHECK(min_result_to_json(delta1_bnb(42, cfg)) == min_result_to_json(delta1_bnb(42, cfg)));
    }
}

TEST_CASE("bnb node budget returns local incumbent") {
    BnBConfig cfg;
    cfg.node_budget = 3;
    auto r = delta1_bnb(30, cfg);
    CHECK(r.certificate == Certificate::local);
    CHECK(r.value.value >= delta1_brute(30).value.value);
}

TEST_CASE("large prime reduction examples") {
    // x = 25, partial all -1 on {2,3,5}: S(25/11 -> 2) = 1/2 > 0 so f(11) = -1
    auto partial = lambda_pattern(5);
    auto comp = large_prime_reduction(partial, 25);
    for (const auto& [p, v] : comp) {
        if (p == 11) CHECK(v == -1);
        if (p > 25 / 2) CHECK(v == -1); // S(1) = 1 > 0
    }
    // all-ones partial, x = 9, p = 7: S(1) = 1 so f(7) = -1
    auto ones = constant_assignment(3, FuncClass::F1, Rat(1));
    auto comp9 = large_prime_reduction(ones, 9);
    bool saw7 = false;
    for (const auto& [p, v] : comp9)
        if (p == 7) { saw7 = true; CHECK(v == -1); }
    CHECK(saw7);
}

TEST_CASE("large prime reduction with a rational partial") {
    // completions are linear per large prime, so the +-1 brute force is the
    // right oracle even when the partial takes interior values
    auto partial = make_assignment(5, FuncClass::F,
                                   {{2, make_rat(-1, 2)}, {3, make_rat(1, 3)}, {5, Rat(0)}});
    const int64_t x = 25;
    auto completion = large_prime_reduction(partial, x);
    std::vector<int64_t> large;
    for (int64_t p : primes_up_to(x).primes)
        if (p > 5) large.push_back(p);
    REQUIRE(completion.size() == large.size());

    auto value_of = [&](const std::vector<Rat>& large_vals) {
        std::vector<std::pair<int64_t, Rat>> full = {
            {2, make_rat(-1, 2)}, {3, make_rat(1, 3)}, {5, Rat(0)}};
        for (size_t i = 0; i < large.size(); ++i) full.emplace_back(large[i], large_vals[i]);
        return truncated_sum(make_assignment(x, FuncClass::F, full), x).value;
    };
    std::vector<Rat> chosen;
    for (auto& [p, v] : completion) { (void)p; chosen.push_back(v); }
    Rat reduced = value_of(chosen);
    for (size_t lm = 0; lm < (size_t(1) << large.size()); ++lm) {
        std::vector<Rat> vals;
        for (size_t i = 0; i < large.size(); ++i) vals.emplace_back(lm >> i & 1 ? 1 : -1);
        CHECK(reduced <= value_of(vals));
    }
}

TEST_CASE("large prime reduction is optimal among completions") {
    std::mt19937_64 rng(7);
    for (int64_t x = 2; x <= 30; ++x) {
        const int64_t root = isqrt64(x);
        std::vector<int64_t> small, large;
        for (int64_t p : primes_up_to(x).primes) (p <= root ? small : large).push_back(p);
        for (size_t mask = 0; mask < (size_t(1) << small.size()); ++mask) {
            std::vector<std::pair<int64_t, Rat>> pv;
            for (size_t i = 0; i < small.size(); ++i)
                pv.emplace_back(small[i], Rat(mask >> i & 1 ? 1 : -1));
            auto partial = make_assignment(std::max<int64_t>(root, 1), FuncClass::F1, pv);
            auto completion = large_prime_reduction(partial, x);

            Rat best;
            bool have = false;
            for (size_t lm = 0; lm < (size_t(1) << large.size()); ++lm) {
                auto full = pv;
                for (size_t i = 0; i < large.size(); ++i)
                    full.emplace_back(large[i], Rat(lm >> i & 1 ? 1 : -1));
                Rat v = truncated_sum(make_assignment(x, FuncClass::F1, full), x).value;
                if (!have || v < best) { have = true; best = v; }
            }
            auto full = pv;
            for (const auto& pr : completion) full.push_back(pr);
            Rat reduced = truncated_sum(make_assignment(x, FuncClass::F1, full), x).value;
            CHECK(reduced == best);
        }
    }
}

TEST_CASE("descent at x = 2 and x = 4 lands on the vertex") {
    auto r2 = delta_descent(2, 4, 1);
    CHECK(r2.value.exact);
    CHECK(r2.value.value == make_rat(1, 2));
    CHECK(r2.minimizer.at(2) == -1);

    auto r4 = delta_descent(4, 4, 1);
    CHECK(r4.value.exact);
    CHECK(r4.value.value == make_rat(5, 12));
}

TEST_CASE("descent at x = 9 and x = 10 leaves the vertex") {
    // closed form: with the other primes at -1 the f(3) slice is
    // c + b/6 + b^2/9, minimized at b = -3/4, which undercuts the all-(-1)
    // vertex by exactly 1/16 - 1/18; frozen values 123/560 and 179/560
    // (cross-checked against a global optimizer)
    auto r9 = delta_descent(9, 6, 1);
    CHECK_FALSE(r9.value.exact);
    CHECK(std::abs(r9.value.fvalue - 123.0 / 560.0) < 1e-10);
    CHECK(std::abs(r9.minimizer.at(3).get_d() + 0.75) < 1e-7);
    CHECK(r9.value.fvalue < make_rat(571, 2520).get_d());

    auto r10 = delta_descent(10, 6, 1);
    CHECK_FALSE(r10.value.exact);
    CHECK(std::abs(r10.value.fvalue - 179.0 / 560.0) < 1e-10);
    CHECK(r10.value.fvalue < make_rat(823, 2520).get_d());
}

TEST_CASE("descent is deterministic for a fixed seed") {
    auto a = delta_descent(20, 6, 99);
    auto b = delta_descent(20, 6, 99);
    CHECK(a.value.fvalue == b.value.fvalue);
    CHECK(a.minimizer.values == b.minimizer.values);
}

TEST_CASE("descent value never exceeds the class-f1 minimum") {
    for (int64_t x : {6, 12, 18, 24}) {
        auto d = delta_descent(x, 6, 1);
        auto b = delta1_bnb(x);
        // delta(x) <= delta1(x); exact when the vertex snap fired
        if (d.value.exact)
            CHECK(d.value.value <= b.value.value);
        else
            CHECK(d.value.fvalue <= b.value.fvalue + 1e-9);
    }
}

TEST_CASE("vertex report") {
    auto v4 = vertex_report(4, 4, 1);
    CHECK(v4.descent_at_vertex);
    CHECK(v4.values_equal);
    // at x = 10 the continuous minimum sits strictly inside the box
    auto v10 = vertex_report(10, 4, 1);
    CHECK_FALSE(v10.descent_at_vertex);
    CHECK(v10.value_gap < 0);
    auto v1 = vertex_report(1, 2, 1);
    CHECK(v1.descent.value.value == 1);
    CHECK(v1.bnb.value.value == 1);
}

TEST_CASE("min result json shape") {
    auto j = min_result_to_json(delta1_brute(10));
    CHECK(j.find("\"823/2520\"") != std::string::npos);
    CHECK(j.find("\"brute\"") != std::string::npos);
    CHECK(j.find("\"global\"") != std::string::npos);
    CHECK(j.find("nodes_visited") != std::string::npos);
}
