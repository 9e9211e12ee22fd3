#include <doctest.h>

#include <cmath>
#include <random>

#include "trunclab/analysis.hpp"
#include "trunclab/errors.hpp"

using namespace trunclab;

TEST_CASE("dickman closed form on [0,2]") {
    CHECK(dickman_rho(0.7) == 1.0);
    CHECK(dickman_rho(1.0) == 1.0);
    CHECK(std::abs(dickman_rho(2.0) - (1.0 - std::log(2.0))) < 1e-12);
    for (int i = 0; i <= 100; ++i) {
        const double u = 1.0 + i / 100.0;
        const double expect = u <= 1.0 ? 1.0 : 1.0 - std::log(u);
        CHECK(std::abs(dickman_rho(u) - expect) < 1e-12);
    }
}

TEST_CASE("dickman at 3 against an independent quadrature oracle") {
    // rho(3) = (1 - ln 2) - int_2^3 (1 - ln(t-1))/t dt, evaluated offline
    // with 30-digit arithmetic
    CHECK(std::abs(dickman_rho(3.0) - 0.0486083882911315669) < 1e-13);
}

TEST_CASE("dickman is positive and strictly decreasing past 1") {
    double prev = 1.0;
    for (double u = 1.05; u <= 10.0; u += 0.05) {
        const double v = dickman_rho(u);
        CHECK(v > 0.0);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("dickman self-consistency residual") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(1.0, 10.0);
    for (int i = 0; i < 100; ++i) {
        const double u = uni(rng);
        CHECK(std::abs(dickman_self_residual(u)) < 1e-11);
    }
    CHECK(std::abs(dickman_self_residual(9.999)) < 1e-11);
}

TEST_CASE("dickman precision and range guards") {
    CHECK_THROWS_AS(dickman_rho(-1.0), ValidationError);
    CHECK_THROWS_AS(dickman_rho(2.0, 1e-15), ValidationError); // below the precision floor
    CHECK_THROWS_AS(dickman_rho(40.0), PrecisionError);        // beyond the grid
    CHECK(dickman_error_estimate(5.0) < 1e-12);
}

TEST_CASE("dickman table snapshot") {
    auto t = dickman_table(10.0, 0.5);
    CHECK(t.values.size() == 21);
    CHECK(t.values[0] == 1.0);
    CHECK(t.values[2] == 1.0); // u = 1
    CHECK(std::abs(t.values[4] - (1.0 - std::log(2.0))) < 1e-12);
    CHECK(t.error_bound < 1e-12);
}

TEST_CASE("sigma minus") {
    CHECK(sigma_minus(0.5) == 0.5);
    CHECK(sigma_minus(1.0) == 1.0);
    CHECK(std::abs(sigma_minus(2.0) - 2.0 * (1.0 - std::log(2.0))) < 1e-12);
}

TEST_CASE("extremal limit constant matches its frozen high-precision value") {
    auto c = extremal_limit_constant();
    // mpmath, 30 digits: inner = -0.65699901371692786827912005689
    CHECK(std::abs(c.inner - (-0.656999013716927868)) <= c.quad_error + 1e-13);
    CHECK(std::abs(c.full - (-0.455397013988553386)) <= c.quad_error + 1e-13);
    CHECK(std::abs(c.full - c.inner * kLogTwoConst) < 1e-16);
    // the printed working-paper digits
    CHECK(std::abs(c.inner - (-0.656999)) < 1e-5);
    CHECK(std::abs(c.full - (-0.4553)) < 5e-4);
}

TEST_CASE("hildebrand bound shape") {
    auto r0 = hildebrand_bound(0.0, 100.0);
    CHECK(r0.rhs_shape == doctest::Approx(std::log(100.0)).epsilon(1e-14));
    auto re = hildebrand_bound(2.0, std::exp(1.0));
    CHECK(re.rhs_shape == doctest::Approx(std::exp(-2.0 * std::exp(1.0))).epsilon(1e-14));
    auto r1 = hildebrand_bound(1.0, 1e6);
    CHECK(std::abs(r1.rhs_shape - 2.65666252131846523) < 1e-12);
    CHECK(!r1.note.empty());
    CHECK_THROWS_AS(hildebrand_bound(-1.0, 100.0), ValidationError);
}

TEST_CASE("hall-tenenbaum u") {
    auto ones = constant_assignment(100, FuncClass::F1, Rat(1));
    auto r = hall_tenenbaum_u(ones, 100);
    CHECK(r.u_exact == 0);
    CHECK(r.bound_shape == 1.0);
    CHECK(r.measured == doctest::Approx(1.0).epsilon(1e-12));

    auto two = make_assignment(100, FuncClass::F1, [] {
        std::vector<std::pair<int64_t, Rat>> v;
        for (int64_t p : primes_up_to(100).primes) v.emplace_back(p, Rat(p == 2 ? -1 : 1));
        return v;
    }());
    CHECK(hall_tenenbaum_u(two, 100).u_exact == 1); // single term 2/2

    auto lam = lambda_pattern(10'000);
    auto rl = hall_tenenbaum_u(lam, 10'000);
    Rat expect(0);
    for (int64_t p : primes_up_to(10'000).primes) expect += make_rat(2, p);
    CHECK(rl.u_exact == expect);
    CHECK(rl.bound_shape == doctest::Approx(std::exp(-kKappaConst * expect.get_d())));
}

TEST_CASE("hall-tenenbaum u additivity in a single prime value") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const int64_t x = 50 + static_cast<int64_t>(rng() % 100);
        std::vector<std::pair<int64_t, Rat>> vals;
        for (int64_t p : primes_up_to(x).primes) {
            const int64_t den = 1 + static_cast<int64_t>(rng() % 8);
            const int64_t num = static_cast<int64_t>(rng() % (2 * den + 1)) - den;
            vals.emplace_back(p, make_rat(num, den));
        }
        auto f = make_assignment(x, FuncClass::F, vals);
        auto base = hall_tenenbaum_u(f, x);

        const size_t slot = rng() % vals.size();
        const Rat old_v = vals[slot].second;
        const Rat new_v = make_rat(static_cast<int64_t>(rng() % 5) - 2, 2);
        vals[slot].second = new_v;
        auto changed = hall_tenenbaum_u(make_assignment(x, FuncClass::F, vals), x);

        Rat delta = (old_v - new_v) / Rat(static_cast<long>(vals[slot].first));
        CHECK(changed.u_exact - base.u_exact == delta);
    }
}

TEST_CASE("lipschitz check") {
    auto ones = constant_assignment(1000, FuncClass::F1, Rat(1));
    auto r = lipschitz_check(ones, 1000, 10);
    CHECK(r.lhs < 1e-2); // F is ~1 at both scales
    CHECK(r.rhs_shape > 0);
    CHECK(r.rhs_shape_alt > 0);

    auto r1 = lipschitz_check(ones, 1000, 1);
    CHECK(r1.lhs == 0.0); // identical arguments

    auto lam = lambda_pattern(100'000);
    auto rl = lipschitz_check(lam, 100'000, 10);
    CHECK(rl.lhs >= 0);
    CHECK(rl.rhs_shape == doctest::Approx(std::pow(std::log(20.0) / std::log(1e5), 0.25)));

    CHECK_THROWS_AS(lipschitz_check(ones, 1000, 200), ValidationError); // w > x/10
}
