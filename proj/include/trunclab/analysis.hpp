#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "trunclab/multfunc.hpp"

namespace trunclab {

inline constexpr double kEulerGammaConst = 0.57721566490153286061;
inline constexpr double kLogTwoConst = 0.69314718055994530942;
// printed truncation of the decay constant in the mean-value bound
inline constexpr double kKappaConst = 0.32867;

// rho(u) = 1 for u <= 1, rho(u) = (1/u) int_{u-1}^u rho(t) dt for u >= 1,
// solved by Picard iteration of the integral form on per-unit Chebyshev
// pieces. Throws PrecisionError when the configured grid cannot meet the
// requested precision (grid reaches u = 32).
double dickman_rho(double u, double precision = 1e-12);

// conservative error enclosure of dickman_rho at u
double dickman_error_estimate(double u);

double sigma_minus(double xi); // xi * rho(xi)

struct DickmanTable {
    double u_max = 0;
    double step = 0;
    std::vector<double> values;
    double error_bound = 0;
};

DickmanTable dickman_table(double u_max, double step);

// rho(u) - (1/u) int_{u-1}^u rho, quadrature independent of the solver's
// antiderivative route
double dickman_self_residual(double u);

struct ExtremalLimitConstant {
    double inner;      // 1 - 2 log(1+sqrt(e)) + 4 int_1^{sqrt(e)} log t/(t+1) dt
    double full;       // inner * log 2
    double quad_error; // adaptive quadrature error estimate
};

ExtremalLimitConstant extremal_limit_constant();

struct BoundReport {
    std::string name;
    std::map<std::string, double> inputs;
    double lhs = 0;            // measured side, when the diagnostic has one
    double rhs_shape = 0;      // shape of the bound, implied constant omitted
    double rhs_shape_alt = 0;  // secondary shape, when the display has one
    std::string note;
};

// shape exp(-u e^{u/2}) log x; the implied constants stay unspecified
BoundReport hildebrand_bound(double u, double x);

struct HallTenenbaumReport {
    Rat u_exact;            // sum_{p<=x} (1 - f(p))/p
    double u = 0;
    double bound_shape = 0; // exp(-kappa u)
    double measured = 0;    // (1/x) |sum_{n<=x} f(n)|
};

HallTenenbaumReport hall_tenenbaum_u(const PrimeAssignment& f, int64_t x);

// |F(x) - F(x/w)| against the two decay shapes, for 1 <= w <= x/10
BoundReport lipschitz_check(const PrimeAssignment& f, int64_t x, int64_t w);

} // namespace trunclab
