#include "trunclab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "trunclab/errors.hpp"

namespace trunclab {

namespace {

constexpr int kChebOrder = 32;
constexpr int kGridMax = 32; // pieces cover u in [0, kGridMax]

// Chebyshev piece on [k, k+1]; u = k + (t+1)/2, t in [-1,1]
struct Piece {
    std::vector<double> coef;

    double eval_t(double t) const {
        double b1 = 0, b2 = 0;
        for (size_t j = coef.size(); j-- > 1;) {
            double b0 = 2 * t * b1 - b2 + coef[j];
            b2 = b1;
            b1 = b0;
        }
        return t * b1 - b2 + coef[0];
    }

    // antiderivative coefficients in t (du = dt/2 handled by the caller);
    // the recurrence wants the doubled constant-term convention
    std::vector<double> antiderivative() const {
        std::vector<double> b(coef.size() + 1, 0.0);
        auto c = [&](size_t j) {
            if (j == 0) return 2.0 * coef[0];
            return j < coef.size() ? coef[j] : 0.0;
        };
        for (size_t j = 1; j < b.size(); ++j)
            b[j] = (c(j - 1) - c(j + 1)) / (2.0 * static_cast<double>(j));
        return b;
    }
};

double eval_series(const std::vector<double>& coef, double t) {
    double b1 = 0, b2 = 0;
    for (size_t j = coef.size(); j-- > 1;) {
        double b0 = 2 * t * b1 - b2 + coef[j];
        b2 = b1;
        b1 = b0;
    }
    return t * b1 - b2 + coef[0];
}

std::vector<double> fit_chebyshev(const std::vector<double>& node_values) {
    const int m = static_cast<int>(node_values.size());
    std::vector<double> c(m, 0.0);
    for (int j = 0; j < m; ++j) {
        double s = 0;
        for (int i = 0; i < m; ++i)
            s += node_values[i] * std::cos(j * M_PI * (i + 0.5) / m);
        c[j] = 2.0 * s / m;
    }
    c[0] *= 0.5;
    return c;
}

class DickmanSolver {
public:
    DickmanSolver() { build(); }

    double eval(double u) const {
        if (u <= 1.0) return 1.0;
        if (u >= kGridMax) throw PrecisionError("dickman grid covers u <= 32");
        int k = static_cast<int>(std::floor(u));
        if (k >= kGridMax) k = kGridMax - 1;
        const double t = 2.0 * (u - k) - 1.0;
        return pieces_[k].eval_t(std::clamp(t, -1.0, 1.0));
    }

    // int_a^b rho over [max(a,0), b], b <= kGridMax
    double integrate(double a, double b) const {
        if (a < 0) a = 0;
        double total = 0;
        int ka = static_cast<int>(std::floor(a));
        for (int k = ka; k < kGridMax && k < b; ++k) {
            const double lo = std::max(a, static_cast<double>(k));
            const double hi = std::min(b, static_cast<double>(k + 1));
            if (hi <= lo) continue;
            if (k == 0) {
                total += hi - lo;
                continue;
            }
            const auto anti = pieces_[k].antiderivative();
            const double tlo = 2.0 * (lo - k) - 1.0;
            const double thi = 2.0 * (hi - k) - 1.0;
            total += 0.5 * (eval_series(anti, thi) - eval_series(anti, tlo));
        }
        return total;
    }

    double error_estimate(double u) const {
        if (u <= 1.0) return 0.0;
        int k = std::min(static_cast<int>(std::floor(u)), kGridMax - 1);
        return acc_err_[k] * std::max(eval(u), 1e-300) + 1e-305;
    }

private:
    void build() {
        pieces_.resize(kGridMax);
        acc_err_.assign(kGridMax, 0.0);
        std::vector<double> nodes(kChebOrder);
        for (int i = 0; i < kChebOrder; ++i) nodes[i] = std::cos(M_PI * (i + 0.5) / kChebOrder);

        pieces_[0].coef = {1.0}; // rho = 1 on [0,1]
        double carried = 1e-15;
        for (int k = 1; k < kGridMax; ++k) {
            // start from the continuous extension of the previous piece
            const double left = k == 1 ? 1.0 : pieces_[k - 1].eval_t(1.0);
            pieces_[k].coef.assign(kChebOrder, 0.0);
            pieces_[k].coef[0] = left;

            std::vector<double> vals(kChebOrder), prev(kChebOrder, left);
            double rel = 1.0;
            for (int iter = 0; iter < 200 && rel > 1e-16; ++iter) {
                for (int i = 0; i < kChebOrder; ++i) {
                    const double u = k + 0.5 * (nodes[i] + 1.0);
                    vals[i] = integrate(u - 1.0, u) / u;
                }
                pieces_[k].coef = fit_chebyshev(vals);
                rel = 0;
                const double scale = std::max(std::abs(vals[kChebOrder - 1]), 1e-300);
                for (int i = 0; i < kChebOrder; ++i)
                    rel = std::max(rel, std::abs(vals[i] - prev[i]) / scale);
                prev = vals;
            }
            carried += rel + 4e-16;
            acc_err_[k] = carried;
        }
    }

    std::vector<Piece> pieces_;
    std::vector<double> acc_err_;
};

const DickmanSolver& solver() {
    static DickmanSolver s;
    return s;
}

} // namespace

double dickman_rho(double u, double precision) {
    if (u < 0) throw ValidationError("dickman_rho: u must be >= 0");
    if (!(precision >= 1e-14))
        throw ValidationError("dickman_rho: precision must be >= 1e-14");
    if (u <= 1.0) return 1.0;
    if (u >= kGridMax)
        throw PrecisionError("dickman_rho: u = " + std::to_string(u) +
                             " outside the configured grid (u <= 32)");
    const double err = solver().error_estimate(u);
    if (err > precision)
        throw PrecisionError("dickman_rho: achievable error " + std::to_string(err) +
                             " exceeds requested precision");
    return solver().eval(u);
}

double dickman_error_estimate(double u) {
    if (u < 0) throw ValidationError("dickman_error_estimate: u must be >= 0");
    if (u >= kGridMax) throw PrecisionError("dickman grid covers u <= 32");
    return solver().error_estimate(u);
}

double sigma_minus(double xi) {
    if (xi < 0) throw ValidationError("sigma_minus: xi must be >= 0");
    if (xi <= 1.0) return xi; // rho = 1 there
    return xi * solver().eval(xi);
}

DickmanTable dickman_table(double u_max, double step) {
    if (!(step > 0) || !(u_max > 0) || u_max >= kGridMax)
        throw ValidationError("dickman_table: need 0 < step, 0 < u_max < 32");
    DickmanTable t;
    t.u_max = u_max;
    t.step = step;
    double worst = 0;
    for (double u = 0; u <= u_max + 1e-12; u += step) {
        t.values.push_back(u <= 1.0 ? 1.0 : solver().eval(u));
        worst = std::max(worst, solver().error_estimate(std::min(u, u_max)));
    }
    t.error_bound = worst;
    return t;
}

double dickman_self_residual(double u) {
    if (u < 1.0 || u >= kGridMax)
        throw ValidationError("dickman_self_residual: u must lie in [1, 32)");
    // composite Simpson split at the integer knots; independent of the
    // solver's antiderivative route
    auto rho = [&](double t) { return t <= 1.0 ? 1.0 : solver().eval(t); };
    const double a = u - 1.0, b = u;
    double total = 0;
    double knot = std::floor(a) + 1.0;
    double lo = a;
    while (lo < b - 1e-15) {
        const double hi = std::min(b, knot);
        const int panels = 1 << 11;
        const double h = (hi - lo) / panels;
        double s = rho(lo) + rho(hi);
        for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * rho(lo + i * h);
        total += s * h / 3.0;
        lo = hi;
        knot += 1.0;
    }
    return rho(u) - total / u;
}

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth,
                        double* err_out) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        *err_out += std::abs(delta) / 15.0;
        return left + right + delta / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1, err_out) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1, err_out);
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                          double* err_out) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    *err_out = 0;
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40, err_out);
}

} // namespace

ExtremalLimitConstant extremal_limit_constant() {
    const double sqrte = std::sqrt(std::exp(1.0));
    double err = 0;
    const double integral = integrate_adaptive(
        [](double t) { return std::log(t) / (t + 1.0); }, 1.0, sqrte, 1e-14, &err);
    ExtremalLimitConstant c;
    c.inner = 1.0 - 2.0 * std::log(1.0 + sqrte) + 4.0 * integral;
    c.full = c.inner * kLogTwoConst;
    c.quad_error = 4.0 * err + 1e-14;
    return c;
}

BoundReport hildebrand_bound(double u, double x) {
    if (u < 0 || x <= 1) throw ValidationError("hildebrand_bound: need u >= 0 and x > 1");
    BoundReport r;
    r.name = "hildebrand-lower-shape";
    r.inputs = {{"u", u}, {"x", x}};
    r.rhs_shape = std::exp(-u * std::exp(u / 2.0)) * std::log(x);
    r.note = "lower-bound shape for (1/x) sum g(n); beta and both implied "
             "constants are unspecified, nothing is asserted";
    return r;
}

HallTenenbaumReport hall_tenenbaum_u(const PrimeAssignment& f, int64_t x) {
    if (x < 1 || x > f.x_max) throw ValidationError("hall_tenenbaum_u: x outside [1, x_max]");
    HallTenenbaumReport rep;
    Rat u(0);
    for (size_t i = 0; i < f.primes.size() && f.primes[i] <= x; ++i)
        u += (Rat(1) - f.values[i]) / Rat(static_cast<long>(f.primes[i]));
    rep.u_exact = u;
    rep.u = u.get_d();
    rep.bound_shape = std::exp(-kKappaConst * rep.u);
    rep.measured = std::abs(mean_value(f, x, SumMode::floating).fvalue);
    return rep;
}

BoundReport lipschitz_check(const PrimeAssignment& f, int64_t x, int64_t w) {
    if (w < 1 || w > x / 10)
        throw ValidationError("lipschitz_check: requires 1 <= w <= x/10");
    if (x > f.x_max) throw ValidationError("lipschitz_check: x outside [1, x_max]");
    BoundReport r;
    r.name = "lipschitz-decay";
    r.inputs = {{"x", static_cast<double>(x)}, {"w", static_cast<double>(w)}};
    const double Fx = mean_value(f, x, SumMode::floating).fvalue;
    const double Fxw = mean_value(f, x / w, SumMode::floating).fvalue;
    r.lhs = std::abs(Fx - Fxw);
    const double ratio = std::log(2.0 * static_cast<double>(w)) / std::log(static_cast<double>(x));
    r.rhs_shape = std::pow(ratio, 0.25);
    const double loglogx = std::log(std::log(static_cast<double>(x)));
    r.rhs_shape_alt = std::pow(ratio, 1.0 - 2.0 / M_PI) * std::log(1.0 / ratio) +
                      loglogx / std::pow(std::log(static_cast<double>(x)), 2.0 - std::sqrt(3.0));
    r.note = "quarter-power shape and (1-2/pi)-exponent shape; implied constants "
             "unspecified, diagnostic only";
    return r;
}

} // namespace trunclab
