#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include <boost/math/constants/constants.hpp>

#include "errors.hpp"

namespace nomaspc {

// Special functions used by the closed-form BLER expressions, plus the
// adaptive integrator that backs the semi-analytic tier.  The integer-order
// routines are templates so the closed-form tier can run them in extended
// precision; everything else is double.

namespace detail {

template <class Real>
inline Real epsilon_of()
{
    return std::numeric_limits<Real>::epsilon();
}

constexpr int kMaxSeriesTerms = 100000;

} // namespace detail

/// ln(n!) accumulated in Real.
template <class Real = double>
Real log_factorial(int n)
{
    using std::log;
    Real acc = 0;
    for (int k = 2; k <= n; ++k)
        acc += log(Real(k));
    return acc;
}

template <class Real = double>
Real factorial(int n)
{
    Real acc = 1;
    for (int k = 2; k <= n; ++k)
        acc *= Real(k);
    return acc;
}

template <class Real = double>
Real log_binomial(int n, int k)
{
    return log_factorial<Real>(n) - log_factorial<Real>(k) - log_factorial<Real>(n - k);
}

/// Exact binomial coefficient for the small arguments used here.
inline double binomial(int n, int k)
{
    if (k < 0 || k > n)
        return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return std::round(r);
}

// ---------------------------------------------------------------------------
// Gaussian tail
// ---------------------------------------------------------------------------

/// Q(x) = P(Z > x) for standard normal Z.  Saturates to 0 / 1 in the tails.
inline double gaussian_q(double x)
{
    return 0.5 * std::erfc(x * boost::math::constants::one_div_root_two<double>());
}

// ---------------------------------------------------------------------------
// Exponential integrals
// ---------------------------------------------------------------------------

/// e^y E1(y) for y > 0.  Power series below y = 2, Lentz continued fraction
/// above.
template <class Real = double>
Real exp_integral_e1_scaled(const Real& y)
{
    using std::abs;
    using std::exp;
    using std::log;
    if (!(y > 0))
        throw DomainError("exp_integral_e1_scaled: argument must be positive");

    const Real eps = detail::epsilon_of<Real>();
    if (y <= 2) {
        // E1(y) = -gamma - ln y - sum_{k>=1} (-y)^k / (k k!)
        Real head = -boost::math::constants::euler<Real>() - log(y);
        Real term = 1;
        Real tail = 0;
        for (int k = 1; k < detail::kMaxSeriesTerms; ++k) {
            term *= -y / Real(k);
            const Real contrib = term / Real(k);
            tail += contrib;
            if (abs(contrib) < eps * abs(head - tail) * Real(0.25))
                return (head - tail) * exp(y);
        }
        throw NonConvergence("exp_integral_e1_scaled: series did not converge");
    }

    const Real tiny = std::numeric_limits<Real>::min() / eps;
    Real b = y + 1;
    Real c = 1 / tiny;
    Real d = 1 / b;
    Real h = d;
    for (int i = 1; i < detail::kMaxSeriesTerms; ++i) {
        const Real an = -Real(i) * Real(i);
        b += 2;
        d = 1 / (an * d + b);
        c = b + an / c;
        const Real del = c * d;
        h *= del;
        if (abs(del - 1) < eps)
            return h;
    }
    throw NonConvergence("exp_integral_e1_scaled: continued fraction did not converge");
}

/// E1(y) = int_y^inf e^{-t}/t dt, y > 0.
template <class Real = double>
Real exp_integral_e1(const Real& y)
{
    using std::exp;
    return exp_integral_e1_scaled(y) * exp(-y);
}

/// Exponential integral Ei(x), Cauchy principal value.  Ei(x) = -E1(-x) for
/// x < 0; throws DomainError at the logarithmic singularity x = 0.
inline double exp_integral_ei(double x)
{
    if (x == 0.0 || std::isnan(x))
        throw DomainError("exp_integral_ei: undefined at x = 0");
    if (x < 0.0) {
        if (-x > 745.0)
            return -0.0;
        return -exp_integral_e1(-x);
    }
    const double eps = std::numeric_limits<double>::epsilon();
    if (x <= 40.0) {
        double term = 1.0;
        double sum = 0.0;
        for (int k = 1; k < detail::kMaxSeriesTerms; ++k) {
            term *= x / k;
            const double contrib = term / k;
            sum += contrib;
            if (contrib < eps * sum)
                break;
        }
        return boost::math::constants::euler<double>() + std::log(x) + sum;
    }
    // Asymptotic series, truncated at its smallest term.
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double next = term * k / x;
        if (next > term || next < eps * sum)
            break;
        term = next;
        sum += term;
    }
    return std::exp(x) / x * sum;
}

// ---------------------------------------------------------------------------
// Incomplete gamma
// ---------------------------------------------------------------------------

/// e^x Gamma(k, x) for integer k >= 1, via the finite sum
/// (k-1)! sum_{j<k} x^j / j!.  Exact up to rounding.
template <class Real = double>
Real upper_gamma_int_scaled(int k, const Real& x)
{
    if (k < 1)
        throw DomainError("upper_gamma_int_scaled: order must be >= 1");
    Real term = 1;
    Real sum = 1;
    for (int j = 1; j < k; ++j) {
        term *= x / Real(j);
        sum += term;
    }
    return factorial<Real>(k - 1) * sum;
}

/// Gamma(k, x) for integer k >= 1.
template <class Real = double>
Real upper_gamma_int(int k, const Real& x)
{
    using std::exp;
    return upper_gamma_int_scaled(k, x) * exp(-x);
}

/// Regularized lower incomplete gamma P(b, y) = 1 - e^{-y} sum_{k<b} y^k/k!
/// for integer b >= 1.  The series branch keeps full relative accuracy when
/// P is tiny, which the product-form CDF relies on at high SNR.
template <class Real = double>
Real regularized_lower_gamma_int(int b, const Real& y)
{
    using std::abs;
    using std::exp;
    using std::log;
    if (b < 1)
        throw DomainError("regularized_lower_gamma_int: order must be >= 1");
    if (!(y > 0))
        return Real(0);
    if (y < Real(b + 1)) {
        const Real eps = detail::epsilon_of<Real>();
        Real term = 1;
        Real sum = 1;
        for (int j = 1; j < detail::kMaxSeriesTerms; ++j) {
            term *= y / Real(b + j);
            sum += term;
            if (term < eps * sum * Real(0.25))
                break;
        }
        // y^b/b! as a running product keeps a few ulps; the log form
        // amplifies rounding by |b log y| and is only the underflow fallback.
        Real prefactor = 1;
        for (int j = 1; j <= b; ++j)
            prefactor *= y / Real(j);
        if (prefactor > std::numeric_limits<Real>::min() / detail::epsilon_of<Real>())
            return prefactor * exp(-y) * sum;
        return exp(Real(b) * log(y) - y - log_factorial<Real>(b)) * sum;
    }
    Real term = 1;
    Real sum = 1;
    for (int k = 1; k < b; ++k) {
        term *= y / Real(k);
        sum += term;
    }
    return 1 - exp(-y) * sum;
}

/// Upper incomplete gamma Gamma(a, x) = int_x^inf t^{a-1} e^{-t} dt.
/// Integer orders use the finite exponential sum; other orders use the
/// lower-gamma series below x = a + 1 and a continued fraction above.
inline double upper_incomplete_gamma(double a, double x)
{
    if (!(a > 0.0))
        throw DomainError("upper_incomplete_gamma: order must be positive");
    if (x < 0.0 || std::isnan(x))
        throw DomainError("upper_incomplete_gamma: argument must be nonnegative");
    if (a == std::floor(a) && a <= 170.0)
        return upper_gamma_int<double>(static_cast<int>(a), x);
    if (x == 0.0)
        return std::tgamma(a);

    const double eps = std::numeric_limits<double>::epsilon();
    const double log_prefactor = -x + a * std::log(x);
    if (x < a + 1.0) {
        double ap = a;
        double del = 1.0 / a;
        double sum = del;
        for (int n = 1; n < detail::kMaxSeriesTerms; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * eps)
                break;
        }
        const double lower = sum * std::exp(log_prefactor);
        return std::tgamma(a) - lower;
    }
    const double tiny = std::numeric_limits<double>::min() / eps;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < detail::kMaxSeriesTerms; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny)
            d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps)
            return std::exp(log_prefactor) * h;
    }
    throw NonConvergence("upper_incomplete_gamma: continued fraction did not converge");
}

// ---------------------------------------------------------------------------
// Adaptive quadrature
// ---------------------------------------------------------------------------

struct QuadratureSpec {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_subdivisions = 2000;

    void validate() const
    {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
            throw DomainError("QuadratureSpec: tolerances must be strictly positive");
        if (max_subdivisions < 1)
            throw DomainError("QuadratureSpec: max_subdivisions must be >= 1");
    }
};

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;
    int subdivisions = 0;
    int evaluations = 0;
};

namespace detail {

struct Panel {
    double lo;
    double hi;
    double value;
    double error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

// 7-point Gauss / 15-point Kronrod pair.
template <class F>
Panel gauss_kronrod_15(const F& f, double lo, double hi)
{
    static constexpr double xgk[8] = {
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
    static constexpr double wgk[8] = {
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr double wg[4] = {
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = f(center);
    double kronrod = wgk[7] * fc;
    double gauss = wg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = half * xgk[j];
        const double pair = f(center - dx) + f(center + dx);
        kronrod += wgk[j] * pair;
        if (j % 2 == 1)
            gauss += wg[j / 2] * pair;
    }
    kronrod *= half;
    gauss *= half;
    return Panel{lo, hi, kronrod, std::abs(kronrod - gauss)};
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over [lo, hi].  Stops
/// when the summed error estimate meets abs_tol or rel_tol * |value|; throws
/// NonConvergence when max_subdivisions panels have been split without
/// reaching either.
template <class F>
QuadratureResult integrate(const F& f, double lo, double hi, const QuadratureSpec& spec = {})
{
    spec.validate();
    if (!(lo < hi))
        throw DomainError("integrate: requires lo < hi");

    std::priority_queue<detail::Panel> panels;
    detail::Panel first = detail::gauss_kronrod_15(f, lo, hi);
    double total = first.value;
    double total_err = first.error;
    panels.push(first);
    QuadratureResult result;
    result.evaluations = 15;

    auto converged = [&] {
        return total_err <= spec.abs_tol || total_err <= spec.rel_tol * std::abs(total);
    };
    while (!converged()) {
        if (result.subdivisions >= spec.max_subdivisions)
            throw NonConvergence("integrate: subdivision budget exhausted (error estimate " +
                                 format_number(total_err) + ")");
        detail::Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        detail::Panel left = detail::gauss_kronrod_15(f, worst.lo, mid);
        detail::Panel right = detail::gauss_kronrod_15(f, mid, worst.hi);
        result.evaluations += 30;
        ++result.subdivisions;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
    }

    double sum = 0.0;
    double err = 0.0;
    while (!panels.empty()) {
        sum += panels.top().value;
        err += panels.top().error;
        panels.pop();
    }
    result.value = sum;
    result.abs_error = err;
    return result;
}

} // namespace nomaspc
