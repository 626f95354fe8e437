#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "precision.hpp"
#include "specfun.hpp"
#include "system.hpp"

namespace nomaspc {

/// Order-statistic description of a selected channel gain: the maximum of
/// `a` i.i.d. branches, each Gamma(b, lambda/m) distributed.
struct EffectiveOrderParams {
    int a = 1;
    int b = 1;
    double lambda = 1.0;
    int m = 1;

    int diversity_exponent() const { return a * b; }
    /// Per-branch exponential rate m / lambda.
    double rate() const { return m / lambda; }

    void validate() const
    {
        if (a < 1 || b < 1 || m < 1 || !(lambda > 0.0))
            throw ConfigError("EffectiveOrderParams: a, b, m >= 1 and lambda > 0 required");
    }
};

/// Maps (method, diversity, link) to the selection-gain law of that link.
///
/// The branch count `a` depends on whether the link's cluster is the one
/// jointly optimized with the transmit antenna (it then also maximizes over
/// K_S) and on the combining scheme (SC maximizes over receive antennas, MRC
/// sums them into the Gamma shape `b`).
inline EffectiveOrderParams effective_params(const SystemConfig& cfg, const SchemeSelect& sel)
{
    const bool sc = sel.diversity == Diversity::TAS_SC;
    EffectiveOrderParams p;
    if (sel.link == Link::SH) {
        const bool joint = sel.method == Method::HCS;
        const int transmit = joint ? cfg.K_S : 1;
        p.a = transmit * (sc ? cfg.K_H * cfg.I : cfg.I);
        p.b = sc ? cfg.m_H : cfg.m_H * cfg.K_H;
        p.lambda = cfg.lambda_SH();
        p.m = cfg.m_H;
    } else {
        const bool joint = sel.method == Method::LCS;
        const int transmit = joint ? cfg.K_S : 1;
        p.a = transmit * (sc ? cfg.K_L * cfg.J : cfg.J);
        p.b = sc ? cfg.m_L : cfg.m_L * cfg.K_L;
        p.lambda = cfg.lambda_SL();
        p.m = cfg.m_L;
    }
    return p;
}

inline constexpr std::uint64_t kDefaultCompositionCap = 1000000;

/// Number of weak compositions of p into b parts, C(p+b-1, b-1).
inline double composition_count(int p, int b)
{
    return binomial(p + b - 1, b - 1);
}

/// All nonnegative integer vectors (d_0, ..., d_{b-1}) summing to p, in
/// reverse-lexicographic order (first component largest first).
inline std::vector<std::vector<int>> enumerate_compositions(
    int p, int b, std::uint64_t cap = kDefaultCompositionCap)
{
    if (p < 1 || b < 1)
        throw DomainError("enumerate_compositions: p and b must be >= 1");
    const double count = composition_count(p, b);
    if (count > static_cast<double>(cap))
        throw CombinatorialBlowup("enumerate_compositions: " + format_number(count) +
                                  " compositions exceed cap " + std::to_string(cap));

    std::vector<std::vector<int>> out;
    out.reserve(static_cast<std::size_t>(count));
    std::vector<int> current(static_cast<std::size_t>(b), 0);
    // Depth-first: fix d_0, then distribute the remainder over the rest.
    auto recurse = [&](auto&& self, int index, int remaining) -> void {
        if (index == b - 1) {
            current[static_cast<std::size_t>(index)] = remaining;
            out.push_back(current);
            return;
        }
        for (int take = remaining; take >= 0; --take) {
            current[static_cast<std::size_t>(index)] = take;
            self(self, index + 1, remaining - take);
        }
    };
    recurse(recurse, 0, p);
    return out;
}

/// One term sign * exp(log_magnitude) * x^phi * exp(-omega x).
template <class Real>
struct CdfTerm {
    int sign = 1;
    Real log_magnitude = 0;
    int phi = 0;
    Real omega = 0;

    Real coeff() const
    {
        using std::exp;
        return Real(sign) * exp(log_magnitude);
    }
};

/// F(x) = 1 + sum coeff * x^phi * e^{-omega x}, the binomial/multinomial
/// expansion of (1 - sum_{q<b} (m x/lambda)^q e^{-m x/lambda} / q!)^a.
template <class Real = double>
struct BasicCdfExpansion {
    EffectiveOrderParams params;
    std::vector<CdfTerm<Real>> terms;
    static constexpr double constant = 1.0;

    std::size_t size() const { return terms.size(); }
};

using CdfExpansion = BasicCdfExpansion<double>;

/// Sum over p = 1..a of C(p+b-1, b-1).
inline double expansion_term_count(const EffectiveOrderParams& params)
{
    double total = 0.0;
    for (int p = 1; p <= params.a; ++p)
        total += composition_count(p, params.b);
    return total;
}

/// Materializes the term expansion.  Coefficients are assembled as
/// log-magnitude plus sign so that multinomial-times-power products never
/// overflow before evaluation.
template <class Real = double>
BasicCdfExpansion<Real> build_cdf_expansion(const EffectiveOrderParams& params,
                                            std::uint64_t cap = kDefaultCompositionCap)
{
    using std::log;
    params.validate();
    if (expansion_term_count(params) > static_cast<double>(cap))
        throw CombinatorialBlowup("build_cdf_expansion: term count exceeds cap");

    const Real log_rate = log(Real(params.m)) - log(Real(params.lambda));
    std::vector<Real> log_fact(static_cast<std::size_t>(params.a + params.b + 1));
    for (std::size_t k = 0; k < log_fact.size(); ++k)
        log_fact[k] = log_factorial<Real>(static_cast<int>(k));

    BasicCdfExpansion<Real> out;
    out.params = params;
    for (int p = 1; p <= params.a; ++p) {
        const Real log_choose = log_fact[params.a] - log_fact[p] - log_fact[params.a - p];
        const Real omega = Real(p) * Real(params.m) / Real(params.lambda);
        for (const auto& delta : enumerate_compositions(p, params.b, cap)) {
            Real log_mag = log_choose + log_fact[p];
            int phi = 0;
            for (int q = 0; q < params.b; ++q) {
                const int d = delta[static_cast<std::size_t>(q)];
                if (d == 0)
                    continue;
                log_mag -= log_fact[d];
                log_mag += Real(d) * (Real(q) * log_rate - log_fact[q]);
                phi += q * d;
            }
            out.terms.push_back(CdfTerm<Real>{p % 2 == 0 ? 1 : -1, log_mag, phi, omega});
        }
    }
    return out;
}

namespace detail {

/// Neumaier-compensated accumulator.
template <class Real>
class CompensatedSum {
public:
    void add(const Real& x)
    {
        using std::abs;
        const Real t = sum_ + x;
        if (abs(sum_) >= abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
        mag_ += abs(x);
    }
    void merge(const CompensatedSum& other)
    {
        add(other.sum_);
        add(other.comp_);
    }
    Real value() const { return sum_ + comp_; }
    /// Sum of |x| over everything added; bounds the cancellation.
    Real magnitude() const { return mag_; }

private:
    Real sum_ = 0;
    Real comp_ = 0;
    Real mag_ = 0;
};

/// Clamps a deterministic probability to [0,1] once it is known to be
/// within `slack` of the interval.
template <class Real>
Real checked_clamp(const Real& raw, double slack, const char* what)
{
    if (!(raw >= Real(-slack) && raw <= Real(1.0 + slack)))
        throw PrecisionLoss(std::string(what) + ": value " + format_number(to_double(raw)) +
                            " outside [0,1] beyond rounding slack");
    if (raw < 0)
        return Real(0);
    if (raw > 1)
        return Real(1);
    return raw;
}

} // namespace detail

/// Evaluates the term expansion with compensated summation.
template <class Real>
Real evaluate_cdf(const BasicCdfExpansion<Real>& expansion, const Real& x)
{
    using std::exp;
    using std::log;
    if (x < 0)
        throw DomainError("evaluate_cdf: x must be nonnegative");
    if (x == 0)
        return Real(0);
    const Real log_x = log(x);
    detail::CompensatedSum<Real> acc;
    acc.add(Real(BasicCdfExpansion<Real>::constant));
    for (const auto& t : expansion.terms) {
        const Real e = t.log_magnitude + Real(t.phi) * log_x - t.omega * x;
        acc.add(Real(t.sign) * exp(e));
    }
    const double slack = 1e-9 * static_cast<double>(expansion.size());
    return detail::checked_clamp(acc.value(), slack, "evaluate_cdf");
}

inline double evaluate_cdf(const CdfExpansion& expansion, double x)
{
    return evaluate_cdf<double>(expansion, x);
}

/// Un-expanded product form P(b, m x / lambda)^a.
template <class Real = double>
Real evaluate_cdf_product(const EffectiveOrderParams& params, const Real& x)
{
    using std::pow;
    if (x < 0)
        throw DomainError("evaluate_cdf_product: x must be nonnegative");
    const Real y = x * Real(params.m) / Real(params.lambda);
    const Real per_branch = regularized_lower_gamma_int<Real>(params.b, y);
    return pow(per_branch, params.a);
}

/// Selection-gain CDF bundling both evaluation routes.  The product form is
/// used when a*b > 16, the expansion otherwise.
class SelectionCdf {
public:
    static constexpr int kProductFormThreshold = 16;

    explicit SelectionCdf(const EffectiveOrderParams& params)
        : params_(params), expansion_(build_cdf_expansion<double>(params))
    {
    }

    double operator()(double x) const
    {
        if (params_.diversity_exponent() > kProductFormThreshold)
            return evaluate_cdf_product(params_, x);
        return evaluate_cdf(expansion_, x);
    }

    const EffectiveOrderParams& params() const { return params_; }
    const CdfExpansion& expansion() const { return expansion_; }

private:
    EffectiveOrderParams params_;
    CdfExpansion expansion_;
};

} // namespace nomaspc
