#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include <boost/math/constants/constants.hpp>

#include "errors.hpp"
#include "precision.hpp"
#include "scheme_params.hpp"
#include "specfun.hpp"
#include "system.hpp"

namespace nomaspc {

enum class Tier { CLOSED_FORM, QUADRATURE, RIEMANN, MONTE_CARLO };

inline std::string_view to_string(Tier t)
{
    switch (t) {
    case Tier::CLOSED_FORM: return "closed";
    case Tier::QUADRATURE: return "quadrature";
    case Tier::RIEMANN: return "riemann";
    case Tier::MONTE_CARLO: return "mc";
    }
    return "?";
}

struct BlerEstimate {
    double value = 1.0;
    Tier method = Tier::CLOSED_FORM;
    /// Zero for deterministic tiers, 95% CI half-width for Monte Carlo.
    double uncertainty = 0.0;
    /// Set when a CeilingViolation was mapped to BLER = 1.
    bool saturated = false;
};

enum class Dispersion { REDUCED, STANDARD };

struct Scheme {
    Method method = Method::HCS;
    Diversity diversity = Diversity::TAS_SC;
};

/// The three decoding events: H decoding x_H, L decoding x_H (SIC stage),
/// L decoding x_L after cancellation.
enum class Stage { H_OWN, L_DECODE_H, L_OWN };

// ---------------------------------------------------------------------------
// Instantaneous quantities
// ---------------------------------------------------------------------------

/// REDUCED: (log2 e)^2 [1 - 1/(1+g)].  STANDARD: (log2 e)^2 [1 - (1+g)^-2].
inline double channel_dispersion(double gamma, Dispersion mode = Dispersion::REDUCED)
{
    const double log2e_sq = std::numbers::log2e * std::numbers::log2e;
    const double inv = 1.0 / (1.0 + gamma);
    if (mode == Dispersion::REDUCED)
        return log2e_sq * (gamma * inv);
    return log2e_sq * (1.0 - inv * inv);
}

/// Normal-approximation BLER of one block at SINR `gamma`.
inline double instantaneous_bler(double gamma, const PacketSpec& pkt,
                                 Dispersion mode = Dispersion::REDUCED)
{
    if (gamma < 0.0)
        throw DomainError("instantaneous_bler: gamma must be nonnegative");
    if (gamma == 0.0)
        return 1.0;
    const double disp = channel_dispersion(gamma, mode);
    const double arg = (std::log2(1.0 + gamma) - pkt.rate()) / std::sqrt(disp / pkt.N);
    return gaussian_q(arg);
}

inline double sinr_user_h(double g_SH, const PowerSplit& split, double gamma0)
{
    return split.alpha_H() * gamma0 * g_SH / (split.alpha_L() * gamma0 * g_SH + 1.0);
}

inline double sinr_user_l_decode_h(double g_SL, const PowerSplit& split, double gamma0)
{
    return split.alpha_H() * gamma0 * g_SL / (split.alpha_L() * gamma0 * g_SL + 1.0);
}

inline double snr_user_l_own(double g_SL, const PowerSplit& split, double gamma0)
{
    return split.alpha_L() * gamma0 * g_SL;
}

// ---------------------------------------------------------------------------
// Stage description
// ---------------------------------------------------------------------------

/// Everything one averaged-BLER stage needs: the selection-gain law of the
/// receiving link, the packet whose message is decoded, and how SINR maps
/// back to gain.
struct StageSetup {
    Stage stage = Stage::H_OWN;
    EffectiveOrderParams law;
    PacketSpec pkt;
    PowerSplit split;
    double gamma0 = 1.0;

    bool interference_limited() const { return stage != Stage::L_OWN; }

    /// Gain threshold at which the SINR equals x.
    double gain_at(double x) const
    {
        if (interference_limited())
            return x / (gamma0 * (split.alpha_H() - split.alpha_L() * x));
        return x / (split.alpha_L() * gamma0);
    }
};

inline StageSetup make_stage(Stage stage, const SystemConfig& cfg, const Scheme& scheme,
                             const PowerSplit& split, const PacketSpec& pkt_H,
                             const PacketSpec& pkt_L)
{
    cfg.validate();
    const Link link = stage == Stage::H_OWN ? Link::SH : Link::SL;
    StageSetup s{stage, effective_params(cfg, SchemeSelect{scheme.method, scheme.diversity, link}),
                 stage == Stage::L_OWN ? pkt_L : pkt_H, split, cfg.gamma0};
    return s;
}

/// Linearization window [v, mu] and slope chi*sqrt(N), carried in Real so
/// the closed form's leading "1 +" cancels exactly.
template <class Real>
struct LinearizationWindow {
    Real lo;
    Real hi;
    Real scale;

    static LinearizationWindow from_packet(const PacketSpec& pkt)
    {
        using std::exp;
        using std::log;
        using std::sqrt;
        const Real rate = Real(pkt.n) / Real(pkt.N);
        const Real ln2 = log(Real(2));
        const Real beta = exp(rate * ln2) - 1;
        const Real chi = 1 / sqrt(2 * boost::math::constants::pi<Real>() * (exp(2 * rate * ln2) - 1));
        const Real scale = chi * sqrt(Real(pkt.N));
        const Real half = 1 / (2 * scale);
        return LinearizationWindow{beta - half, beta + half, scale};
    }
};

namespace detail {

inline void check_ceiling(const StageSetup& s, double upper)
{
    if (s.interference_limited() && !(upper < s.split.ceiling()))
        throw CeilingViolation("SINR window upper limit " + format_number(upper) +
                               " reaches the ceiling alpha_H/alpha_L = " +
                               format_number(s.split.ceiling()));
}

/// e^{omega h} int_0^h u^k e^{-omega u} du for k >= 0 as the lower-gamma
/// series h^{k+1} sum_j (omega h)^j k!/(k+1+j)!; no cancellation against k!.
template <class Real>
Real lower_power_exp_scaled(int k, const Real& omega, const Real& h)
{
    using std::abs;
    using std::pow;
    const Real eps = epsilon_of<Real>();
    const Real y = omega * h;
    Real term = Real(1) / Real(k + 1);
    Real sum = term;
    for (int j = 1; j < kMaxSeriesTerms; ++j) {
        term *= y / Real(k + 1 + j);
        sum += term;
        if (abs(term) < eps * abs(sum) * Real(0.25))
            return pow(h, k + 1) * sum;
    }
    throw NonConvergence("lower_power_exp_scaled: series did not converge");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Closed form
// ---------------------------------------------------------------------------

/// e^{omega*shift} * int_{shift+dlo}^{shift+dhi} u^k e^{-omega u} du for
/// k >= -2, using the exponential-integral (k = -1, -2) and incomplete-gamma
/// (k >= 0) antiderivatives, switching to the lower-gamma series while
/// omega*hi is small.  The e^{omega*shift} factor is folded into the
/// exponentials so that large shifts neither overflow nor cancel.
template <class Real>
Real shifted_power_exp_integral(int k, const Real& omega, const Real& dlo, const Real& dhi,
                                const Real& shift)
{
    using std::exp;
    using std::pow;
    if (k < -2)
        throw DomainError("shifted_power_exp_integral: k must be >= -2");
    const Real lo = shift + dlo;
    const Real hi = shift + dhi;
    if (!(lo > 0) || !(hi >= lo))
        throw DomainError("shifted_power_exp_integral: requires 0 < lo <= hi");
    const Real w_lo = exp(-omega * dlo);
    const Real w_hi = exp(-omega * dhi);
    if (k >= 0 && omega * hi <= Real(k + 1))
        return w_hi * detail::lower_power_exp_scaled<Real>(k, omega, hi) -
               w_lo * detail::lower_power_exp_scaled<Real>(k, omega, lo);
    if (k >= 0) {
        const Real diff = w_lo * upper_gamma_int_scaled<Real>(k + 1, omega * lo) -
                          w_hi * upper_gamma_int_scaled<Real>(k + 1, omega * hi);
        return diff / pow(omega, k + 1);
    }
    const Real e1_diff = w_lo * exp_integral_e1_scaled<Real>(omega * lo) -
                         w_hi * exp_integral_e1_scaled<Real>(omega * hi);
    if (k == -1)
        return e1_diff;
    return w_lo / lo - w_hi / hi - omega * e1_diff;
}

/// int_lo^hi u^k e^{-omega u} du.
template <class Real = double>
Real power_exp_integral(int k, const Real& omega, const Real& lo, const Real& hi)
{
    return shifted_power_exp_integral<Real>(k, omega, lo, hi, Real(0));
}

/// Raw (unclamped) closed-form average BLER of one stage, evaluated in Real.
///
/// Interference-limited stages substitute t = B_x and u = 1/(gamma0 alpha_L)
/// + t, expand (u - c)^phi binomially and integrate each power against
/// e^{-omega u}.  The x_L stage integrates x^phi e^{-omega_hat x} directly.
template <class Real>
struct ClosedRaw {
    Real value;
    Real magnitude; // sum of |summands| behind value
};

template <class Real = extended>
ClosedRaw<Real> stage_closed_raw(const StageSetup& s, const BasicCdfExpansion<Real>& expansion)
{
    using std::abs;
    using std::max;
    using std::pow;
    const auto win = LinearizationWindow<Real>::from_packet(s.pkt);
    detail::check_ceiling(s, to_double(win.hi));

    const Real aL = Real(s.split.alpha_L());
    const Real aH = 1 - aL;
    const Real g0 = Real(s.gamma0);
    const Real lower = win.lo > 0 ? win.lo : Real(0);
    const Real upper = win.hi;

    detail::CompensatedSum<Real> acc;
    if (s.interference_limited()) {
        const Real c = 1 / (g0 * aL);
        const Real b_lo = lower / (g0 * (aH - aL * lower));
        const Real b_hi = upper / (g0 * (aH - aL * upper));
        for (const auto& t : expansion.terms) {
            const Real coeff = t.coeff();
            Real neg_c_pow = 1;
            for (int q = 0; q <= t.phi; ++q) {
                const Real j = shifted_power_exp_integral<Real>(t.phi - q - 2, t.omega, b_lo, b_hi, c);
                acc.add(coeff * Real(binomial(t.phi, q)) * neg_c_pow * j);
                neg_c_pow *= -c;
            }
        }
        const Real lead = win.scale * (upper - lower);
        const Real k = win.scale * aH / (g0 * aL * aL);
        return {lead + k * acc.value(), abs(lead) + abs(k) * acc.magnitude()};
    }

    const Real gain_scale = aL * g0;
    for (const auto& t : expansion.terms) {
        const Real omega_hat = t.omega / gain_scale;
        const Real j = shifted_power_exp_integral<Real>(t.phi, omega_hat, lower, upper, Real(0));
        acc.add(t.coeff() * j / pow(gain_scale, t.phi));
    }
    const Real lead = win.scale * (upper - lower);
    return {lead + win.scale * acc.value(), abs(lead) + abs(win.scale) * acc.magnitude()};
}

namespace detail {

// Relative accuracy the closed form must keep after cancellation.
inline constexpr double kClosedRelTol = 1e-14;

template <class Real>
std::optional<double> closed_at_precision(const StageSetup& s)
{
    using std::abs;
    const auto expansion = build_cdf_expansion<Real>(s.law);
    const auto raw = stage_closed_raw<Real>(s, expansion);
    const double slack = 1e-9 * static_cast<double>(expansion.size());
    const Real v = checked_clamp(raw.value, slack, "stage_closed");
    const Real noise = Real(64) * epsilon_of<Real>() * raw.magnitude;
    if (v == 1 || noise <= Real(kClosedRelTol) * abs(raw.value))
        return to_double(v);
    return std::nullopt;
}

} // namespace detail

/// Closed-form stage BLER.  Evaluated in Real first and redone in `wide`
/// when the alternating sum has cancelled below kClosedRelTol.
template <class Real = extended>
double stage_closed(const StageSetup& s)
{
    if (const auto v = detail::closed_at_precision<Real>(s))
        return *v;
    if (const auto v = detail::closed_at_precision<wide>(s))
        return *v;
    throw PrecisionLoss("stage_closed: cancellation exceeds " +
                        std::to_string(std::numeric_limits<wide>::digits10) + " digits");
}

// ---------------------------------------------------------------------------
// Quadrature and Riemann tiers
// ---------------------------------------------------------------------------

/// Tolerances tight enough for the quadrature tier to arbitrate the closed
/// form at 1e-8 relative even when the BLER is far below 1e-12.
inline QuadratureSpec default_bler_quadrature()
{
    return QuadratureSpec{1e-300, 1e-13, 4000};
}

/// chi sqrt(N) int_{max(lo,0)}^{hi} F(gain_at(x)) dx with the product-form
/// CDF as integrand.
inline double stage_quadrature(const StageSetup& s, const LinearizationWindow<double>& win,
                               const QuadratureSpec& spec = default_bler_quadrature())
{
    if (!(win.hi > win.lo))
        throw DomainError("stage_quadrature: degenerate linearization window (v >= mu)");
    detail::check_ceiling(s, win.hi);
    const double lower = std::max(win.lo, 0.0);
    if (!(win.hi > lower))
        return 0.0;
    auto integrand = [&](double x) { return evaluate_cdf_product<double>(s.law, s.gain_at(x)); };
    const auto result = integrate(integrand, lower, win.hi, spec);
    const double raw = win.scale * result.value;
    return detail::checked_clamp(raw, 1e-9, "stage_quadrature");
}

inline double stage_quadrature(const StageSetup& s,
                               const QuadratureSpec& spec = default_bler_quadrature())
{
    return stage_quadrature(s, LinearizationWindow<double>::from_packet(s.pkt), spec);
}

/// One-point midpoint rule: the stage BLER is the SINR CDF at beta.
inline double stage_riemann(const StageSetup& s)
{
    const double beta = s.pkt.beta();
    detail::check_ceiling(s, beta);
    return evaluate_cdf_product<double>(s.law, s.gain_at(beta));
}

// ---------------------------------------------------------------------------
// User-level average BLERs
// ---------------------------------------------------------------------------

struct EvalOptions {
    /// Map CeilingViolation to BLER = 1 instead of throwing.
    bool saturate = false;
    QuadratureSpec quadrature = default_bler_quadrature();
};

struct StageValue {
    double value = 1.0;
    bool saturated = false;
};

inline StageValue evaluate_stage(Tier tier, const StageSetup& s, const EvalOptions& opts = {})
{
    try {
        switch (tier) {
        case Tier::CLOSED_FORM: return {stage_closed<extended>(s), false};
        case Tier::QUADRATURE: return {stage_quadrature(s, opts.quadrature), false};
        case Tier::RIEMANN: return {stage_riemann(s), false};
        case Tier::MONTE_CARLO: break;
        }
    } catch (const CeilingViolation&) {
        if (!opts.saturate)
            throw;
        return {1.0, true};
    }
    throw DomainError("evaluate_stage: Monte Carlo is not a deterministic stage tier");
}

/// L's BLER given its stage BLERs: fail the SIC stage, or pass it and fail
/// its own message.
inline double compose_l(double stage_xH, double stage_xL)
{
    return stage_xH + (1.0 - stage_xH) * stage_xL;
}

inline BlerEstimate avg_bler_H(Tier tier, const SystemConfig& cfg, const Scheme& scheme,
                               const PowerSplit& split, const PacketSpec& pkt_H,
                               const EvalOptions& opts = {})
{
    const auto s = make_stage(Stage::H_OWN, cfg, scheme, split, pkt_H, pkt_H);
    const auto v = evaluate_stage(tier, s, opts);
    return BlerEstimate{v.value, tier, 0.0, v.saturated};
}

struct LBler {
    BlerEstimate total;
    double stage_xH = 1.0;
    double stage_xL = 1.0;
};

inline LBler avg_bler_L(Tier tier, const SystemConfig& cfg, const Scheme& scheme,
                        const PowerSplit& split, const PacketSpec& pkt_H, const PacketSpec& pkt_L,
                        const EvalOptions& opts = {})
{
    const auto sic = evaluate_stage(tier, make_stage(Stage::L_DECODE_H, cfg, scheme, split, pkt_H, pkt_L), opts);
    const auto own = evaluate_stage(tier, make_stage(Stage::L_OWN, cfg, scheme, split, pkt_H, pkt_L), opts);
    LBler out;
    out.stage_xH = sic.value;
    out.stage_xL = own.value;
    out.total = BlerEstimate{std::clamp(compose_l(sic.value, own.value), 0.0, 1.0), tier, 0.0,
                             sic.saturated || own.saturated};
    return out;
}

/// Closed-form average BLER at H (HCS and LCS share the structure; only the
/// branch count of the SH law differs).
inline BlerEstimate avg_bler_H_closed(const SystemConfig& cfg, const Scheme& scheme,
                                      const PowerSplit& split, const PacketSpec& pkt_H,
                                      const EvalOptions& opts = {})
{
    return avg_bler_H(Tier::CLOSED_FORM, cfg, scheme, split, pkt_H, opts);
}

inline LBler avg_bler_L_closed(const SystemConfig& cfg, const Scheme& scheme,
                               const PowerSplit& split, const PacketSpec& pkt_H,
                               const PacketSpec& pkt_L, const EvalOptions& opts = {})
{
    return avg_bler_L(Tier::CLOSED_FORM, cfg, scheme, split, pkt_H, pkt_L, opts);
}

inline BlerEstimate avg_bler_quadrature(Stage stage, const SystemConfig& cfg, const Scheme& scheme,
                                        const PowerSplit& split, const PacketSpec& pkt_H,
                                        const PacketSpec& pkt_L, const EvalOptions& opts = {})
{
    const auto v = evaluate_stage(Tier::QUADRATURE, make_stage(stage, cfg, scheme, split, pkt_H, pkt_L), opts);
    return BlerEstimate{v.value, Tier::QUADRATURE, 0.0, v.saturated};
}

} // namespace nomaspc
