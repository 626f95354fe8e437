#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "bler.hpp"
#include "errors.hpp"
#include "scheme_params.hpp"
#include "specfun.hpp"
#include "system.hpp"

namespace nomaspc {

/// High-SNR constants that turn reliability targets into SINR thresholds.
/// All of them come from inverting the asymptotic BLER power laws.
struct BlocklengthConstants {
    int D_H = 1;
    int D_L = 1;
    double log_eta_H = 0.0;
    double log_eta_L = 0.0;
    double log_eta_hat_L = 0.0;
    double gamma0 = 1.0;

    static BlocklengthConstants from(const SystemConfig& cfg, const Scheme& scheme)
    {
        cfg.validate();
        const auto h = effective_params(cfg, SchemeSelect{scheme.method, scheme.diversity, Link::SH});
        const auto l = effective_params(cfg, SchemeSelect{scheme.method, scheme.diversity, Link::SL});
        BlocklengthConstants k;
        k.D_H = h.diversity_exponent();
        k.D_L = l.diversity_exponent();
        k.gamma0 = cfg.gamma0;
        const double lf_bH = log_factorial<double>(h.b);
        const double lf_bL = log_factorial<double>(l.b);
        k.log_eta_H = k.D_H * (std::log(h.m) - std::log(h.lambda) - std::log(cfg.gamma0)) - h.a * lf_bH;
        k.log_eta_L = (static_cast<double>(k.D_L) / h.b) * lf_bH - l.a * lf_bL +
                      k.D_L * (std::log(l.m) + std::log(h.lambda) - std::log(h.m) - std::log(l.lambda));
        k.log_eta_hat_L = k.D_L * (std::log(l.m) - std::log(l.lambda)) - l.a * lf_bL;
        return k;
    }

    double eta_H() const { return std::exp(log_eta_H); }
    double eta_L() const { return std::exp(log_eta_L); }
    double eta_hat_L() const { return std::exp(log_eta_hat_L); }

    /// SINR-domain threshold for H: (eps_H / eta_H)^{1/D_H}.
    double tau_H(const ReliabilityTargets& t) const
    {
        return std::exp((std::log(t.eps_H) - log_eta_H) / D_H);
    }

    /// Budget left for L's own stage once the SIC stage consumes its share
    /// of eps_L.
    double l_budget(const ReliabilityTargets& t) const
    {
        const double sic_share = std::exp(log_eta_L + (static_cast<double>(D_L) / D_H) * std::log(t.eps_H));
        return t.eps_L - sic_share;
    }

    double tau_L(const ReliabilityTargets& t) const
    {
        const double budget = l_budget(t);
        if (!(budget > 0.0))
            throw InfeasibleTargets("L target " + format_number(t.eps_L) +
                                    " is consumed by the SIC stage at H target " +
                                    format_number(t.eps_H) + " (budget " + format_number(budget) + ")");
        return gamma0 * std::exp((std::log(budget) - log_eta_hat_L) / D_L);
    }

    /// tau_L under OMA, where L is served alone at full power.
    double tau_L_oma(const ReliabilityTargets& t) const
    {
        return gamma0 * std::exp((std::log(t.eps_L) - log_eta_hat_L) / D_L);
    }
};

inline double blocklength_H(double alpha_L, const BlocklengthConstants& k,
                            const ReliabilityTargets& targets, double n_H)
{
    if (!(alpha_L >= 0.0 && alpha_L <= 0.5))
        throw DomainError("blocklength_H: alpha_L must lie in [0, 0.5]");
    const double tau = k.tau_H(targets);
    return n_H / std::log2((1.0 + tau) / (1.0 + alpha_L * tau));
}

inline double blocklength_L(double alpha_L, const BlocklengthConstants& k,
                            const ReliabilityTargets& targets, double n_L)
{
    if (!(alpha_L >= 0.0 && alpha_L <= 0.5))
        throw DomainError("blocklength_L: alpha_L must lie in [0, 0.5]");
    const double tau = k.tau_L(targets);
    if (alpha_L == 0.0)
        return std::numeric_limits<double>::infinity();
    return n_L / std::log2(1.0 + alpha_L * tau);
}

inline double blocklength_H(double alpha_L, const SystemConfig& cfg, const Scheme& scheme,
                            const ReliabilityTargets& targets, double n_H)
{
    return blocklength_H(alpha_L, BlocklengthConstants::from(cfg, scheme), targets, n_H);
}

inline double blocklength_L(double alpha_L, const SystemConfig& cfg, const Scheme& scheme,
                            const ReliabilityTargets& targets, double n_L)
{
    return blocklength_L(alpha_L, BlocklengthConstants::from(cfg, scheme), targets, n_L);
}

struct OptimizerSettings {
    double tol = 1e-9;
    int max_iter = 200;
};

enum class OptimizationStatus { CONVERGED, NO_SIGN_CHANGE };

inline std::string_view to_string(OptimizationStatus s)
{
    return s == OptimizationStatus::CONVERGED ? "converged" : "no_sign_change";
}

struct OptimizationResult {
    double alpha_L_opt = 0.0;
    double N_opt = 0.0;
    long long N_opt_int = 0;
    int iterations = 0;
    double residual = 0.0;
    bool feasible = false;
    OptimizationStatus status = OptimizationStatus::CONVERGED;
    double N_H = 0.0;
    double N_L = 0.0;
};

/// Equalizes N_L(alpha) and N_H(alpha) by bisection on (0, 0.5).
///
/// f = N_L - N_H runs from +inf at alpha -> 0 downwards, so the lower end
/// carries sign +1 without being evaluated.  If f is still positive at 0.5
/// the equalizing split lies outside the admissible range.
inline OptimizationResult optimize_alpha(const SystemConfig& cfg, const Scheme& scheme,
                                         const ReliabilityTargets& targets, double n_H, double n_L,
                                         const OptimizerSettings& settings = {})
{
    targets.validate();
    if (!(settings.tol > 0.0) || settings.max_iter < 1)
        throw ConfigError("optimize_alpha: tol must be > 0 and max_iter >= 1");
    const auto k = BlocklengthConstants::from(cfg, scheme);
    k.tau_L(targets);

    auto f = [&](double alpha) {
        return blocklength_L(alpha, k, targets, n_L) - blocklength_H(alpha, k, targets, n_H);
    };

    OptimizationResult out;
    const double f_top = f(0.5);
    if (f_top > 0.0) {
        out.status = OptimizationStatus::NO_SIGN_CHANGE;
        out.feasible = false;
        out.alpha_L_opt = 0.5;
        out.residual = f_top;
        out.N_H = blocklength_H(0.5, k, targets, n_H);
        out.N_L = blocklength_L(0.5, k, targets, n_L);
        return out;
    }

    double lo = 0.0;
    double hi = 0.5;
    double sign_lo = 1.0;
    double mid = 0.5 * (lo + hi);
    double f_mid = f(mid);
    int iter = 0;
    while (std::abs(f_mid) > settings.tol) {
        if (iter >= settings.max_iter)
            throw MaxIterations("optimize_alpha: |f| = " + format_number(std::abs(f_mid)) +
                                " after " + std::to_string(iter) + " iterations");
        if (f_mid * sign_lo > 0.0)
            lo = mid;
        else
            hi = mid;
        mid = 0.5 * (lo + hi);
        f_mid = f(mid);
        ++iter;
    }

    out.alpha_L_opt = mid;
    out.iterations = iter;
    out.residual = std::abs(f_mid);
    out.feasible = true;
    out.N_H = blocklength_H(mid, k, targets, n_H);
    out.N_L = blocklength_L(mid, k, targets, n_L);
    out.N_opt = out.N_H;
    out.N_opt_int = static_cast<long long>(std::ceil(out.N_opt));
    return out;
}

struct OmaBlocklength {
    double N_H = 0.0;
    double N_L = 0.0;
    double total() const { return N_H + N_L; }
};

/// Orthogonal baseline: each user served alone at full power.
inline OmaBlocklength oma_blocklength(const SystemConfig& cfg, const Scheme& scheme,
                                      const ReliabilityTargets& targets, double n_H, double n_L)
{
    targets.validate();
    const auto k = BlocklengthConstants::from(cfg, scheme);
    OmaBlocklength out;
    out.N_H = n_H / std::log2(1.0 + k.tau_H(targets));
    out.N_L = n_L > 0.0 ? n_L / std::log2(1.0 + k.tau_L_oma(targets)) : 0.0;
    return out;
}

} // namespace nomaspc
