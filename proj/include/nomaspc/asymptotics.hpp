#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "bler.hpp"
#include "errors.hpp"
#include "scheme_params.hpp"
#include "specfun.hpp"
#include "system.hpp"

namespace nomaspc {

struct DiversityReport {
    int D_H = 1;
    int D_L = 1;
    Method method = Method::HCS;
};

/// Diversity orders at both users.  TAS/SC and TAS/MRC share them, so the
/// SC laws are used to form a*b.
inline DiversityReport diversity_order(const SystemConfig& cfg, Method method)
{
    const auto h = effective_params(cfg, SchemeSelect{method, Diversity::TAS_SC, Link::SH});
    const auto l = effective_params(cfg, SchemeSelect{method, Diversity::TAS_SC, Link::SL});
    return DiversityReport{h.diversity_exponent(), l.diversity_exponent(), method};
}

/// Stage BLER evaluated as the SINR CDF at the rate threshold.
inline BlerEstimate riemann_bler(Stage stage, const SystemConfig& cfg, const Scheme& scheme,
                                 const PowerSplit& split, const PacketSpec& pkt_H,
                                 const PacketSpec& pkt_L, const EvalOptions& opts = {})
{
    const auto v = evaluate_stage(Tier::RIEMANN, make_stage(stage, cfg, scheme, split, pkt_H, pkt_L), opts);
    return BlerEstimate{v.value, Tier::RIEMANN, 0.0, v.saturated};
}

/// Leading small-x term of the selection CDF, (m x/lambda)^{ab} / (b!)^a.
inline double asymptotic_cdf(const EffectiveOrderParams& law, double x)
{
    if (x < 0.0)
        throw DomainError("asymptotic_cdf: x must be nonnegative");
    if (x == 0.0)
        return 0.0;
    const double log_val = law.diversity_exponent() * std::log(law.rate() * x) -
                           law.a * log_factorial<double>(law.b);
    return std::exp(log_val);
}

namespace detail {

inline double asymptotic_stage(const StageSetup& s)
{
    const double beta = s.pkt.beta();
    if (s.interference_limited() && !(beta < s.split.ceiling()))
        throw CeilingViolation("rate threshold beta reaches the ceiling alpha_H/alpha_L");
    return asymptotic_cdf(s.law, s.gain_at(beta));
}

} // namespace detail

/// High-SNR power law of the H user's BLER.
inline double asymptotic_bler_H(const SystemConfig& cfg, const Scheme& scheme,
                                const PowerSplit& split, const PacketSpec& pkt_H)
{
    return detail::asymptotic_stage(make_stage(Stage::H_OWN, cfg, scheme, split, pkt_H, pkt_H));
}

/// High-SNR power law of the L user's BLER: the SIC-stage and own-message
/// power laws added, the product term neglected.
inline double asymptotic_bler_L(const SystemConfig& cfg, const Scheme& scheme,
                                const PowerSplit& split, const PacketSpec& pkt_H,
                                const PacketSpec& pkt_L)
{
    const double sic = detail::asymptotic_stage(make_stage(Stage::L_DECODE_H, cfg, scheme, split, pkt_H, pkt_L));
    const double own = detail::asymptotic_stage(make_stage(Stage::L_OWN, cfg, scheme, split, pkt_H, pkt_L));
    return sic + own;
}

struct SlopeFit {
    double slope = 0.0;
    double lo_db = 0.0;
    double hi_db = 0.0;
    int points = 0;
    bool found = false;
};

/// Least-squares slope of log10(y) against log10(gamma0) = dB/10.
inline double loglog_slope(const std::vector<double>& db, const std::vector<double>& y)
{
    if (db.size() != y.size() || db.size() < 2)
        throw DomainError("loglog_slope: need at least two matching points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(db.size());
    for (std::size_t i = 0; i < db.size(); ++i) {
        if (!(y[i] > 0.0))
            throw DomainError("loglog_slope: values must be positive");
        const double x = db[i] / 10.0;
        const double ly = std::log10(y[i]);
        sx += x;
        sy += ly;
        sxx += x * x;
        sxy += x * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Slope over the highest-SNR decade whose BLER stays inside
/// [floor, ceiling] (defaults 1e-12 and 1e-3), sampled every `step_db`.
inline SlopeFit high_snr_slope(const std::function<double(double)>& bler_at_db, double start_db,
                               double stop_db, double step_db = 1.0, double floor = 1e-12,
                               double ceiling = 1e-3)
{
    if (!(step_db > 0.0) || !(stop_db > start_db))
        throw DomainError("high_snr_slope: invalid dB grid");
    std::vector<double> grid;
    std::vector<double> values;
    for (int i = 0;; ++i) {
        const double db = start_db + i * step_db;
        if (db > stop_db + 1e-9)
            break;
        grid.push_back(db);
        values.push_back(bler_at_db(db));
    }
    const int per_decade = static_cast<int>(std::lround(10.0 / step_db));
    SlopeFit fit;
    for (int hi = static_cast<int>(grid.size()) - 1; hi - per_decade >= 0; --hi) {
        const int lo = hi - per_decade;
        bool clean = true;
        for (int i = lo; i <= hi; ++i)
            clean = clean && values[static_cast<std::size_t>(i)] >= floor &&
                    values[static_cast<std::size_t>(i)] <= ceiling;
        if (!clean)
            continue;
        std::vector<double> xs(grid.begin() + lo, grid.begin() + hi + 1);
        std::vector<double> ys(values.begin() + lo, values.begin() + hi + 1);
        fit.slope = loglog_slope(xs, ys);
        fit.lo_db = grid[static_cast<std::size_t>(lo)];
        fit.hi_db = grid[static_cast<std::size_t>(hi)];
        fit.points = per_decade + 1;
        fit.found = true;
        return fit;
    }
    return fit;
}

} // namespace nomaspc
