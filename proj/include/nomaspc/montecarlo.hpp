#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "bler.hpp"
#include "errors.hpp"
#include "scheme_params.hpp"
#include "system.hpp"

namespace nomaspc {

/// Counter-free stream derivation: a SplitMix64 finalizer applied to
/// (seed, stream index) seeds one mt19937_64 per stream.  Both algorithms
/// are fully specified, so draws are identical on every platform.
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

class RandomStream {
public:
    static constexpr const char* kGeneratorName = "mt19937_64+splitmix64-streams";

    RandomStream(std::uint64_t seed, std::uint64_t stream)
        : engine_(splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL)))
    {
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1).
    double uniform_open()
    {
        double u;
        do
            u = uniform();
        while (u == 0.0);
        return u;
    }

    /// Standard normal by the Marsaglia polar method.
    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double x, y, s;
        do {
            x = 2.0 * uniform() - 1.0;
            y = 2.0 * uniform() - 1.0;
            s = x * x + y * y;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = y * f;
        has_spare_ = true;
        return x * f;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Gamma(shape, scale) by Marsaglia-Tsang squeeze/rejection.  Shapes below
/// one are boosted via Gamma(shape+1) * U^{1/shape}.
inline double sample_gamma(double shape, double scale, RandomStream& rng)
{
    if (!(shape > 0.0) || !(scale > 0.0))
        throw DomainError("sample_gamma: shape and scale must be positive");
    if (shape < 1.0) {
        const double boost = std::pow(rng.uniform_open(), 1.0 / shape);
        return sample_gamma(shape + 1.0, scale, rng) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform_open();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2)
            return d * v * scale;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
            return d * v * scale;
    }
}

/// Sum of `branches` i.i.d. squared Nakagami-m gains of mean lambda.
inline double sample_link_gain(double m, double lambda, int branches, RandomStream& rng)
{
    if (!(m > 0.5) || !(lambda > 0.0) || branches < 1)
        throw DomainError("sample_link_gain: need m > 0.5, lambda > 0, branches >= 1");
    return sample_gamma(m * branches, lambda / m, rng);
}

struct SelectedGains {
    double g_SH = 0.0;
    double g_SL = 0.0;
};

namespace detail {

inline double max_of_draws(const EffectiveOrderParams& law, RandomStream& rng)
{
    const int branches = law.b / law.m;
    double best = 0.0;
    for (int i = 0; i < law.a; ++i)
        best = std::max(best, sample_link_gain(law.m, law.lambda, branches, rng));
    return best;
}

/// Full gain tensor for one cluster: [transmit][user][receive antenna].
struct ClusterGains {
    int K_S = 1, users = 1, K_U = 1;
    std::vector<double> g;

    double at(int k, int u, int r) const { return g[static_cast<std::size_t>((k * users + u) * K_U + r)]; }

    double combined(int k, int u, Diversity div) const
    {
        double out = 0.0;
        for (int r = 0; r < K_U; ++r)
            out = div == Diversity::TAS_SC ? std::max(out, at(k, u, r)) : out + at(k, u, r);
        return out;
    }
};

inline ClusterGains draw_cluster(int K_S, int users, int K_U, int m, double lambda, RandomStream& rng)
{
    ClusterGains c{K_S, users, K_U, {}};
    c.g.resize(static_cast<std::size_t>(K_S * users * K_U));
    for (auto& x : c.g)
        x = sample_link_gain(m, lambda, 1, rng);
    return c;
}

/// Literal selection: the jointly optimized cluster picks (antenna, user)
/// by argmax over everything, the other cluster picks its best user for
/// that antenna.  Ties go to the lowest index.
inline SelectedGains select_literal(const SystemConfig& cfg, Method method, Diversity div, RandomStream& rng)
{
    const auto H = draw_cluster(cfg.K_S, cfg.I, cfg.K_H, cfg.m_H, cfg.lambda_SH(), rng);
    const auto L = draw_cluster(cfg.K_S, cfg.J, cfg.K_L, cfg.m_L, cfg.lambda_SL(), rng);
    const auto& lead = method == Method::HCS ? H : L;
    const auto& follow = method == Method::HCS ? L : H;

    int k_hat = 0;
    double lead_gain = -1.0;
    for (int k = 0; k < lead.K_S; ++k)
        for (int u = 0; u < lead.users; ++u) {
            const double g = lead.combined(k, u, div);
            if (g > lead_gain) {
                lead_gain = g;
                k_hat = k;
            }
        }
    double follow_gain = -1.0;
    for (int u = 0; u < follow.users; ++u)
        follow_gain = std::max(follow_gain, follow.combined(k_hat, u, div));

    if (method == Method::HCS)
        return {lead_gain, follow_gain};
    return {follow_gain, lead_gain};
}

} // namespace detail

/// Selected gains under HCS.  The L cluster sees the chosen antenna as a
/// uniformly random one, and its gains are independent of H's, so fresh
/// draws give the exact joint law.
inline SelectedGains select_hcs(const SystemConfig& cfg, Diversity div, RandomStream& rng)
{
    const auto h = effective_params(cfg, SchemeSelect{Method::HCS, div, Link::SH});
    const auto l = effective_params(cfg, SchemeSelect{Method::HCS, div, Link::SL});
    const double g_SH = detail::max_of_draws(h, rng);
    const double g_SL = detail::max_of_draws(l, rng);
    return {g_SH, g_SL};
}

inline SelectedGains select_lcs(const SystemConfig& cfg, Diversity div, RandomStream& rng)
{
    const auto h = effective_params(cfg, SchemeSelect{Method::LCS, div, Link::SH});
    const auto l = effective_params(cfg, SchemeSelect{Method::LCS, div, Link::SL});
    const double g_SL = detail::max_of_draws(l, rng);
    const double g_SH = detail::max_of_draws(h, rng);
    return {g_SH, g_SL};
}

enum class SelectionMode { SHORTCUT, LITERAL };

inline SelectedGains select_gains(const SystemConfig& cfg, const Scheme& scheme, SelectionMode mode,
                                  RandomStream& rng)
{
    if (mode == SelectionMode::LITERAL)
        return detail::select_literal(cfg, scheme.method, scheme.diversity, rng);
    return scheme.method == Method::HCS ? select_hcs(cfg, scheme.diversity, rng)
                                        : select_lcs(cfg, scheme.diversity, rng);
}

struct SimPlan {
    std::uint64_t trials = 1000000;
    std::uint64_t seed = 1;
    std::uint64_t batch = 10000;
    Dispersion dispersion_mode = Dispersion::REDUCED;
    unsigned workers = 1;
    SelectionMode selection = SelectionMode::SHORTCUT;

    void validate() const
    {
        if (trials < 1 || batch < 1 || batch > trials)
            throw ConfigError("SimPlan: need trials >= 1 and 1 <= batch <= trials");
        if (workers < 1)
            throw ConfigError("SimPlan: workers must be >= 1");
    }

    std::uint64_t batch_count() const { return (trials + batch - 1) / batch; }
};

struct McValue {
    double value = 0.0;
    /// 95% normal-approximation half-width from the batch means.
    double ci = 0.0;
};

struct MonteCarloReport {
    McValue bler_H;
    McValue bler_L_xH;
    McValue bler_L_xL;
    /// Per-trial composition of the two L stages.
    McValue bler_L;
    /// Stage means composed after averaging, the quantity the closed form
    /// evaluates.  CI by first-order propagation of the stage CIs.
    McValue bler_L_staged;
    std::uint64_t trials_used = 0;
    std::uint64_t seed = 0;
    std::string generator = RandomStream::kGeneratorName;
};

/// Draws `count` selected-gain pairs (used for CDF checks).
inline std::vector<SelectedGains> draw_selected_gains(const SystemConfig& cfg, const Scheme& scheme,
                                                      std::uint64_t count, std::uint64_t seed,
                                                      SelectionMode mode = SelectionMode::SHORTCUT)
{
    cfg.validate();
    RandomStream rng(seed, 0);
    std::vector<SelectedGains> out(static_cast<std::size_t>(count));
    for (auto& g : out)
        g = select_gains(cfg, scheme, mode, rng);
    return out;
}

/// Kolmogorov-Smirnov distance between the empirical law of `samples` and
/// `cdf`.  `samples` is sorted in place.
template <class Cdf>
double ks_distance(std::vector<double>& samples, const Cdf& cdf)
{
    if (samples.empty())
        throw DomainError("ks_distance: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double F = cdf(samples[i]);
        worst = std::max({worst, std::abs(F - i / n), std::abs(F - (i + 1) / n)});
    }
    return worst;
}

namespace detail {

struct BatchSums {
    std::uint64_t n = 0;
    double h = 0.0, l_xh = 0.0, l_xl = 0.0, l = 0.0;
};

inline BatchSums run_batch(const SystemConfig& cfg, const Scheme& scheme, const PowerSplit& split,
                           const PacketSpec& pkt_H, const PacketSpec& pkt_L, const SimPlan& plan,
                           std::uint64_t index)
{
    RandomStream rng(plan.seed, index);
    const std::uint64_t begin = index * plan.batch;
    const std::uint64_t n = std::min(plan.batch, plan.trials - begin);
    CompensatedSum<double> h, lxh, lxl, l;
    for (std::uint64_t t = 0; t < n; ++t) {
        const auto g = select_gains(cfg, scheme, plan.selection, rng);
        const double e_h = instantaneous_bler(sinr_user_h(g.g_SH, split, cfg.gamma0), pkt_H, plan.dispersion_mode);
        const double e_lxh = instantaneous_bler(sinr_user_l_decode_h(g.g_SL, split, cfg.gamma0), pkt_H, plan.dispersion_mode);
        const double e_lxl = instantaneous_bler(snr_user_l_own(g.g_SL, split, cfg.gamma0), pkt_L, plan.dispersion_mode);
        h.add(e_h);
        lxh.add(e_lxh);
        lxl.add(e_lxl);
        l.add(compose_l(e_lxh, e_lxl));
    }
    return BatchSums{n, h.value(), lxh.value(), lxl.value(), l.value()};
}

inline McValue batch_estimate(const std::vector<BatchSums>& batches, double BatchSums::*field,
                              std::uint64_t trials)
{
    CompensatedSum<double> total;
    for (const auto& b : batches)
        total.add(b.*field);
    const double mean = total.value() / static_cast<double>(trials);
    const std::size_t nb = batches.size();
    double ci = 0.0;
    if (nb >= 2) {
        CompensatedSum<double> dev;
        for (const auto& b : batches) {
            const double w = static_cast<double>(b.n) / static_cast<double>(trials);
            const double d = b.*field / static_cast<double>(b.n) - mean;
            dev.add(w * w * d * d);
        }
        const double var = dev.value() * static_cast<double>(nb) / static_cast<double>(nb - 1);
        ci = 1.959963984540054 * std::sqrt(var);
    }
    return McValue{std::clamp(mean, 0.0, 1.0), ci};
}

} // namespace detail

/// Link-level simulation of both users.  Batches own their random streams
/// and are reduced in batch order, so the report depends only on the plan,
/// not on the number of workers.
inline MonteCarloReport run(const SystemConfig& cfg, const Scheme& scheme, const PowerSplit& split,
                            const PacketSpec& pkt_H, const PacketSpec& pkt_L, const SimPlan& plan)
{
    cfg.validate();
    plan.validate();
    const std::uint64_t nb = plan.batch_count();
    std::vector<detail::BatchSums> batches(static_cast<std::size_t>(nb));

    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(plan.workers, nb));
    if (workers <= 1) {
        for (std::uint64_t b = 0; b < nb; ++b)
            batches[b] = detail::run_batch(cfg, scheme, split, pkt_H, pkt_L, plan, b);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::uint64_t b = w; b < nb; b += workers)
                    batches[b] = detail::run_batch(cfg, scheme, split, pkt_H, pkt_L, plan, b);
            });
        for (auto& t : pool)
            t.join();
    }

    MonteCarloReport r;
    r.trials_used = plan.trials;
    r.seed = plan.seed;
    r.bler_H = detail::batch_estimate(batches, &detail::BatchSums::h, plan.trials);
    r.bler_L_xH = detail::batch_estimate(batches, &detail::BatchSums::l_xh, plan.trials);
    r.bler_L_xL = detail::batch_estimate(batches, &detail::BatchSums::l_xl, plan.trials);
    r.bler_L = detail::batch_estimate(batches, &detail::BatchSums::l, plan.trials);
    const double a = r.bler_L_xH.value;
    const double b = r.bler_L_xL.value;
    r.bler_L_staged.value = std::clamp(compose_l(a, b), 0.0, 1.0);
    r.bler_L_staged.ci = std::hypot((1.0 - b) * r.bler_L_xH.ci, (1.0 - a) * r.bler_L_xL.ci);
    return r;
}

} // namespace nomaspc
