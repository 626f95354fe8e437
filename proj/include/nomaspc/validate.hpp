#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "bler.hpp"
#include "montecarlo.hpp"
#include "scenario.hpp"
#include "scheme_params.hpp"
#include "sweep.hpp"

namespace nomaspc {

struct CheckResult {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::string detail;
};

struct ValidationReport {
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;

    bool all_pass() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
    }
};

/// Relative difference with an absolute floor for tiny values.
inline bool tier_close(double a, double b, double rel, double abs_floor, double floor_below)
{
    const double diff = std::abs(a - b);
    if (std::max(std::abs(a), std::abs(b)) < floor_below)
        return diff <= abs_floor;
    return diff <= rel * std::max(std::abs(a), std::abs(b));
}

/// Largest |F_expansion - F_product| on a 50-point log grid spanning the
/// bulk of the law.
inline double max_product_form_gap(const EffectiveOrderParams& law)
{
    const auto exp = build_cdf_expansion<double>(law);
    const double mean = law.b / law.rate();
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double x = mean * std::pow(10.0, -3.0 + 4.0 * i / 49.0);
        worst = std::max(worst, std::abs(evaluate_cdf(exp, x) - evaluate_cdf_product<double>(law, x)));
    }
    return worst;
}

/// KS distance of each of the four selection laws of a scheme against its
/// term expansion, from one shared draw of `trials` selected pairs.
inline std::vector<std::pair<Link, double>> selection_ks(const SystemConfig& cfg, const Scheme& scheme,
                                                         std::uint64_t trials, std::uint64_t seed,
                                                         SelectionMode mode = SelectionMode::SHORTCUT)
{
    const auto draws = draw_selected_gains(cfg, scheme, trials, seed, mode);
    std::vector<std::pair<Link, double>> out;
    for (Link link : {Link::SH, Link::SL}) {
        std::vector<double> xs;
        xs.reserve(draws.size());
        for (const auto& d : draws)
            xs.push_back(link == Link::SH ? d.g_SH : d.g_SL);
        const auto law = effective_params(cfg, SchemeSelect{scheme.method, scheme.diversity, link});
        const auto exp = build_cdf_expansion<double>(law);
        out.emplace_back(link, ks_distance(xs, [&](double x) { return evaluate_cdf(exp, x); }));
    }
    return out;
}

/// Oracle-triangle and CDF suites on the first case of a scenario.
inline ValidationReport run_validation(const Scenario& sc)
{
    ValidationReport rep;
    rep.seed = sc.plan.seed;
    const Setup& base = sc.cases.front().second;
    const auto schemes = sc.schemes();
    const std::uint64_t cdf_trials = sc.plan.trials;

    for (const auto& scheme : schemes) {
        const std::string tag = csv_name(scheme.method) + "/" + csv_name(scheme.diversity);
        for (const auto& [link, ks] : selection_ks(base.cfg, scheme, cdf_trials, sc.plan.seed)) {
            rep.checks.push_back({"cdf_ks " + tag + " " + std::string(to_string(link)), ks, 0.005,
                                  ks <= 0.005, std::to_string(cdf_trials) + " draws"});
        }
        for (Link link : {Link::SH, Link::SL}) {
            const auto law = effective_params(base.cfg, SchemeSelect{scheme.method, scheme.diversity, link});
            const double gap = max_product_form_gap(law);
            rep.checks.push_back({"cdf_product " + tag + " " + std::string(to_string(link)), gap, 1e-9,
                                  gap <= 1e-9, "50-point log grid"});
        }
    }

    std::vector<std::vector<double>> closed_H(schemes.size()), closed_L(schemes.size());
    for (std::size_t si = 0; si < schemes.size(); ++si) {
        const auto& scheme = schemes[si];
        const std::string tag = csv_name(scheme.method) + "/" + csv_name(scheme.diversity);
        double worst_tier = 0.0;
        bool tier_ok = true;
        double worst_mc = 0.0;
        bool mc_ok = true;
        bool comp_ok = true;
        for (double v : sc.sweep.grid) {
            Setup s = base;
            apply_parameter(s, sc.sweep.parameter, v);
            const auto c = evaluate_bler_point(s, scheme, "closed", sc.plan);
            const auto q = evaluate_bler_point(s, scheme, "quadrature", sc.plan);
            closed_H[si].push_back(c.bler_H);
            closed_L[si].push_back(c.bler_L);
            for (auto [a, b] : {std::pair{c.bler_H, q.bler_H}, std::pair{c.bler_L, q.bler_L}}) {
                tier_ok = tier_ok && tier_close(a, b, 1e-8, 1e-12, 1e-10);
                if (std::max(a, b) > 0.0)
                    worst_tier = std::max(worst_tier, std::abs(a - b) / std::max(a, b));
            }
            const auto split = PowerSplit(s.alpha_L);
            const auto l = avg_bler_L(Tier::CLOSED_FORM, s.cfg, scheme, split, s.pkt_H, s.pkt_L, EvalOptions{true, {}});
            comp_ok = comp_ok && l.total.value >= l.stage_xH;

            const auto r = run(s.cfg, scheme, split, s.pkt_H, s.pkt_L, sc.plan);
            for (auto [mc, ci, ref] : {std::tuple{r.bler_H.value, r.bler_H.ci, c.bler_H},
                                       std::tuple{r.bler_L.value, r.bler_L.ci, c.bler_L}}) {
                if (ref < 1e-6)
                    continue;
                const double diff = std::abs(mc - ref);
                const double allowed = std::max(3.0 * ci, 0.05 * ref);
                mc_ok = mc_ok && diff <= allowed;
                worst_mc = std::max(worst_mc, diff / allowed);
            }
        }
        rep.checks.push_back({"tier_agreement " + tag, worst_tier, 1e-8, tier_ok, "closed vs quadrature"});
        rep.checks.push_back({"mc_vs_closed " + tag, worst_mc, 1.0, mc_ok,
                              "|diff| / max(3 CI, 5%) where BLER >= 1e-6"});
        rep.checks.push_back({"l_composition_bound " + tag, comp_ok ? 0.0 : 1.0, 0.0, comp_ok,
                              "L BLER >= SIC-stage BLER"});

        bool mono = true;
        for (std::size_t i = 1; i < closed_H[si].size(); ++i)
            mono = mono && closed_H[si][i] <= closed_H[si][i - 1] && closed_L[si][i] <= closed_L[si][i - 1];
        if (sc.sweep.parameter == "gamma0_db")
            rep.checks.push_back({"monotone_in_snr " + tag, mono ? 0.0 : 1.0, 0.0, mono, "closed form"});
    }

    auto index_of = [&](Method m, Diversity d) -> long {
        for (std::size_t i = 0; i < schemes.size(); ++i)
            if (schemes[i].method == m && schemes[i].diversity == d)
                return static_cast<long>(i);
        return -1;
    };
    for (Diversity d : {Diversity::TAS_SC, Diversity::TAS_MRC}) {
        const long h = index_of(Method::HCS, d);
        const long l = index_of(Method::LCS, d);
        if (h < 0 || l < 0)
            continue;
        bool ok = true;
        for (std::size_t i = 0; i < sc.sweep.grid.size(); ++i) {
            ok = ok && closed_H[h][i] <= closed_H[l][i] * (1.0 + 1e-12);
            ok = ok && closed_L[l][i] <= closed_L[h][i] * (1.0 + 1e-12);
        }
        rep.checks.push_back({"method_ordering " + csv_name(d), ok ? 0.0 : 1.0, 0.0, ok,
                              "HCS best for H, LCS best for L"});
    }
    return rep;
}

inline void print_validation(std::ostream& out, const ValidationReport& rep)
{
    out << "seed " << rep.seed << " generator " << RandomStream::kGeneratorName << "\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-36s %-14s %-12s %s\n", "check", "measured", "threshold", "result");
    out << line;
    for (const auto& c : rep.checks) {
        std::snprintf(line, sizeof line, "%-36s %-14.6g %-12.3g %s  (%s)\n", c.name.c_str(), c.measured,
                      c.threshold, c.pass ? "PASS" : "FAIL", c.detail.c_str());
        out << line;
    }
    out << (rep.all_pass() ? "all checks passed\n" : "some checks failed\n");
}

} // namespace nomaspc
