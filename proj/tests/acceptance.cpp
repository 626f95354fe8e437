// Acceptance gate: one PASS/FAIL line per criterion.  Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "nomaspc/nomaspc.hpp"

using namespace nomaspc;

namespace {

constexpr double kTierRel = 1e-8;
constexpr double kMcFloor = 1e-6;
constexpr double kMcCiMult = 3.0;
constexpr double kMcRel = 0.05;
constexpr std::uint64_t kMcTrials = 1000000;
constexpr double kKsMax = 0.005;
constexpr std::uint64_t kKsDraws = 1000000;
constexpr double kProductGap = 1e-9;
constexpr double kSlopeRel = 0.10;
constexpr double kDegenerateRel = 1e-12;
constexpr int kOptMaxIter = 60;
constexpr double kOptResidual = 1e-9;
constexpr int kScanPoints = 10000;
constexpr double kOmaTrackRel = 0.15;
constexpr double kRayleighRel = 1e-10;

const Scheme kAll[] = {{Method::HCS, Diversity::TAS_SC}, {Method::HCS, Diversity::TAS_MRC},
                       {Method::LCS, Diversity::TAS_SC}, {Method::LCS, Diversity::TAS_MRC}};
const PacketSpec kPkt{80, 100.0};
const PowerSplit kSplit(0.3);
const ReliabilityTargets kTargets{1e-7, 1e-6};

int failures = 0;

void report(int id, bool pass, const std::string& what)
{
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, what.c_str());
    std::fflush(stdout);
    if (!pass)
        ++failures;
}

std::string fmt(const char* f, double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

std::string tag(const Scheme& s)
{
    return csv_name(s.method) + "/" + csv_name(s.diversity);
}

SystemConfig reference_setup(double db)
{
    SystemConfig c;
    c.gamma0 = db_to_linear(db);
    return c;
}

SystemConfig full_array(double db)
{
    SystemConfig c;
    c.K_S = c.K_H = c.K_L = c.I = c.J = 2;
    c.gamma0 = db_to_linear(db);
    return c;
}

double rel(double a, double b)
{
    const double m = std::max(std::abs(a), std::abs(b));
    return m == 0.0 ? 0.0 : std::abs(a - b) / m;
}

unsigned workers()
{
    return std::max(1u, std::thread::hardware_concurrency());
}

void criterion_1()
{
    const auto t0 = std::chrono::steady_clock::now();
    double worst_tier = 0.0;
    double worst_mc = 0.0;
    std::string worst_mc_at;
    int mc_points = 0, mc_bad = 0;
    SimPlan plan;
    plan.trials = kMcTrials;
    plan.seed = 1;
    plan.workers = workers();
    for (const auto& scheme : kAll)
        for (double db = 0; db <= 40; db += 5) {
            const auto cfg = reference_setup(db);
            for (Stage st : {Stage::H_OWN, Stage::L_DECODE_H, Stage::L_OWN}) {
                const auto s = make_stage(st, cfg, scheme, kSplit, kPkt, kPkt);
                worst_tier = std::max(worst_tier, rel(stage_closed(s), stage_quadrature(s)));
            }
            const double ch = avg_bler_H_closed(cfg, scheme, kSplit, kPkt).value;
            const double cl = avg_bler_L_closed(cfg, scheme, kSplit, kPkt, kPkt).total.value;
            const double qh = avg_bler_H(Tier::QUADRATURE, cfg, scheme, kSplit, kPkt).value;
            const double ql = avg_bler_L(Tier::QUADRATURE, cfg, scheme, kSplit, kPkt, kPkt).total.value;
            worst_tier = std::max({worst_tier, rel(ch, qh), rel(cl, ql)});

            const auto mc = run(cfg, scheme, kSplit, kPkt, kPkt, plan);
            const std::pair<const char*, std::pair<double, McValue>> users[] = {{"H", {ch, mc.bler_H}},
                                                                                {"L", {cl, mc.bler_L}}};
            for (const auto& [who, v] : users) {
                const auto& [ref, m] = v;
                if (ref < kMcFloor)
                    continue;
                ++mc_points;
                const double allowed = std::max(kMcCiMult * m.ci, kMcRel * ref);
                const double ratio = std::abs(m.value - ref) / allowed;
                if (ratio > 1.0)
                    ++mc_bad;
                if (ratio > worst_mc) {
                    worst_mc = ratio;
                    worst_mc_at = tag(scheme) + " " + who + " at " + fmt("%g", db) + " dB: closed " +
                                  fmt("%.4g", ref) + ", mc " + fmt("%.4g", m.value);
                }
            }
        }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(1, worst_tier <= kTierRel && mc_bad == 0,
           "closed vs quadrature max rel " + fmt("%.2e", worst_tier) + " (<= 1e-8); mc " +
               std::to_string(mc_points - mc_bad) + "/" + std::to_string(mc_points) +
               " points within max(3 CI, 5%), worst |diff|/allowed " + fmt("%.2f", worst_mc) + " (" +
               worst_mc_at + "); " + fmt("%.0f", secs) + " s");
}

void criterion_2()
{
    double worst_ks = 0.0, worst_gap = 0.0;
    for (const auto& scheme : kAll) {
        for (const auto& [link, ks] : selection_ks(reference_setup(20), scheme, kKsDraws, 2))
            worst_ks = std::max(worst_ks, ks);
        for (Link link : {Link::SH, Link::SL})
            worst_gap = std::max(worst_gap, max_product_form_gap(
                                                effective_params(reference_setup(20), {scheme.method, scheme.diversity, link})));
    }
    report(2, worst_ks <= kKsMax && worst_gap <= kProductGap,
           "8 laws: max KS " + fmt("%.4f", worst_ks) + " (<= 0.005, 1e6 draws); product vs expansion " +
               fmt("%.2e", worst_gap) + " (<= 1e-9)");
}

void criterion_3()
{
    bool ok = true;
    std::string detail;
    for (Method m : {Method::HCS, Method::LCS}) {
        const Scheme scheme{m, Diversity::TAS_SC};
        const auto d = diversity_order(reference_setup(0), m);
        const auto fh = high_snr_slope(
            [&](double db) { return avg_bler_H_closed(reference_setup(db), scheme, kSplit, kPkt).value; }, 0, 80);
        const auto fl = high_snr_slope(
            [&](double db) { return avg_bler_L_closed(reference_setup(db), scheme, kSplit, kPkt, kPkt).total.value; }, 0, 80);
        for (auto [who, fit, D] : {std::tuple{"H", fh, d.D_H}, std::tuple{"L", fl, d.D_L}}) {
            const bool good = fit.found && std::abs(fit.slope + D) <= kSlopeRel * D;
            ok = ok && good;
            detail += csv_name(m) + "-" + who + " " + fmt("%.3f", fit.slope) + " vs -" + std::to_string(D) + " [" +
                      fmt("%g", fit.lo_db) + "," + fmt("%g", fit.hi_db) + " dB]; ";
        }
    }
    report(3, ok, detail + "tolerance 10%");
}

void criterion_4()
{
    bool method_ok = true, mrc_ok = true;
    for (double db = 0; db <= 40; db += 5) {
        const auto cfg = reference_setup(db);
        auto H = [&](Method m, Diversity d) { return avg_bler_H_closed(cfg, {m, d}, kSplit, kPkt).value; };
        auto L = [&](Method m, Diversity d) { return avg_bler_L_closed(cfg, {m, d}, kSplit, kPkt, kPkt).total.value; };
        for (Diversity d : {Diversity::TAS_SC, Diversity::TAS_MRC}) {
            method_ok = method_ok && H(Method::HCS, d) <= H(Method::LCS, d);
            method_ok = method_ok && L(Method::LCS, d) <= L(Method::HCS, d);
        }
        for (Method m : {Method::HCS, Method::LCS}) {
            mrc_ok = mrc_ok && H(m, Diversity::TAS_MRC) <= H(m, Diversity::TAS_SC);
            mrc_ok = mrc_ok && L(m, Diversity::TAS_MRC) <= L(m, Diversity::TAS_SC);
        }
    }
    report(4, method_ok && mrc_ok,
           std::string("HCS best for H, LCS best for L: ") + (method_ok ? "yes" : "no") +
               "; TAS/MRC <= TAS/SC: " + (mrc_ok ? "yes" : "no") + " (0:5:40 dB)");
}

void criterion_5()
{
    double worst = 0.0;
    for (int m : {1, 2, 3})
        for (double db = 0; db <= 40; db += 5) {
            SystemConfig c = reference_setup(db);
            c.K_S = c.K_H = c.K_L = c.I = c.J = 1;
            c.m_H = c.m_L = m;
            for (Diversity d : {Diversity::TAS_SC, Diversity::TAS_MRC}) {
                worst = std::max(worst, rel(avg_bler_H_closed(c, {Method::HCS, d}, kSplit, kPkt).value,
                                            avg_bler_H_closed(c, {Method::LCS, d}, kSplit, kPkt).value));
                worst = std::max(worst, rel(avg_bler_L_closed(c, {Method::HCS, d}, kSplit, kPkt, kPkt).total.value,
                                            avg_bler_L_closed(c, {Method::LCS, d}, kSplit, kPkt, kPkt).total.value));
            }
        }
    report(5, worst <= kDegenerateRel, "all-ones HCS vs LCS max rel " + fmt("%.1e", worst) + " (<= 1e-12)");
}

void criterion_6()
{
    bool ok = true;
    int feasible = 0;
    std::string detail;
    const double cell = 0.5 / kScanPoints;
    for (const auto& scheme : kAll) {
        const auto k = BlocklengthConstants::from(full_array(20), scheme);
        bool mono_H = true;
        double prev_H = 0.0;
        for (int i = 1; i < kScanPoints; ++i) {
            const double h = blocklength_H(i * cell, k, kTargets, 80);
            mono_H = mono_H && h > prev_H;
            prev_H = h;
        }
        try {
            const auto r = optimize_alpha(full_array(20), scheme, kTargets, 80, 80);
            bool mono_L = true;
            double prev_L = INFINITY, scan = -1.0;
            for (int i = 1; i < kScanPoints; ++i) {
                const double a = i * cell;
                const double l = blocklength_L(a, k, kTargets, 80);
                mono_L = mono_L && l < prev_L;
                prev_L = l;
                if (scan < 0 && l - blocklength_H(a, k, kTargets, 80) <= 0.0)
                    scan = a;
            }
            const bool good = r.feasible && r.iterations <= kOptMaxIter && r.residual <= kOptResidual &&
                              scan > 0 && std::abs(r.alpha_L_opt - scan) <= cell && mono_H && mono_L;
            ok = ok && good;
            ++feasible;
            detail += tag(scheme) + " alpha " + fmt("%.6f", r.alpha_L_opt) + " N " + fmt("%.2f", r.N_opt) + " in " +
                      std::to_string(r.iterations) + " it, residual " + fmt("%.1e", r.residual) + ", scan " +
                      fmt("%.5f", scan) + "; ";
        } catch (const InfeasibleTargets&) {
            ok = ok && mono_H;
            detail += tag(scheme) + " infeasible (L budget " + fmt("%.3g", k.l_budget(kTargets)) + "); ";
        }
    }
    report(6, ok && feasible > 0, detail + "N_H up / N_L down on 1e4 grid");
}

void criterion_7()
{
    bool positive = true, tracks = true;
    int feasible = 0;
    double worst_track = 0.0;
    std::string sample;
    for (double db = 20; db <= 40; db += 2.5)
        for (const auto& scheme : kAll) {
            try {
                const auto r = optimize_alpha(full_array(db), scheme, kTargets, 80, 80);
                if (!r.feasible)
                    continue;
                const auto oma = oma_blocklength(full_array(db), scheme, kTargets, 80, 80);
                const double dN = oma.total() - r.N_opt;
                ++feasible;
                positive = positive && dN > 0.0;
                const double track = std::abs(dN - oma.N_H) / oma.N_H;
                tracks = tracks && track <= kOmaTrackRel;
                worst_track = std::max(worst_track, track);
                if (db == 20 && scheme.method == Method::LCS && scheme.diversity == Diversity::TAS_SC)
                    sample = "LCS/TAS_SC 20 dB: dN " + fmt("%.2f", dN) + " vs N_hat_H " + fmt("%.2f", oma.N_H);
            } catch (const InfeasibleTargets&) {
            }
        }
    report(7, feasible > 0 && positive && tracks,
           std::to_string(feasible) + " feasible points, dN > 0: " + (positive ? "yes" : "no") +
               "; |dN - N_hat_H|/N_hat_H worst " + fmt("%.3f", worst_track) + " (<= 0.15); " + sample);
}

using mp50 = boost::multiprecision::cpp_bin_float_50;

/// Rayleigh-only linearized stage integral, SC combining: F(g) = (1 - e^{-g/lambda})^a.
/// Each binomial term integrates in closed form through E_2 (interference
/// limited) or elementary exponentials (own stage).
mp50 rayleigh_stage(int a, double lambda, double gamma0, double alpha_L, bool interference, int n, double N)
{
    using std::exp;
    using std::sqrt;
    const mp50 r = mp50(n) / N;
    const mp50 beta = exp(r * log(mp50(2))) - 1;
    const mp50 chi = 1 / sqrt(2 * boost::math::constants::pi<mp50>() * (exp(2 * r * log(mp50(2))) - 1));
    const mp50 half = 1 / (2 * chi * sqrt(mp50(N)));
    const mp50 lo = std::max(mp50(beta - half), mp50(0)), hi = beta + half;
    const mp50 aL = alpha_L, aH = 1 - aL, g0 = gamma0, lam = lambda;
    mp50 sum = hi - lo;
    for (int k = 1; k <= a; ++k) {
        const mp50 sign = (k % 2) ? -1 : 1;
        const mp50 binom = boost::math::binomial_coefficient<mp50>(a, k);
        mp50 term;
        if (interference) {
            const mp50 c = k / (g0 * lam * aL);
            const mp50 t1 = aH / (aH - aL * lo), t2 = aH / (aH - aL * hi);
            term = aH / aL * exp(c) *
                   (boost::math::expint(2, c * t1) / t1 - boost::math::expint(2, c * t2) / t2);
        } else {
            const mp50 rate = k / (aL * g0 * lam);
            term = (exp(-rate * lo) - exp(-rate * hi)) / rate;
        }
        sum += sign * binom * term;
    }
    return chi * sqrt(mp50(N)) * sum;
}

void criterion_8()
{
    bool mono = true;
    std::string broken;
    double worst = 0.0;
    const double lambda = std::pow(5.0, -2.5);
    for (Method m : {Method::HCS, Method::LCS}) {
        const Scheme scheme{m, Diversity::TAS_SC};
        double prev_H = 2.0, prev_L = 2.0;
        for (int shape = 1; shape <= 4; ++shape) {
            SystemConfig c = reference_setup(20);
            c.m_H = c.m_L = shape;
            const double h = avg_bler_H_closed(c, scheme, kSplit, kPkt).value;
            const double l = avg_bler_L_closed(c, scheme, kSplit, kPkt, kPkt).total.value;
            const std::string tag = std::string(to_string(m)) + " m=" + std::to_string(shape);
            if (!(h < prev_H))
                broken += "; " + tag + " H " + fmt("%.4g", h) + " >= " + fmt("%.4g", prev_H);
            if (!(l < prev_L))
                broken += "; " + tag + " L " + fmt("%.4g", l) + " >= " + fmt("%.4g", prev_L);
            mono = mono && h < prev_H && l < prev_L;
            prev_H = h;
            prev_L = l;
            if (shape != 1)
                continue;
            // Selected-branch counts: the favoured cluster picks over K_S * users * K_U.
            const int a_H = m == Method::HCS ? c.K_S * c.I * c.K_H : c.I * c.K_H;
            const int a_L = m == Method::LCS ? c.K_S * c.J * c.K_L : c.J * c.K_L;
            const mp50 rh = rayleigh_stage(a_H, lambda, c.gamma0, 0.3, true, 80, 100.0);
            const mp50 sic = rayleigh_stage(a_L, lambda, c.gamma0, 0.3, true, 80, 100.0);
            const mp50 own = rayleigh_stage(a_L, lambda, c.gamma0, 0.3, false, 80, 100.0);
            const mp50 rl = sic + (1 - sic) * own;
            worst = std::max({worst, rel(h, rh.convert_to<double>()), rel(l, rl.convert_to<double>())});
        }
    }
    report(8, mono && worst <= kRayleighRel,
           std::string("strictly decreasing in m = 1..4 at 20 dB: ") + (mono ? "yes" : "no") +
               broken + "; m = 1 vs Rayleigh-only closed form max rel " + fmt("%.1e", worst) + " (<= 1e-10)");
}

void criterion_9()
{
    auto sc = default_scenario();
    auto once = [&](unsigned w) {
        sc.plan.workers = w;
        std::ostringstream out;
        print_validation(out, run_validation(sc));
        return out.str();
    };
    const std::string a = once(1);
    const std::string b = once(workers());
    const std::string c = once(1);
    const bool same = a == b && a == c;
    report(9, same && a.rfind("seed 1 ", 0) == 0,
           "validate suite (default scenario, seed 1, " + std::to_string(kMcTrials) + " trials) three runs, " +
               std::to_string(a.size()) + " bytes: " + (same ? "identical" : "differ"));
}

} // namespace

int main()
{
    const std::vector<std::function<void()>> criteria{criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                                                      criterion_6, criterion_7, criterion_8, criterion_9};
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        try {
            criteria[i]();
        } catch (const std::exception& e) {
            report(static_cast<int>(i + 1), false, std::string("exception: ") + e.what());
        }
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures;
}
