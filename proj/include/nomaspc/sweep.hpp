#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "asymptotics.hpp"
#include "bler.hpp"
#include "blocklength.hpp"
#include "montecarlo.hpp"
#include "scenario.hpp"

namespace nomaspc {

inline std::string csv_name(Method m)
{
    return m == Method::HCS ? "HCS" : "LCS";
}

inline std::string csv_name(Diversity d)
{
    return d == Diversity::TAS_SC ? "TAS_SC" : "TAS_MRC";
}

/// 12 significant digits, "nan" / "inf" spelled out.
inline std::string csv_number(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out), width_(header.size())
    {
        row(header);
    }

    void row(const std::vector<std::string>& fields)
    {
        if (fields.size() != width_)
            throw Error("CsvWriter: row width does not match header");
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i)
                out_ << ',';
            out_ << fields[i];
        }
        out_ << '\n';
    }

private:
    std::ostream& out_;
    std::size_t width_;
};

/// Runs task(i) for i in [0, count) on `workers` threads.  Callers write
/// results into slot i, so completion order never affects output order.
inline void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& task)
{
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            task(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers)
                    task(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

namespace detail {

struct SweepPoint {
    std::size_t case_index = 0;
    std::size_t grid_index = 0;
    Scheme scheme;
};

inline std::vector<SweepPoint> sweep_points(const Scenario& sc)
{
    std::vector<SweepPoint> pts;
    for (std::size_t c = 0; c < sc.cases.size(); ++c)
        for (std::size_t g = 0; g < sc.sweep.grid.size(); ++g)
            for (const auto& s : sc.schemes())
                pts.push_back(SweepPoint{c, g, s});
    return pts;
}

inline Setup point_setup(const Scenario& sc, const SweepPoint& p)
{
    Setup s = sc.cases[p.case_index].second;
    apply_parameter(s, sc.sweep.parameter, sc.sweep.grid[p.grid_index]);
    return s;
}

inline std::string error_status(const std::exception& e)
{
    if (dynamic_cast<const CeilingViolation*>(&e))
        return "ceiling";
    if (dynamic_cast<const InfeasibleTargets*>(&e))
        return "infeasible";
    if (dynamic_cast<const PrecisionLoss*>(&e))
        return "precision_loss";
    if (dynamic_cast<const NonConvergence*>(&e))
        return "nonconvergence";
    if (dynamic_cast<const ConfigError*>(&e))
        return "config_error";
    return "error";
}

} // namespace detail

struct BlerRow {
    double gamma0_db = 0.0;
    Scheme scheme;
    std::string tier;
    double bler_H = std::numeric_limits<double>::quiet_NaN();
    double bler_L = std::numeric_limits<double>::quiet_NaN();
    double uncertainty = 0.0;
    double uncertainty_L = 0.0;
    std::string sweep_param;
    double sweep_value = 0.0;
    std::string status = "ok";
    std::string case_label;
};

/// Evaluates one (setup, scheme) point under one tier.
inline BlerRow evaluate_bler_point(const Setup& s, const Scheme& scheme, const std::string& tier,
                                   const SimPlan& plan)
{
    BlerRow row;
    row.gamma0_db = s.gamma0_db();
    row.scheme = scheme;
    row.tier = tier;
    try {
        const PowerSplit split(s.alpha_L);
        EvalOptions opts;
        opts.saturate = true;
        bool saturated = false;
        if (tier == "closed" || tier == "quadrature" || tier == "riemann") {
            const Tier t = tier == "closed" ? Tier::CLOSED_FORM
                           : tier == "quadrature" ? Tier::QUADRATURE
                                                  : Tier::RIEMANN;
            const auto h = avg_bler_H(t, s.cfg, scheme, split, s.pkt_H, opts);
            const auto l = avg_bler_L(t, s.cfg, scheme, split, s.pkt_H, s.pkt_L, opts);
            row.bler_H = h.value;
            row.bler_L = l.total.value;
            saturated = h.saturated || l.total.saturated;
        } else if (tier == "asymptotic") {
            try {
                row.bler_H = asymptotic_bler_H(s.cfg, scheme, split, s.pkt_H);
                row.bler_L = asymptotic_bler_L(s.cfg, scheme, split, s.pkt_H, s.pkt_L);
            } catch (const CeilingViolation&) {
                row.bler_H = row.bler_L = 1.0;
                saturated = true;
            }
        } else if (tier == "mc") {
            const auto r = run(s.cfg, scheme, split, s.pkt_H, s.pkt_L, plan);
            row.bler_H = r.bler_H.value;
            row.bler_L = r.bler_L.value;
            row.uncertainty = r.bler_H.ci;
            row.uncertainty_L = r.bler_L.ci;
        } else {
            throw ConfigError("unknown tier '" + tier + "'");
        }
        if (saturated)
            row.status = "saturated";
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        row.status = detail::error_status(e);
    }
    return row;
}

inline std::vector<BlerRow> bler_sweep(const Scenario& sc, const std::vector<std::string>& tiers)
{
    const auto pts = detail::sweep_points(sc);
    std::vector<std::vector<BlerRow>> slots(pts.size());
    SimPlan plan = sc.plan;
    if (sc.workers > 1)
        plan.workers = 1;
    parallel_for(pts.size(), sc.workers, [&](std::size_t i) {
        const auto& p = pts[i];
        const Setup s = detail::point_setup(sc, p);
        for (const auto& tier : tiers) {
            auto row = evaluate_bler_point(s, p.scheme, tier, plan);
            row.sweep_param = sc.sweep.parameter;
            row.sweep_value = sc.sweep.grid[p.grid_index];
            row.case_label = sc.cases[p.case_index].first;
            slots[i].push_back(std::move(row));
        }
    });
    std::vector<BlerRow> rows;
    for (auto& s : slots)
        for (auto& r : s)
            rows.push_back(std::move(r));
    return rows;
}

inline const std::vector<std::string>& bler_csv_header()
{
    static const std::vector<std::string> h{"gamma0_db", "method", "diversity", "tier", "bler_H",
                                            "bler_L", "uncertainty", "uncertainty_L", "sweep_param",
                                            "sweep_value", "status", "case"};
    return h;
}

inline void write_bler_csv(std::ostream& out, const std::vector<BlerRow>& rows)
{
    CsvWriter w(out, bler_csv_header());
    for (const auto& r : rows)
        w.row({csv_number(r.gamma0_db), csv_name(r.scheme.method), csv_name(r.scheme.diversity), r.tier,
               csv_number(r.bler_H), csv_number(r.bler_L), csv_number(r.uncertainty),
               csv_number(r.uncertainty_L), r.sweep_param, csv_number(r.sweep_value), r.status,
               r.case_label});
}

struct BlocklengthRow {
    std::string case_label;
    Scheme scheme;
    double alpha_L = 0.0;
    double N_H = std::numeric_limits<double>::quiet_NaN();
    double N_L = std::numeric_limits<double>::quiet_NaN();
    bool crossing = false;
    double alpha_opt = std::numeric_limits<double>::quiet_NaN();
    double N_opt = std::numeric_limits<double>::quiet_NaN();
    std::string status = "ok";
};

/// N_H and N_L over the alpha_L grid.  The first grid row with N_L <= N_H
/// is flagged as the crossing, and the bisection optimum is attached.
inline std::vector<BlocklengthRow> blocklength_sweep(const Scenario& sc)
{
    if (sc.sweep.parameter != "alpha_L")
        throw ConfigError(sc.name + ": blocklength-sweep needs [sweep] parameter = alpha_L");
    std::vector<BlocklengthRow> rows;
    for (const auto& [label, setup] : sc.cases)
        for (const auto& scheme : sc.schemes()) {
            double alpha_opt = std::numeric_limits<double>::quiet_NaN();
            double N_opt = alpha_opt;
            std::string opt_status = "ok";
            try {
                const auto r = optimize_alpha(setup.cfg, scheme, sc.targets, setup.pkt_H.n, setup.pkt_L.n, sc.optimizer);
                if (r.feasible) {
                    alpha_opt = r.alpha_L_opt;
                    N_opt = r.N_opt;
                } else {
                    opt_status = "no_sign_change";
                }
            } catch (const Error& e) {
                opt_status = detail::error_status(e);
            }
            bool crossed = false;
            for (double a : sc.sweep.grid) {
                BlocklengthRow row;
                row.case_label = label;
                row.scheme = scheme;
                row.alpha_L = a;
                row.alpha_opt = alpha_opt;
                row.N_opt = N_opt;
                try {
                    if (!(a > 0.0 && a < 0.5))
                        throw DomainError("alpha_L outside (0, 0.5)");
                    const auto k = BlocklengthConstants::from(setup.cfg, scheme);
                    row.N_H = blocklength_H(a, k, sc.targets, setup.pkt_H.n);
                    row.N_L = blocklength_L(a, k, sc.targets, setup.pkt_L.n);
                    if (!crossed && row.N_L <= row.N_H) {
                        row.crossing = true;
                        crossed = true;
                    }
                    if (opt_status != "ok")
                        row.status = "optimizer_" + opt_status;
                } catch (const Error& e) {
                    row.status = detail::error_status(e);
                }
                rows.push_back(row);
            }
        }
    return rows;
}

inline void write_blocklength_csv(std::ostream& out, const std::vector<BlocklengthRow>& rows)
{
    CsvWriter w(out, {"alpha_L", "method", "diversity", "N_H", "N_L", "crossing", "alpha_opt", "N_opt",
                      "status", "case"});
    for (const auto& r : rows)
        w.row({csv_number(r.alpha_L), csv_name(r.scheme.method), csv_name(r.scheme.diversity),
               csv_number(r.N_H), csv_number(r.N_L), r.crossing ? "1" : "0", csv_number(r.alpha_opt),
               csv_number(r.N_opt), r.status, r.case_label});
}

struct OmaRow {
    std::string case_label;
    double gamma0_db = 0.0;
    Scheme scheme;
    double N_opt = std::numeric_limits<double>::quiet_NaN();
    double N_OMA = std::numeric_limits<double>::quiet_NaN();
    double delta_N = std::numeric_limits<double>::quiet_NaN();
    double N_hat_H = std::numeric_limits<double>::quiet_NaN();
    double alpha_opt = std::numeric_limits<double>::quiet_NaN();
    std::string sweep_param;
    double sweep_value = 0.0;
    std::string status = "ok";
};

inline std::vector<OmaRow> compare_oma(const Scenario& sc)
{
    std::vector<OmaRow> rows;
    for (const auto& [label, base] : sc.cases)
        for (double v : sc.sweep.grid)
            for (const auto& scheme : sc.schemes()) {
                Setup s = base;
                apply_parameter(s, sc.sweep.parameter, v);
                OmaRow row;
                row.case_label = label;
                row.gamma0_db = s.gamma0_db();
                row.scheme = scheme;
                row.sweep_param = sc.sweep.parameter;
                row.sweep_value = v;
                try {
                    const auto oma = oma_blocklength(s.cfg, scheme, sc.targets, s.pkt_H.n, s.pkt_L.n);
                    row.N_OMA = oma.total();
                    row.N_hat_H = oma.N_H;
                    const auto r = optimize_alpha(s.cfg, scheme, sc.targets, s.pkt_H.n, s.pkt_L.n, sc.optimizer);
                    if (r.feasible) {
                        row.N_opt = r.N_opt;
                        row.alpha_opt = r.alpha_L_opt;
                        row.delta_N = row.N_OMA - row.N_opt;
                        if (!(row.delta_N > 0.0))
                            row.status = "delta_nonpositive";
                    } else {
                        row.status = "no_sign_change";
                    }
                } catch (const Error& e) {
                    row.status = detail::error_status(e);
                }
                rows.push_back(row);
            }
    return rows;
}

inline void write_oma_csv(std::ostream& out, const std::vector<OmaRow>& rows)
{
    CsvWriter w(out, {"gamma0_db", "method", "diversity", "N_opt", "N_OMA", "delta_N", "N_hat_H",
                      "alpha_opt", "sweep_param", "sweep_value", "status", "case"});
    for (const auto& r : rows)
        w.row({csv_number(r.gamma0_db), csv_name(r.scheme.method), csv_name(r.scheme.diversity),
               csv_number(r.N_opt), csv_number(r.N_OMA), csv_number(r.delta_N), csv_number(r.N_hat_H),
               csv_number(r.alpha_opt), r.sweep_param, csv_number(r.sweep_value), r.status, r.case_label});
}

enum class PlotKind { BLER, BLOCKLENGTH, OMA };

/// Matplotlib script that reads `csv_file` (resolved next to the script)
/// and draws the sweep.
inline std::string plot_script(PlotKind kind, const std::string& csv_file, const std::string& title)
{
    std::string body;
    switch (kind) {
    case PlotKind::BLER:
        body = R"PY(fig, axes = plt.subplots(1, 2, figsize=(11, 4.5), sharex=True)
for key, pts in sorted(groups(rows, ("case", "method", "diversity", "tier")).items()):
    pts = [p for p in pts if p["status"] in ("ok", "saturated")]
    if not pts:
        continue
    x = [float(p["sweep_value"]) for p in pts]
    label = " ".join(k for k in key if k)
    style = "o" if key[3] == "mc" else "-"
    for ax, col in zip(axes, ("bler_H", "bler_L")):
        y = [float(p[col]) for p in pts]
        ax.semilogy(x, [v if v > 0 else float("nan") for v in y], style, label=label)
for ax, who in zip(axes, ("H", "L")):
    ax.set_xlabel(rows[0]["sweep_param"] if rows else "")
    ax.set_ylabel("average BLER at user " + who)
    ax.set_ylim(1e-12, 2)
    ax.grid(True, which="both", alpha=0.3)
axes[1].legend(fontsize=7)
)PY";
        break;
    case PlotKind::BLOCKLENGTH:
        body = R"PY(fig, ax = plt.subplots(figsize=(6.5, 4.5))
for key, pts in sorted(groups(rows, ("case", "method", "diversity")).items()):
    pts = [p for p in pts if p["status"] == "ok"]
    if not pts:
        continue
    x = [float(p["alpha_L"]) for p in pts]
    label = " ".join(k for k in key if k)
    ax.plot(x, [float(p["N_H"]) for p in pts], "-", label=label + " N_H")
    ax.plot(x, [float(p["N_L"]) for p in pts], "--", label=label + " N_L")
    if pts[0]["alpha_opt"] != "nan":
        ax.plot([float(pts[0]["alpha_opt"])], [float(pts[0]["N_opt"])], "k*")
ax.set_xlabel("alpha_L")
ax.set_ylabel("minimum blocklength")
ax.set_yscale("log")
ax.grid(True, alpha=0.3)
ax.legend(fontsize=7)
)PY";
        break;
    case PlotKind::OMA:
        body = R"PY(fig, ax = plt.subplots(figsize=(6.5, 4.5))
for key, pts in sorted(groups(rows, ("case", "method", "diversity")).items()):
    pts = [p for p in pts if p["status"] == "ok"]
    if not pts:
        continue
    x = [float(p["sweep_value"]) for p in pts]
    label = " ".join(k for k in key if k)
    ax.plot(x, [float(p["N_opt"]) for p in pts], "-o", label=label + " NOMA")
    ax.plot(x, [float(p["N_OMA"]) for p in pts], "--s", label=label + " OMA")
ax.set_xlabel(rows[0]["sweep_param"] if rows else "")
ax.set_ylabel("minimum blocklength")
ax.set_yscale("log")
ax.grid(True, alpha=0.3)
ax.legend(fontsize=7)
)PY";
        break;
    }
    return "import csv\nimport os\nimport sys\n\nimport matplotlib\nmatplotlib.use(\"Agg\")\n"
           "import matplotlib.pyplot as plt\n\n"
           "HERE = os.path.dirname(os.path.abspath(__file__))\n"
           "CSV = os.path.join(HERE, \"" + csv_file + "\")\n\n"
           "with open(CSV, newline=\"\") as fh:\n    rows = list(csv.DictReader(fh))\n\n\n"
           "def groups(rows, keys):\n    out = {}\n    for r in rows:\n"
           "        out.setdefault(tuple(r[k] for k in keys), []).append(r)\n    return out\n\n\n" +
           body + "fig.suptitle(\"" + title + "\")\nfig.tight_layout()\n"
           "out = sys.argv[1] if len(sys.argv) > 1 else os.path.splitext(CSV)[0] + \".png\"\n"
           "fig.savefig(out, dpi=150)\nprint(out)\n";
}

} // namespace nomaspc
