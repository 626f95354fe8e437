#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nomaspc/nomaspc.hpp"

namespace fs = std::filesystem;
using namespace nomaspc;

namespace {

struct CommonFlags {
    std::string scenario;
    std::string out;
    std::string tiers;
    long long trials = -1;
    std::string seed;
    std::string dispersion;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool scenario_required)
{
    auto* opt = cmd->add_option("--scenario", f.scenario, "scenario file (INI)");
    if (scenario_required)
        opt->required();
    cmd->add_option("--out", f.out, "output file (stdout when omitted)");
    cmd->add_option("--trials", f.trials, "Monte Carlo trials override");
    cmd->add_option("--seed", f.seed, "Monte Carlo seed override (u64)");
    cmd->add_option("--dispersion", f.dispersion, "channel dispersion: reduced|standard")
        ->check(CLI::IsMember({"reduced", "standard"}));
}

Scenario load(const CommonFlags& f)
{
    Scenario sc = f.scenario.empty() ? default_scenario() : load_scenario(f.scenario);
    if (f.trials >= 0) {
        sc.plan.trials = static_cast<std::uint64_t>(f.trials);
        sc.plan.batch = std::min(sc.plan.batch, std::max<std::uint64_t>(sc.plan.trials, 1));
    }
    if (!f.seed.empty()) {
        std::size_t used = 0;
        sc.plan.seed = std::stoull(f.seed, &used);
        if (used != f.seed.size())
            throw ConfigError("--seed: expected an unsigned 64-bit integer");
    }
    if (!f.dispersion.empty())
        sc.plan.dispersion_mode = parse_dispersion(f.dispersion);
    sc.plan.validate();
    if (!f.tiers.empty()) {
        std::vector<std::string> tiers;
        std::stringstream ss(f.tiers);
        std::string t;
        while (std::getline(ss, t, ','))
            if (!t.empty())
                tiers.push_back(t);
        const auto& names = tier_names();
        for (const auto& x : tiers)
            if (std::find(names.begin(), names.end(), x) == names.end())
                throw ConfigError("--tiers: unknown tier '" + x + "'");
        if (tiers.empty())
            throw ConfigError("--tiers: list must be non-empty");
        sc.tiers = tiers;
    }
    return sc;
}

/// Writes `body` to --out (and a plot script next to it) or to stdout.
template <class Emit>
void emit_csv(const CommonFlags& f, PlotKind kind, const std::string& title, Emit&& body)
{
    if (f.out.empty()) {
        body(std::cout);
        return;
    }
    {
        std::ofstream out(f.out, std::ios::binary);
        if (!out)
            throw ConfigError(f.out + ": cannot open for writing");
        body(out);
    }
    const fs::path csv(f.out);
    fs::path script = csv;
    script.replace_extension(".py");
    std::ofstream py(script, std::ios::binary);
    py << plot_script(kind, csv.filename().string(), title);
    std::cerr << "wrote " << f.out << " and " << script.string() << "\n";
}

int cmd_bler_sweep(const CommonFlags& f)
{
    const Scenario sc = load(f);
    const auto rows = bler_sweep(sc, sc.tiers);
    emit_csv(f, PlotKind::BLER, "average BLER: " + fs::path(sc.name).stem().string(),
             [&](std::ostream& o) { write_bler_csv(o, rows); });
    return 0;
}

int cmd_blocklength_sweep(const CommonFlags& f)
{
    const Scenario sc = load(f);
    const auto rows = blocklength_sweep(sc);
    emit_csv(f, PlotKind::BLOCKLENGTH, "minimum blocklength vs alpha_L",
             [&](std::ostream& o) { write_blocklength_csv(o, rows); });
    for (const auto& r : rows)
        if (r.crossing)
            std::cerr << "crossing " << csv_name(r.scheme.method) << " " << csv_name(r.scheme.diversity)
                      << (r.case_label.empty() ? "" : " " + r.case_label) << " near alpha_L = "
                      << csv_number(r.alpha_L) << " (optimum " << csv_number(r.alpha_opt) << ")\n";
    return 0;
}

int cmd_optimize(const CommonFlags& f)
{
    const Scenario sc = load(f);
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& [label, setup] : sc.cases)
        for (const auto& scheme : sc.schemes()) {
            nlohmann::ordered_json j;
            j["case"] = label;
            j["method"] = csv_name(scheme.method);
            j["diversity"] = csv_name(scheme.diversity);
            j["gamma0_db"] = setup.gamma0_db();
            std::cout << csv_name(scheme.method) << " " << csv_name(scheme.diversity)
                      << (label.empty() ? "" : " [" + label + "]") << ": ";
            try {
                const auto r = optimize_alpha(setup.cfg, scheme, sc.targets, setup.pkt_H.n, setup.pkt_L.n, sc.optimizer);
                j["status"] = std::string(to_string(r.status));
                j["feasible"] = r.feasible;
                j["alpha_L_opt"] = r.alpha_L_opt;
                j["N_opt"] = r.N_opt;
                j["N_opt_int"] = r.N_opt_int;
                j["iterations"] = r.iterations;
                j["residual"] = r.residual;
                j["N_H"] = r.N_H;
                j["N_L"] = r.N_L;
                if (r.feasible)
                    std::cout << "alpha_L_opt = " << csv_number(r.alpha_L_opt) << ", N_opt = "
                              << csv_number(r.N_opt) << " (" << r.N_opt_int << " channel uses), "
                              << r.iterations << " iterations, residual " << csv_number(r.residual) << "\n";
                else
                    std::cout << "no sign change on (0, 0.5): N_L still exceeds N_H at alpha_L = 0.5\n";
            } catch (const InfeasibleTargets& e) {
                j["status"] = "infeasible";
                j["feasible"] = false;
                j["message"] = e.what();
                std::cout << "infeasible targets: " << e.what() << "\n";
            }
            doc.push_back(j);
        }
    if (f.out.empty()) {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::ofstream out(f.out, std::ios::binary);
        if (!out)
            throw ConfigError(f.out + ": cannot open for writing");
        out << doc.dump(2) << "\n";
    }
    return 0;
}

int cmd_compare_oma(const CommonFlags& f)
{
    const Scenario sc = load(f);
    const auto rows = compare_oma(sc);
    emit_csv(f, PlotKind::OMA, "NOMA vs OMA blocklength", [&](std::ostream& o) { write_oma_csv(o, rows); });
    int bad = 0;
    for (const auto& r : rows)
        if (r.status == "delta_nonpositive")
            ++bad;
    if (bad) {
        std::cerr << "warning: " << bad << " feasible point(s) with delta_N <= 0\n";
        return 3;
    }
    return 0;
}

int cmd_validate(const CommonFlags& f)
{
    const Scenario sc = load(f);
    const auto rep = run_validation(sc);
    if (f.out.empty()) {
        print_validation(std::cout, rep);
    } else {
        std::ofstream out(f.out, std::ios::binary);
        print_validation(out, rep);
        print_validation(std::cout, rep);
    }
    return rep.all_pass() ? 0 : 2;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Short-packet MIMO-NOMA BLER and blocklength analysis"};
    app.require_subcommand(1);

    CommonFlags bler, block, opt, oma, val;
    auto* c_bler = app.add_subcommand("bler-sweep", "average BLER over a sweep grid");
    add_common(c_bler, bler, true);
    c_bler->add_option("--tiers", bler.tiers, "comma list of closed,quadrature,riemann,asymptotic,mc");
    auto* c_block = app.add_subcommand("blocklength-sweep", "N_H and N_L over an alpha_L grid");
    add_common(c_block, block, true);
    auto* c_opt = app.add_subcommand("optimize", "optimal power split and minimum blocklength");
    add_common(c_opt, opt, true);
    auto* c_oma = app.add_subcommand("compare-oma", "NOMA vs OMA minimum blocklength");
    add_common(c_oma, oma, true);
    auto* c_val = app.add_subcommand("validate", "oracle-triangle and CDF checks");
    add_common(c_val, val, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_bler->parsed())
            return cmd_bler_sweep(bler);
        if (c_block->parsed())
            return cmd_blocklength_sweep(block);
        if (c_opt->parsed())
            return cmd_optimize(opt);
        if (c_oma->parsed())
            return cmd_compare_oma(oma);
        if (c_val->parsed())
            return cmd_validate(val);
    } catch (const nomaspc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
