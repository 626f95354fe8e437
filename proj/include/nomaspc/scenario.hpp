#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "blocklength.hpp"
#include "errors.hpp"
#include "montecarlo.hpp"
#include "system.hpp"

namespace nomaspc {

/// Everything that can vary between sweep points.
struct Setup {
    SystemConfig cfg;
    PacketSpec pkt_H{80, 100.0};
    PacketSpec pkt_L{80, 100.0};
    double alpha_L = 0.3;

    double gamma0_db() const { return linear_to_db(cfg.gamma0); }
};

struct SweepAxis {
    std::string parameter = "gamma0_db";
    std::vector<double> grid;
};

struct Scenario {
    std::string name;
    /// (label, setup) pairs; a scenario without case sections has one
    /// unlabeled case.
    std::vector<std::pair<std::string, Setup>> cases;
    ReliabilityTargets targets;
    std::vector<Method> methods{Method::HCS, Method::LCS};
    std::vector<Diversity> diversities{Diversity::TAS_SC, Diversity::TAS_MRC};
    SweepAxis sweep;
    std::vector<std::string> tiers{"closed"};
    SimPlan plan;
    OptimizerSettings optimizer;
    unsigned workers = 1;

    std::vector<Scheme> schemes() const
    {
        std::vector<Scheme> out;
        for (auto m : methods)
            for (auto d : diversities)
                out.push_back(Scheme{m, d});
        return out;
    }
};

inline const std::vector<std::string>& sweep_parameters()
{
    static const std::vector<std::string> names{"gamma0_db", "alpha_L", "m", "m_H", "m_L", "N",
                                                "N_H", "N_L", "n", "K_S", "K_H", "K_L", "I", "J"};
    return names;
}

inline const std::vector<std::string>& tier_names()
{
    static const std::vector<std::string> names{"closed", "quadrature", "riemann", "asymptotic", "mc"};
    return names;
}

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty())
            out.push_back(t);
    return out;
}

/// Field-level diagnostics: remembers the line of every key so that value
/// errors can point at it.
class FieldLocator {
public:
    FieldLocator(const std::string& text, std::string source) : source_(std::move(source))
    {
        std::istringstream in(text);
        std::string line, section;
        for (int no = 1; std::getline(in, line); ++no) {
            const auto t = trim(line);
            if (t.empty() || t[0] == ';' || t[0] == '#')
                continue;
            if (t.front() == '[' && t.back() == ']') {
                section = trim(t.substr(1, t.size() - 2));
                continue;
            }
            if (const auto eq = t.find('='); eq != std::string::npos)
                lines_[{section, trim(t.substr(0, eq))}] = no;
        }
    }

    [[noreturn]] void fail(const std::string& section, const std::string& key,
                           const std::string& what) const
    {
        std::string where = source_;
        if (auto it = lines_.find({section, key}); it != lines_.end())
            where += ":" + std::to_string(it->second);
        throw ConfigError(where + ": [" + section + "] " + key + ": " + what);
    }

private:
    std::string source_;
    std::map<std::pair<std::string, std::string>, int> lines_;
};

inline double parse_double(const FieldLocator& loc, const std::string& section, const std::string& key,
                           const std::string& value)
{
    try {
        std::size_t used = 0;
        const double x = std::stod(value, &used);
        if (used != value.size() || !std::isfinite(x))
            throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        loc.fail(section, key, "expected a number, got '" + value + "'");
    }
}

inline long long parse_int(const FieldLocator& loc, const std::string& section, const std::string& key,
                           const std::string& value)
{
    try {
        std::size_t used = 0;
        const long long x = std::stoll(value, &used);
        if (used != value.size())
            throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        loc.fail(section, key, "expected an integer, got '" + value + "'");
    }
}

inline Method parse_method(const FieldLocator& loc, const std::string& section, const std::string& key,
                           const std::string& v)
{
    if (v == "HCS" || v == "hcs")
        return Method::HCS;
    if (v == "LCS" || v == "lcs")
        return Method::LCS;
    loc.fail(section, key, "unknown method '" + v + "' (expected HCS or LCS)");
}

inline Diversity parse_diversity(const FieldLocator& loc, const std::string& section,
                                 const std::string& key, const std::string& v)
{
    if (v == "TAS_SC" || v == "SC" || v == "TAS/SC")
        return Diversity::TAS_SC;
    if (v == "TAS_MRC" || v == "MRC" || v == "TAS/MRC")
        return Diversity::TAS_MRC;
    loc.fail(section, key, "unknown diversity scheme '" + v + "' (expected TAS_SC or TAS_MRC)");
}

} // namespace detail

inline Dispersion parse_dispersion(const std::string& v)
{
    if (v == "reduced")
        return Dispersion::REDUCED;
    if (v == "standard")
        return Dispersion::STANDARD;
    throw ConfigError("unknown dispersion '" + v + "' (expected reduced or standard)");
}

/// Comma list "0,5,10" or range "start:step:stop" (stop inclusive).
inline std::vector<double> parse_grid(const std::string& text)
{
    const auto t = detail::trim(text);
    std::vector<double> out;
    if (t.empty())
        throw ConfigError("sweep grid must be non-empty");
    if (t.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream ss(t);
        std::string item;
        while (std::getline(ss, item, ':'))
            parts.push_back(std::stod(detail::trim(item)));
        if (parts.size() != 3 || !(parts[1] > 0.0))
            throw ConfigError("sweep grid range must be start:step:stop with step > 0");
        const double span = (parts[2] - parts[0]) / parts[1];
        const long long count = static_cast<long long>(std::floor(span + 1e-9));
        for (long long i = 0; i <= count; ++i)
            out.push_back(parts[0] + static_cast<double>(i) * parts[1]);
    } else {
        for (const auto& item : detail::split_list(t)) {
            std::size_t used = 0;
            double x = 0.0;
            try {
                x = std::stod(item, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != item.size())
                throw ConfigError("sweep grid entry '" + item + "' is not a number");
            out.push_back(x);
        }
    }
    if (out.empty())
        throw ConfigError("sweep grid must be non-empty");
    for (std::size_t i = 1; i < out.size(); ++i)
        if (!(out[i] > out[i - 1]))
            throw ConfigError("sweep grid must be strictly increasing");
    return out;
}

/// Sets one sweepable parameter on a setup.
inline void apply_parameter(Setup& s, const std::string& name, double value)
{
    auto as_int = [&](double v) {
        if (std::abs(v - std::round(v)) > 1e-9)
            throw ConfigError("parameter " + name + " must be an integer, got " + format_number(v));
        return static_cast<int>(std::lround(v));
    };
    if (name == "gamma0_db")
        s.cfg.gamma0 = db_to_linear(value);
    else if (name == "alpha_L")
        s.alpha_L = value;
    else if (name == "m")
        s.cfg.m_H = s.cfg.m_L = as_int(value);
    else if (name == "m_H")
        s.cfg.m_H = as_int(value);
    else if (name == "m_L")
        s.cfg.m_L = as_int(value);
    else if (name == "N")
        s.pkt_H.N = s.pkt_L.N = value;
    else if (name == "N_H")
        s.pkt_H.N = value;
    else if (name == "N_L")
        s.pkt_L.N = value;
    else if (name == "n")
        s.pkt_H.n = s.pkt_L.n = as_int(value);
    else if (name == "K_S")
        s.cfg.K_S = as_int(value);
    else if (name == "K_H")
        s.cfg.K_H = as_int(value);
    else if (name == "K_L")
        s.cfg.K_L = as_int(value);
    else if (name == "I")
        s.cfg.I = as_int(value);
    else if (name == "J")
        s.cfg.J = as_int(value);
    else
        throw ConfigError("unknown sweep parameter '" + name + "'");
}

namespace detail {

/// Keys accepted in [system], [packet], [power] and case sections.
inline bool apply_setup_key(Setup& s, const FieldLocator& loc, const std::string& section,
                            const std::string& key, const std::string& value)
{
    static const std::set<std::string> int_keys{"K_S", "K_H", "K_L", "I", "J", "m", "m_H", "m_L", "n", "n_H", "n_L"};
    static const std::set<std::string> real_keys{"d_SH", "d_SL", "theta", "gamma0_db", "N", "N_H", "N_L", "alpha_L", "alpha_H"};
    if (int_keys.count(key)) {
        const auto v = static_cast<int>(parse_int(loc, section, key, value));
        if (key == "n_H")
            s.pkt_H.n = v;
        else if (key == "n_L")
            s.pkt_L.n = v;
        else
            apply_parameter(s, key, v);
        return true;
    }
    if (real_keys.count(key)) {
        const double v = parse_double(loc, section, key, value);
        if (key == "d_SH")
            s.cfg.d_SH = v;
        else if (key == "d_SL")
            s.cfg.d_SL = v;
        else if (key == "theta")
            s.cfg.theta = v;
        else if (key == "alpha_H")
            s.alpha_L = 1.0 - v;
        else
            apply_parameter(s, key, v);
        return true;
    }
    return false;
}

inline void validate_setup(const Setup& s, const FieldLocator& loc, const std::string& section)
{
    try {
        s.cfg.validate();
        s.pkt_H.validate();
        s.pkt_L.validate();
        PowerSplit check(s.alpha_L);
        (void)check;
    } catch (const ConfigError& e) {
        loc.fail(section, "*", e.what());
    }
}

} // namespace detail

inline Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>")
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    const detail::FieldLocator loc(text, source);

    Scenario sc;
    sc.name = source;
    Setup base;
    bool grid_set = false;
    std::vector<std::pair<std::string, const pt::ptree*>> case_sections;

    for (const auto& [section, body] : tree) {
        if (!body.data().empty())
            loc.fail("", section, "key outside any section");
        if (section.rfind("case.", 0) == 0) {
            case_sections.emplace_back(section, &body);
            continue;
        }
        for (const auto& [key, node] : body) {
            const std::string value = detail::trim(node.data());
            if (section == "system" || section == "packet" || section == "power") {
                if (!detail::apply_setup_key(base, loc, section, key, value))
                    loc.fail(section, key, "unknown key");
            } else if (section == "targets") {
                if (key == "eps_H")
                    sc.targets.eps_H = detail::parse_double(loc, section, key, value);
                else if (key == "eps_L")
                    sc.targets.eps_L = detail::parse_double(loc, section, key, value);
                else
                    loc.fail(section, key, "unknown key");
            } else if (section == "schemes") {
                if (key == "methods") {
                    sc.methods.clear();
                    for (const auto& v : detail::split_list(value))
                        sc.methods.push_back(detail::parse_method(loc, section, key, v));
                } else if (key == "diversity") {
                    sc.diversities.clear();
                    for (const auto& v : detail::split_list(value))
                        sc.diversities.push_back(detail::parse_diversity(loc, section, key, v));
                } else {
                    loc.fail(section, key, "unknown key");
                }
                if (sc.methods.empty() || sc.diversities.empty())
                    loc.fail(section, key, "list must be non-empty");
            } else if (section == "sweep") {
                if (key == "parameter") {
                    const auto& names = sweep_parameters();
                    if (std::find(names.begin(), names.end(), value) == names.end())
                        loc.fail(section, key, "unrecognized sweep parameter '" + value + "'");
                    sc.sweep.parameter = value;
                } else if (key == "grid") {
                    try {
                        sc.sweep.grid = parse_grid(value);
                    } catch (const ConfigError& e) {
                        loc.fail(section, key, e.what());
                    }
                    grid_set = true;
                } else if (key == "tiers") {
                    sc.tiers = detail::split_list(value);
                    const auto& names = tier_names();
                    for (const auto& t : sc.tiers)
                        if (std::find(names.begin(), names.end(), t) == names.end())
                            loc.fail(section, key, "unknown tier '" + t + "'");
                    if (sc.tiers.empty())
                        loc.fail(section, key, "tier list must be non-empty");
                } else {
                    loc.fail(section, key, "unknown key");
                }
            } else if (section == "simulation") {
                if (key == "trials")
                    sc.plan.trials = static_cast<std::uint64_t>(detail::parse_int(loc, section, key, value));
                else if (key == "seed")
                    sc.plan.seed = std::stoull(value);
                else if (key == "batch")
                    sc.plan.batch = static_cast<std::uint64_t>(detail::parse_int(loc, section, key, value));
                else if (key == "workers")
                    sc.workers = static_cast<unsigned>(detail::parse_int(loc, section, key, value));
                else if (key == "dispersion") {
                    try {
                        sc.plan.dispersion_mode = parse_dispersion(value);
                    } catch (const ConfigError& e) {
                        loc.fail(section, key, e.what());
                    }
                } else if (key == "selection") {
                    if (value == "shortcut")
                        sc.plan.selection = SelectionMode::SHORTCUT;
                    else if (value == "literal")
                        sc.plan.selection = SelectionMode::LITERAL;
                    else
                        loc.fail(section, key, "expected shortcut or literal");
                } else {
                    loc.fail(section, key, "unknown key");
                }
            } else if (section == "optimizer") {
                if (key == "tol")
                    sc.optimizer.tol = detail::parse_double(loc, section, key, value);
                else if (key == "max_iter")
                    sc.optimizer.max_iter = static_cast<int>(detail::parse_int(loc, section, key, value));
                else
                    loc.fail(section, key, "unknown key");
            } else {
                loc.fail(section, "*", "unknown section");
            }
        }
    }

    detail::validate_setup(base, loc, "system");
    for (const auto& [section, body] : case_sections) {
        Setup s = base;
        for (const auto& [key, node] : *body)
            if (!detail::apply_setup_key(s, loc, section, key, detail::trim(node.data())))
                loc.fail(section, key, "unknown key");
        detail::validate_setup(s, loc, section);
        sc.cases.emplace_back(section.substr(5), s);
    }
    if (sc.cases.empty())
        sc.cases.emplace_back("", base);

    if (!grid_set)
        sc.sweep.grid = {base.gamma0_db()};
    try {
        sc.targets.validate();
        sc.plan.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    if (!(sc.optimizer.tol > 0.0) || sc.optimizer.max_iter < 1)
        loc.fail("optimizer", "*", "tol must be > 0 and max_iter >= 1");
    if (sc.workers < 1)
        loc.fail("simulation", "workers", "must be >= 1");
    return sc;
}

inline Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError(path + ": cannot open scenario file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

/// Defaults of the reference setup (n = 80, N = 100, theta = 2.5, d = 5 m,
/// alpha = (0.7, 0.3), targets 1e-7 / 1e-6) swept over 0..40 dB.
inline Scenario default_scenario()
{
    Scenario sc = parse_scenario("[sweep]\ngrid = 0:5:40\n", "<default>");
    sc.name = "<default>";
    return sc;
}

} // namespace nomaspc
