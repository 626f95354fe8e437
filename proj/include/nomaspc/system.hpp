#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace nomaspc {

enum class Method { HCS, LCS };
enum class Diversity { TAS_SC, TAS_MRC };
enum class Link { SH, SL };

inline std::string_view to_string(Method m)
{
    return m == Method::HCS ? "HCS" : "LCS";
}

inline std::string_view to_string(Diversity d)
{
    return d == Diversity::TAS_SC ? "TAS/SC" : "TAS/MRC";
}

inline std::string_view to_string(Link l)
{
    return l == Link::SH ? "SH" : "SL";
}

/// Antenna counts, cluster sizes, fading shapes, geometry and SNR of the
/// two-cluster downlink.  gamma0 is linear.
struct SystemConfig {
    int K_S = 2;
    int K_H = 2;
    int K_L = 2;
    int I = 1;
    int J = 1;
    int m_H = 2;
    int m_L = 2;
    double d_SH = 5.0;
    double d_SL = 5.0;
    double theta = 2.5;
    double gamma0 = 100.0;

    double lambda_SH() const { return std::pow(d_SH, -theta); }
    double lambda_SL() const { return std::pow(d_SL, -theta); }

    void validate() const
    {
        if (K_S < 1 || K_H < 1 || K_L < 1 || I < 1 || J < 1)
            throw ConfigError("SystemConfig: antenna counts and cluster sizes must be >= 1");
        if (m_H < 1 || m_L < 1)
            throw ConfigError("SystemConfig: Nakagami shapes must be positive integers");
        if (!(d_SH > 0.0) || !(d_SL > 0.0) || !(theta > 0.0))
            throw ConfigError("SystemConfig: distances and path-loss exponent must be positive");
        if (!(gamma0 > 0.0) || !std::isfinite(gamma0))
            throw ConfigError("SystemConfig: gamma0 must be positive and finite");
    }
};

struct SchemeSelect {
    Method method = Method::HCS;
    Diversity diversity = Diversity::TAS_SC;
    Link link = Link::SH;
};

inline double db_to_linear(double db)
{
    return std::pow(10.0, db / 10.0);
}

inline double linear_to_db(double lin)
{
    return 10.0 * std::log10(lin);
}

/// n information bits sent over N channel uses, with the constants of the
/// linearized BLER: beta (rate threshold), chi (slope) and the window
/// [v, mu] outside which the linearized BLER is 0 or 1.
struct PacketSpec {
    int n = 80;
    double N = 100.0;

    PacketSpec() = default;
    PacketSpec(int bits, double blocklength) : n(bits), N(blocklength) { validate(); }

    void validate() const
    {
        if (n < 1)
            throw ConfigError("PacketSpec: n must be >= 1");
        if (!(N >= 1.0) || !std::isfinite(N))
            throw ConfigError("PacketSpec: N must be finite and >= 1");
    }

    double rate() const { return n / N; }
    double beta() const { return std::exp2(rate()) - 1.0; }
    double chi() const { return 1.0 / std::sqrt(2.0 * std::numbers::pi * (std::exp2(2.0 * rate()) - 1.0)); }
    double half_width() const { return 1.0 / (2.0 * chi() * std::sqrt(N)); }
    double v() const { return beta() - half_width(); }
    double mu() const { return beta() + half_width(); }
};

/// Superposition coefficients, alpha_H + alpha_L = 1 with 0 < alpha_L < 0.5.
class PowerSplit {
public:
    explicit PowerSplit(double alpha_L = 0.3) : alpha_L_(alpha_L)
    {
        if (!(alpha_L > 0.0 && alpha_L < 0.5))
            throw ConfigError("PowerSplit: alpha_L must lie in (0, 0.5)");
    }

    static PowerSplit from_pair(double alpha_H, double alpha_L)
    {
        if (std::abs(alpha_H + alpha_L - 1.0) > 1e-12)
            throw ConfigError("PowerSplit: alpha_H + alpha_L must equal 1");
        return PowerSplit(alpha_L);
    }

    double alpha_L() const { return alpha_L_; }
    double alpha_H() const { return 1.0 - alpha_L_; }
    /// Interference-limited SINR ceiling for decoding x_H.
    double ceiling() const { return alpha_H() / alpha_L_; }

private:
    double alpha_L_;
};

struct ReliabilityTargets {
    double eps_H = 1e-7;
    double eps_L = 1e-6;

    void validate() const
    {
        if (!(eps_H > 0.0 && eps_H < 1.0) || !(eps_L > 0.0 && eps_L < 1.0))
            throw ConfigError("ReliabilityTargets: targets must lie in (0, 1)");
    }
};

} // namespace nomaspc
