// Optimal power split and NOMA/OMA blocklength for the LCS method.

#include <cstdio>
#include <string>

#include "nomaspc/nomaspc.hpp"

int main()
{
    using namespace nomaspc;
    SystemConfig cfg;
    cfg.K_S = cfg.K_H = cfg.K_L = cfg.I = cfg.J = 2;
    const ReliabilityTargets targets{1e-7, 1e-6};

    for (Diversity div : {Diversity::TAS_SC, Diversity::TAS_MRC}) {
        const Scheme scheme{Method::LCS, div};
        for (double db : {20.0, 30.0, 40.0}) {
            cfg.gamma0 = db_to_linear(db);
            const auto r = optimize_alpha(cfg, scheme, targets, 80, 80);
            const auto oma = oma_blocklength(cfg, scheme, targets, 80, 80);
            std::printf("%-8s %4.0f dB  alpha_L %.6f  N_opt %8.2f (%lld)  N_OMA %8.2f  delta %6.2f  [%d it]\n",
                        std::string(to_string(div)).c_str(), db, r.alpha_L_opt, r.N_opt, r.N_opt_int,
                        oma.total(), oma.total() - r.N_opt, r.iterations);
        }
    }

    cfg.gamma0 = db_to_linear(20);
    try {
        optimize_alpha(cfg, {Method::HCS, Diversity::TAS_SC}, targets, 80, 80);
    } catch (const InfeasibleTargets& e) {
        std::printf("HCS: %s\n", e.what());
    }
}
