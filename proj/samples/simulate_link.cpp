// Monte Carlo link simulation next to the closed form at one operating point.

#include <cstdio>
#include <cstdlib>

#include "nomaspc/nomaspc.hpp"

int main(int argc, char** argv)
{
    using namespace nomaspc;
    SystemConfig cfg;
    cfg.gamma0 = db_to_linear(argc > 1 ? std::atof(argv[1]) : 20.0);
    const PowerSplit split(0.3);
    const PacketSpec pkt(80, 100.0);

    SimPlan plan;
    plan.trials = 200000;
    plan.batch = 10000;
    plan.seed = 7;

    for (Method m : {Method::HCS, Method::LCS})
        for (Diversity d : {Diversity::TAS_SC, Diversity::TAS_MRC}) {
            const Scheme scheme{m, d};
            const auto mc = run(cfg, scheme, split, pkt, pkt, plan);
            const double h = avg_bler_H_closed(cfg, scheme, split, pkt).value;
            const double l = avg_bler_L_closed(cfg, scheme, split, pkt, pkt).total.value;
            std::printf("%s %-7s H: mc %.4e +- %.1e closed %.4e | L: mc %.4e +- %.1e closed %.4e\n",
                        std::string(to_string(m)).c_str(), std::string(to_string(d)).c_str(), mc.bler_H.value,
                        mc.bler_H.ci, h, mc.bler_L.value, mc.bler_L.ci, l);
        }
    std::printf("seed %llu, %llu trials, %s\n", static_cast<unsigned long long>(plan.seed),
                static_cast<unsigned long long>(plan.trials), RandomStream::kGeneratorName);
}
