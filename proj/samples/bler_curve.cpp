// Closed-form and asymptotic BLER of both users over gamma0 for one scheme.

#include <cstdio>
#include <string>

#include "nomaspc/nomaspc.hpp"

int main()
{
    using namespace nomaspc;
    SystemConfig cfg;
    const Scheme scheme{Method::HCS, Diversity::TAS_MRC};
    const PowerSplit split(0.3);
    const PacketSpec pkt(80, 100.0);

    std::printf("%8s %14s %14s %14s %14s\n", "gamma0", "bler_H", "asym_H", "bler_L", "asym_L");
    for (double db = 0; db <= 40; db += 5) {
        cfg.gamma0 = db_to_linear(db);
        const auto h = avg_bler_H_closed(cfg, scheme, split, pkt);
        const auto l = avg_bler_L_closed(cfg, scheme, split, pkt, pkt);
        std::printf("%8.1f %14.6e %14.6e %14.6e %14.6e\n", db, h.value,
                    asymptotic_bler_H(cfg, scheme, split, pkt), l.total.value,
                    asymptotic_bler_L(cfg, scheme, split, pkt, pkt));
    }
    const auto d = diversity_order(cfg, scheme.method);
    std::printf("diversity orders: H %d, L %d\n", d.D_H, d.D_L);
}
