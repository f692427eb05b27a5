// Prints the reference homogeneous path next to the heterogeneous one.

#include <cstdio>
#include <string>

#include "bubblemarket/hetero.hpp"
#include "bubblemarket/homogeneous.hpp"

int main() {
    namespace bm = bubblemarket;
    const int T = 15;
    const auto asset = bm::speculative_asset(4.0, 0.85, 0.01);
    const auto homo = bm::average_price_path(asset, T);

    const auto calm = bm::speculative_asset(4.0, 0.85);
    const auto het = bm::hetero_price_path(calm, {50, 6, 4}, {0.25, 0.10, 4.0}, T);

    std::printf("%3s %8s %10s %10s %6s\n", "t", "fv", "homog", "hetero", "event");
    for (int t = 0; t < T; ++t) {
        const auto& h = homo.path.periods[t];
        const auto& r = het.path.periods[t];
        std::printf("%3d %8.3f %10.4f %10.4f %6s\n", h.t, h.fv, h.price, r.price,
                    std::string(bm::to_string(*r.event)).c_str());
    }
    std::printf("RD homogeneous %.4f, heterogeneous %.4f\n", homo.path.rd, het.path.rd);
}
