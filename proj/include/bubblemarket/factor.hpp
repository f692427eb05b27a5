#pragma once

// Two-asset market with noise, directional and market-neutral traders.
// Everyone reads the buy/sell signal of asset 1 with probability pi_1;
// directional traders take the same side on asset 2 (factor [1, 1]),
// market-neutral traders the opposite side (factor [1, -1]), and noise
// traders pick their asset-2 side independently with probability pi_2.

#include <optional>
#include <string>
#include <vector>

#include "homogeneous.hpp"
#include "market_core.hpp"
#include "sweep.hpp"

namespace bubblemarket {

struct FactorPopulation {
    int noise = 0;
    int directional = 0;
    int market_neutral = 0;

    [[nodiscard]] int total() const { return noise + directional + market_neutral; }

    [[nodiscard]] std::vector<std::string> violations() const {
        std::vector<std::string> out;
        if (noise < 0 || directional < 0 || market_neutral < 0)
            out.emplace_back("trader counts must be nonnegative");
        if (total() <= 0) out.emplace_back("population must contain at least one trader");
        return out;
    }

    void validate() const {
        auto v = violations();
        if (!v.empty()) throw ConfigError("population: " + v.front());
    }
};

/// Both counts are written as the balanced level N/2 plus/minus the same
/// shift, so a book that balances algebraically balances bit for bit.
inline BookCounts factor_asset2_counts(const FactorPopulation& pop, double pi1, double pi2) {
    const double base = 0.5 * pop.total();
    const double shift = pop.noise * (pi2 - 0.5) + (pop.directional - pop.market_neutral) * (pi1 - 0.5);
    return {base + shift, base - shift};
}

struct EquilibriumFlags {
    bool asset1 = false;
    bool asset2 = false;
};

/// asset 1 clears iff pi1 = 1/2; asset 2 clears iff pi2 = 1/2 and either
/// J_D = J_MN or pi1 = 1/2.
inline EquilibriumFlags check_equilibrium_conditions(const FactorPopulation& pop, double pi1, double pi2) {
    return {pi1 == 0.5, pi2 == 0.5 && (pop.directional == pop.market_neutral || pi1 == 0.5)};
}

struct TwoAssetResult {
    PricePath path_1;
    PricePath path_2;
    std::vector<bool> equilibrium_1;
    std::vector<bool> equilibrium_2;
};

/// Average price paths for both assets. Asset 1 follows the homogeneous
/// recursion; asset 2 adds the factor-driven imbalance to its own quote.
/// `pi1_constant` replaces the weak-foresight schedule of asset 1 with a
/// fixed buyer probability (used by the pi_1 sweeps).
inline TwoAssetResult factor_price_paths(const AssetSpec& asset1, const AssetSpec& asset2,
                                         const FactorPopulation& pop, int horizon,
                                         std::optional<double> pi1_constant = std::nullopt) {
    if (horizon < 1) throw DomainError("factor_price_paths: horizon must be >= 1");
    pop.validate();
    asset1.validate(horizon);
    asset2.validate(horizon);
    if (asset2.phi != 0.0)
        throw ConfigError("factor_price_paths: noise traders must buy asset 2 with probability 0.5 (phi_2 = 0)");
    if (pi1_constant && !(*pi1_constant > 0.0 && *pi1_constant < 1.0))
        throw ConfigError("factor_price_paths: constant pi_1 must lie in (0,1)");

    TwoAssetResult out;
    auto h1 = pi1_constant
                  ? detail::noise_trader_path(asset1, horizon, [&](int) { return *pi1_constant; })
                  : average_price_path(asset1, horizon);
    out.path_1 = std::move(h1.path);
    out.equilibrium_1 = std::move(h1.in_equilibrium);

    double prev = fundamental_value(asset2, 1, horizon);
    for (int t = 1; t <= horizon; ++t) {
        const double pi1 = pi1_constant ? *pi1_constant : buyer_probability(asset1.phi, t);
        const auto counts = factor_asset2_counts(pop, pi1, 0.5);
        if (!(counts.supply > 0.0) || !(counts.demand > 0.0))
            throw DegenerateMarketError("factor_price_paths: asset 2 book has an empty side at t=" +
                                        std::to_string(t));
        PeriodRecord r;
        r.t = t;
        r.fv = fundamental_value(asset2, t, horizon);
        r.quote = noise_quote_mean(asset2, r.fv, prev);
        r.bid = prevailing_price(r.quote, counts.demand, counts.supply);
        r.ask = prevailing_price(r.quote, counts.supply, counts.demand);
        r.imbalance = counts.imbalance();
        r.price = r.quote + r.imbalance;
        out.path_2.periods.push_back(r);
        out.equilibrium_2.push_back(counts.demand == counts.supply);
        prev = r.price;
    }
    annotate_rd(out.path_2);
    return out;
}

struct FactorGrid {
    std::vector<double> pi1;
    std::vector<double> market_neutral;  ///< J_MN values; J_D fills the remainder
    int noise = 0;
    int total = 0;
};

/// RD_1 and RD_2 over (pi_1, J_MN) with J_N and N fixed. Cells where the
/// implied J_D = N - J_N - J_MN is negative or fractional are flagged.
inline SurfaceTable factor_rd_surface(const AssetSpec& asset1, const AssetSpec& asset2, int horizon,
                                      const FactorGrid& grid, unsigned threads = 0) {
    return sweep_grid(
        {"pi1", "market_neutral"}, {grid.pi1, grid.market_neutral}, {"rd_1", "rd_2"},
        [&](const std::vector<double>& c) {
            const double jmn = c[1];
            if (jmn != static_cast<double>(static_cast<int>(jmn)) || jmn < 0.0)
                throw ConfigError("market-neutral count must be a nonnegative integer");
            FactorPopulation pop{grid.noise, grid.total - grid.noise - static_cast<int>(jmn),
                                 static_cast<int>(jmn)};
            if (pop.directional < 0) throw ConfigError("infeasible cell: J_D = N - J_N - J_MN < 0");
            auto r = factor_price_paths(asset1, asset2, pop, horizon, c[0]);
            return std::vector<double>{r.path_1.rd, r.path_2.rd};
        },
        threads);
}

}  // namespace bubblemarket
