#pragma once

// Single-asset market populated only by near-zero-intelligence noise traders.
// Buyers and sellers both post the average quote q_t; the prevailing prices
// are q_t scaled by the expected buyer/seller count ratio, so the book only
// clears when the buyer probability is exactly one half.

#include <string>
#include <vector>

#include "market_core.hpp"
#include "sweep.hpp"

namespace bubblemarket {

struct HomogeneousResult {
    PricePath path;
    std::vector<bool> in_equilibrium;
    AssetSpec parameters;
};

/// True iff the weak-foresight buyer probability is exactly 1/2 at t.
inline bool equilibrium_exists(double phi, int t) { return buyer_probability(phi, t) == 0.5; }

namespace detail {

// Shared recursion; `buyer_prob(t)` supplies pi_t.
template <typename BuyerProb>
HomogeneousResult noise_trader_path(const AssetSpec& asset, int horizon, BuyerProb&& buyer_prob) {
    HomogeneousResult out;
    out.parameters = asset;
    out.path.periods.reserve(static_cast<std::size_t>(horizon));
    out.in_equilibrium.reserve(static_cast<std::size_t>(horizon));

    double prev = fundamental_value(asset, 1, horizon);
    for (int t = 1; t <= horizon; ++t) {
        const double pi = buyer_prob(t);
        if (!(pi > 0.0 && pi < 1.0))
            throw DegenerateMarketError("buyer probability " + std::to_string(pi) + " at t=" +
                                        std::to_string(t) + " leaves one side of the book empty");
        PeriodRecord r;
        r.t = t;
        r.fv = fundamental_value(asset, t, horizon);
        r.quote = noise_quote_mean(asset, r.fv, prev);
        r.bid = prevailing_price(r.quote, pi, 1.0 - pi);
        r.ask = prevailing_price(r.quote, 1.0 - pi, pi);
        r.imbalance = pi / (1.0 - pi) - 1.0;
        r.price = r.quote + r.imbalance;
        out.in_equilibrium.push_back(pi == 0.5);
        out.path.periods.push_back(r);
        prev = r.price;
    }
    annotate_rd(out.path);
    return out;
}

}  // namespace detail

/// Average price recursion seeded with p_0 = FV_1:
///   q_t = noise_quote_mean(FV_t, p_{t-1}),  p_t = q_t + (pi_t / (1 - pi_t) - 1).
/// The imbalance term is added to the dollar quote as written in the model.
inline HomogeneousResult average_price_path(const AssetSpec& asset, int horizon) {
    if (horizon < 1) throw DomainError("average_price_path: horizon must be >= 1");
    asset.validate(horizon);
    return detail::noise_trader_path(asset, horizon,
                                     [&](int t) { return buyer_probability(asset.phi, t); });
}

struct HomogeneousGrid {
    std::vector<double> kappa;
    std::vector<double> alpha;
    std::vector<double> phi;
};

/// Average RD over a (kappa, alpha, phi) grid, row-major in that order.
/// Dividend support and terminal value come from `base`.
inline SurfaceTable sweep_rd(const AssetSpec& base, const HomogeneousGrid& grid, int horizon,
                             unsigned threads = 0) {
    return sweep_grid(
        {"kappa", "alpha", "phi"}, {grid.kappa, grid.alpha, grid.phi}, {"rd"},
        [&](const std::vector<double>& c) {
            AssetSpec a = base;
            a.kappa = c[0];
            a.alpha = c[1];
            a.phi = c[2];
            return std::vector<double>{average_price_path(a, horizon).path.rd};
        },
        threads);
}

}  // namespace bubblemarket
