#pragma once

// Noise traders mixed with fundamentalists and speculators.
//
// Fundamentalists keep an anchor l_t that chases the last price and buy
// while l_t <= FV_t. Speculators extrapolate E[p_t] = g1 * p_{t-1} + g2 * FV_t
// one period forward and buy only if they expect the price to rise. The
// joint position of the two groups is one of four events E1..E4, and each
// event fixes the demand/supply counts and prevailing bid/ask formulas.
// Noise traders buy with probability 1/2 and anchor on the previous mid.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "market_core.hpp"
#include "sweep.hpp"

namespace bubblemarket {

struct StrategyParams {
    double alpha_f = 1.0;  ///< fundamentalist anchoring, (0, 1]
    double gamma1 = 0.0;   ///< speculator weight on the lagged price, [0, 1]
    double gamma2 = 1.0;   ///< speculator weight on FV, >= 0

    [[nodiscard]] std::vector<std::string> violations() const {
        std::vector<std::string> out;
        if (!(alpha_f > 0.0 && alpha_f <= 1.0)) out.emplace_back("alpha_f must lie in (0,1]");
        if (!(gamma1 >= 0.0 && gamma1 <= 1.0)) out.emplace_back("gamma1 must lie in [0,1]");
        if (!(gamma2 >= 0.0)) out.emplace_back("gamma2 must be nonnegative");
        return out;
    }

    void validate() const {
        auto v = violations();
        if (!v.empty()) throw ConfigError("strategy: " + v.front());
    }

    [[nodiscard]] bool is_limit_case() const { return alpha_f == 1.0 && gamma1 == 0.0; }
};

struct HeteroPopulation {
    int noise = 0;
    int fundamentalist = 0;
    int speculator = 0;

    [[nodiscard]] int total() const { return noise + fundamentalist + speculator; }

    [[nodiscard]] std::vector<std::string> violations() const {
        std::vector<std::string> out;
        if (noise < 0 || fundamentalist < 0 || speculator < 0)
            out.emplace_back("trader counts must be nonnegative");
        if (total() <= 0) out.emplace_back("population must contain at least one trader");
        return out;
    }

    void validate() const {
        auto v = violations();
        if (!v.empty()) throw ConfigError("population: " + v.front());
    }
};

struct BeliefState {
    double anchor = 0.0;      ///< fundamentalist measure l_t
    double anchor_gap = 0.0;  ///< l_t - FV_t, carried so alpha_f = 1 keeps l_t == FV_t exactly
    double expected_price = 0.0;
    double expected_next = 0.0;
};

/// l_0 = FV_1 + mean dividend.
inline BeliefState initial_beliefs(const AssetSpec& asset, int horizon) {
    BeliefState b;
    b.anchor = fundamental_value(asset, 1, horizon) + asset.mean_dividend();
    return b;
}

/// One step of both belief recursions:
///   l_t = aF * l_{t-1} + (1 - aF) * p_{t-1} - dbar
///   E[p_t] = g1 * p_{t-1} + g2 * FV_t,  E[p_{t+1}] = g1 * E[p_t] + g2 * FV_{t+1}
/// The unobserved p_t in the forward step is replaced by its expectation.
inline BeliefState update_beliefs(const BeliefState& prev, double prev_price, double fv_t, double fv_next,
                                  const StrategyParams& params, double mean_div) {
    // FV_{t-1} = FV_t + dbar, so l_t - FV_t = aF * gap_{t-1} + (1 - aF) * (p_{t-1} - FV_{t-1})
    const double fv_prev = fv_t + mean_div;
    BeliefState b;
    b.anchor_gap = params.alpha_f * prev.anchor_gap + (1.0 - params.alpha_f) * (prev_price - fv_prev);
    b.anchor = fv_t + b.anchor_gap;
    b.expected_price = params.gamma1 * prev_price + params.gamma2 * fv_t;
    b.expected_next = params.gamma1 * b.expected_price + params.gamma2 * fv_next;
    return b;
}

struct Positions {
    bool fundamentalist_buys = false;
    bool speculator_buys = false;
};

inline EventLabel event_of(Positions p) {
    if (p.fundamentalist_buys) return p.speculator_buys ? EventLabel::E2 : EventLabel::E1;
    return p.speculator_buys ? EventLabel::E4 : EventLabel::E3;
}

inline Positions positions_of(EventLabel e) {
    switch (e) {
        case EventLabel::E1: return {true, false};
        case EventLabel::E2: return {true, true};
        case EventLabel::E3: return {false, false};
        case EventLabel::E4: return {false, true};
    }
    return {};
}

/// Fundamentalists buy on l_t <= FV_t; speculators sell on E[p_{t+1}] <= E[p_t].
inline EventLabel classify_event(const BeliefState& beliefs, double fv_t) {
    return event_of({beliefs.anchor <= fv_t, beliefs.expected_next > beliefs.expected_price});
}

/// Expected buyer (demand) and seller (supply) counts; noise traders split evenly.
inline BookCounts hetero_counts(EventLabel event, const HeteroPopulation& pop) {
    const auto pos = positions_of(event);
    const double half = 0.5 * pop.noise;
    BookCounts c{half, half};
    (pos.fundamentalist_buys ? c.demand : c.supply) += pop.fundamentalist;
    (pos.speculator_buys ? c.demand : c.supply) += pop.speculator;
    return c;
}

/// B_t / A_t - 1 for the event.
inline double event_imbalance(EventLabel event, const HeteroPopulation& pop) {
    const auto c = hetero_counts(event, pop);
    if (!(c.supply > 0.0))
        throw DegenerateMarketError(std::string("event_imbalance: no sellers under ") +
                                    std::string(to_string(event)));
    return c.imbalance();
}

struct Quotes {
    double noise = 0.0;
    double fundamentalist = 0.0;
    double speculator = 0.0;
};

struct BidAsk {
    double bid = 0.0;
    double ask = 0.0;
    double mid = 0.0;
};

/// Prevailing prices for explicit group positions: the bid spreads all buyer
/// quote value over the sellers, the ask all seller quote value over the buyers.
inline BidAsk book_prices(Positions pos, const HeteroPopulation& pop, const Quotes& q) {
    const double half = 0.5 * pop.noise;
    double buyers = half, sellers = half, buy_excess = 0.0, sell_excess = 0.0;
    auto place = [&](bool buys, int count, double quote) {
        if (count == 0) return;
        (buys ? buyers : sellers) += count;
        (buys ? buy_excess : sell_excess) += count * (quote - q.noise);
    };
    place(pos.fundamentalist_buys, pop.fundamentalist, q.fundamentalist);
    place(pos.speculator_buys, pop.speculator, q.speculator);

    BidAsk out;
    out.bid = prevailing_price(q.noise, buyers, sellers, buy_excess);
    out.ask = prevailing_price(q.noise, sellers, buyers, sell_excess);
    out.mid = (out.bid + out.ask) / 2.0;
    return out;
}

inline BidAsk event_bid_ask(EventLabel event, const HeteroPopulation& pop, double q_noise, double q_fund,
                            double q_spec) {
    return book_prices(positions_of(event), pop, {q_noise, q_fund, q_spec});
}

struct HeteroPeriodRecord {
    int t = 0;
    EventLabel event = EventLabel::E1;
    double imbalance = 0.0;
    double cumulative_imbalance = 0.0;
    double bid = 0.0;
    double ask = 0.0;
    double mid = 0.0;
    double q_noise = 0.0;
    double q_fund = 0.0;
    double q_spec = 0.0;
    BeliefState beliefs;
};

struct HeteroResult {
    PricePath path;
    std::vector<HeteroPeriodRecord> records;
};

namespace detail {

inline void require_even_noise_split(const AssetSpec& asset, const char* which) {
    if (asset.phi != 0.0)
        throw ConfigError(std::string(which) +
                          ": noise traders must buy with probability 0.5 in this model (phi = 0)");
}

// Appends one period to `out`; returns the mid price.
inline double push_period(HeteroResult& out, int t, double fv, EventLabel event, const HeteroPopulation& pop,
                          const Quotes& q, const BeliefState& beliefs) {
    const auto ba = book_prices(positions_of(event), pop, q);
    HeteroPeriodRecord rec;
    rec.t = t;
    rec.event = event;
    rec.imbalance = event_imbalance(event, pop);
    rec.cumulative_imbalance =
        (out.records.empty() ? 0.0 : out.records.back().cumulative_imbalance) + rec.imbalance;
    rec.bid = ba.bid;
    rec.ask = ba.ask;
    rec.mid = ba.mid;
    rec.q_noise = q.noise;
    rec.q_fund = q.fundamentalist;
    rec.q_spec = q.speculator;
    rec.beliefs = beliefs;
    out.records.push_back(rec);

    PeriodRecord r;
    r.t = t;
    r.fv = fv;
    r.quote = q.noise;
    r.price = ba.mid;
    r.bid = ba.bid;
    r.ask = ba.ask;
    r.imbalance = rec.imbalance;
    r.event = event;
    out.path.periods.push_back(r);
    return ba.mid;
}

}  // namespace detail

/// Single-asset path seeded with p_0 = FV_1 and l_0 = FV_1 + dbar. Each
/// period updates beliefs from the previous mid, classifies the event, and
/// prices the book; the path price is the mid (bid + ask) / 2 even when the
/// spread is crossed.
inline HeteroResult hetero_price_path(const AssetSpec& asset, const HeteroPopulation& pop,
                                      const StrategyParams& params, int horizon) {
    if (horizon < 1) throw DomainError("hetero_price_path: horizon must be >= 1");
    asset.validate(horizon);
    pop.validate();
    params.validate();
    detail::require_even_noise_split(asset, "hetero_price_path");

    HeteroResult out;
    out.path.periods.reserve(static_cast<std::size_t>(horizon));
    out.records.reserve(static_cast<std::size_t>(horizon));

    const double dbar = asset.mean_dividend();
    BeliefState beliefs = initial_beliefs(asset, horizon);
    double prev_mid = fundamental_value(asset, 1, horizon);
    for (int t = 1; t <= horizon; ++t) {
        const double fv = fundamental_value(asset, t, horizon);
        beliefs = update_beliefs(beliefs, prev_mid, fv, continuation_value(asset, t + 1, horizon), params, dbar);
        const Quotes q{noise_quote_mean(asset, fv, prev_mid), (beliefs.anchor + fv) / 2.0,
                       (beliefs.expected_next + beliefs.expected_price) / 2.0};
        prev_mid = detail::push_period(out, t, fv, classify_event(beliefs, fv), pop, q, beliefs);
    }
    annotate_rd(out.path);
    return out;
}

/// Open spread (ask > bid) criterion for J_F = J_S with alpha_f = 1, gamma1 = 0:
/// gamma2 > 2 FV_t / (2 FV_t - dbar).
inline double spread_threshold(double fv_t, double mean_div) {
    if (!(2.0 * fv_t > mean_div)) throw DomainError("spread_condition: requires 2 * FV_t > mean dividend");
    return 2.0 * fv_t / (2.0 * fv_t - mean_div);
}

inline bool spread_condition(double fv_t, double mean_div, double gamma2) {
    return gamma2 > spread_threshold(fv_t, mean_div);
}

/// Closed-form prevailing prices when alpha_f = 1 and gamma1 = 0 (event E1
/// every period): fundamentalists quote FV_t, speculators g2 * (FV_t - dbar / 2).
inline BidAsk limit_case_bid_ask(const HeteroPopulation& pop, double q_noise, double fv_t, double mean_div,
                                 double gamma2) {
    const double h = 0.5 * pop.noise;
    BidAsk out;
    out.ask = (h * q_noise + pop.speculator * gamma2 * (fv_t - 0.5 * mean_div)) / (h + pop.fundamentalist);
    out.bid = (h * q_noise + pop.fundamentalist * fv_t) / (h + pop.speculator);
    out.mid = (out.bid + out.ask) / 2.0;
    return out;
}

/// Mid price of the limit case with J_F = J_S:
/// [J_N q_t + J_F (FV_t + g2 (FV_t - dbar / 2))] / (J_N + 2 J_F).
inline double limit_case_mid(const HeteroPopulation& pop, double q_noise, double fv_t, double mean_div,
                             double gamma2) {
    return (pop.noise * q_noise + pop.fundamentalist * (fv_t + gamma2 * (fv_t - 0.5 * mean_div))) /
           (pop.noise + 2.0 * pop.fundamentalist);
}

enum class Asset2Mode { FactorDirectional, FactorMarketNeutral, SameStrategy };

inline std::string_view to_string(Asset2Mode m) {
    switch (m) {
        case Asset2Mode::FactorDirectional: return "factor_directional";
        case Asset2Mode::FactorMarketNeutral: return "factor_market_neutral";
        case Asset2Mode::SameStrategy: return "same_strategy";
    }
    return "?";
}

struct HeteroTwoAssetResult {
    PricePath path_1;
    PricePath path_2;
    std::vector<bool> equilibrium_1;
    std::vector<bool> equilibrium_2;
    std::vector<HeteroPeriodRecord> records_1;
    std::vector<HeteroPeriodRecord> records_2;
};

/// Two-asset market where fundamentalists and speculators trade asset 1 by
/// their strategies and choose their asset-2 side either through a market
/// factor (everyone then quotes the asset-2 noise quote) or by running the
/// same strategy on asset 2 with its own parameters.
inline HeteroTwoAssetResult two_asset_hetero_paths(const AssetSpec& asset1, const AssetSpec& asset2,
                                                   const HeteroPopulation& pop, const StrategyParams& params1,
                                                   const std::optional<StrategyParams>& params2, Asset2Mode mode,
                                                   int horizon) {
    if (horizon < 1) throw DomainError("two_asset_hetero_paths: horizon must be >= 1");
    asset2.validate(horizon);
    detail::require_even_noise_split(asset2, "two_asset_hetero_paths (asset 2)");

    HeteroTwoAssetResult out;
    auto first = hetero_price_path(asset1, pop, params1, horizon);

    HeteroResult second;
    if (mode == Asset2Mode::SameStrategy) {
        if (!params2) throw ConfigError("two_asset_hetero_paths: same_strategy mode needs asset-2 strategy parameters");
        second = hetero_price_path(asset2, pop, *params2, horizon);
    } else {
        const bool flip = mode == Asset2Mode::FactorMarketNeutral;
        double prev_mid = fundamental_value(asset2, 1, horizon);
        for (int t = 1; t <= horizon; ++t) {
            const auto p1 = positions_of(first.records[static_cast<std::size_t>(t - 1)].event);
            const Positions p2{p1.fundamentalist_buys != flip, p1.speculator_buys != flip};
            const double fv = fundamental_value(asset2, t, horizon);
            const double q = noise_quote_mean(asset2, fv, prev_mid);
            prev_mid = detail::push_period(second, t, fv, event_of(p2), pop, {q, q, q}, BeliefState{});
        }
        annotate_rd(second.path);
    }

    for (const auto& r : first.records) out.equilibrium_1.push_back(r.bid == r.ask);
    for (const auto& r : second.records) out.equilibrium_2.push_back(r.bid == r.ask);
    out.path_1 = std::move(first.path);
    out.records_1 = std::move(first.records);
    out.path_2 = std::move(second.path);
    out.records_2 = std::move(second.records);
    return out;
}

enum class HeteroSecondAxis { Kappa2, Gamma22 };

struct HeteroGrid {
    std::vector<double> noise;   ///< J_N values; J_F = J_S = (N - J_N) / 2
    std::vector<double> second;  ///< kappa_2 or gamma_{2,2} values
    HeteroSecondAxis axis = HeteroSecondAxis::Kappa2;
    int total = 100;
};

/// RD_1 and RD_2 over (J_N, kappa_2) or (J_N, gamma_{2,2}).
inline SurfaceTable hetero_rd_surface(const AssetSpec& asset1, const AssetSpec& asset2,
                                      const StrategyParams& params1, const std::optional<StrategyParams>& params2,
                                      Asset2Mode mode, int horizon, const HeteroGrid& grid, unsigned threads = 0) {
    const std::string second = grid.axis == HeteroSecondAxis::Kappa2 ? "kappa_2" : "gamma2_2";
    return sweep_grid(
        {"noise", second}, {grid.noise, grid.second}, {"rd_1", "rd_2"},
        [&](const std::vector<double>& c) {
            const double jn = c[0];
            const double rest = grid.total - jn;
            if (jn != std::floor(jn) || jn < 0.0 || rest < 0.0 || std::fmod(rest, 2.0) != 0.0)
                throw ConfigError("infeasible cell: J_F = J_S = (N - J_N) / 2 must be a nonnegative integer");
            const HeteroPopulation pop{static_cast<int>(jn), static_cast<int>(rest / 2), static_cast<int>(rest / 2)};
            AssetSpec a2 = asset2;
            std::optional<StrategyParams> p2 = params2;
            if (grid.axis == HeteroSecondAxis::Kappa2) {
                a2.kappa = c[1];
            } else {
                if (!p2) p2 = StrategyParams{};
                p2->gamma2 = c[1];
            }
            auto r = two_asset_hetero_paths(asset1, a2, pop, params1, p2, mode, horizon);
            return std::vector<double>{r.path_1.rd, r.path_2.rd};
        },
        threads);
}

}  // namespace bubblemarket
