#pragma once

// Agent-level Monte Carlo market with batch clearing. Every agent draws a
// side and posts one quote per asset and period; the book then forms
// prevailing prices from aggregate quote value:
//   bid = (sum of buyer quotes) / (seller count)
//   ask = (sum of seller quotes) / (buyer count)
// Averaging many independent sessions recovers the average price dynamics
// that the analytic models describe.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "factor.hpp"
#include "hetero.hpp"
#include "market_core.hpp"
#include "rng.hpp"
#include "sweep.hpp"

namespace bubblemarket {

enum class TraderType { Noise, Directional, MarketNeutral, Fundamentalist, Speculator };

struct AgentState {
    double cash = 0.0;
    long shares = 1;
    TraderType trader_type = TraderType::Noise;
};

enum class ClearingRule { Batch };

/// How the per-session period price (the next period's anchor) is formed.
enum class SessionPriceRule {
    /// (A * bid + B * ask) / (A + B): the mean of all posted quotes. Unbiased
    /// for the average quote at any population size.
    QuoteWeighted,
    /// (bid + ask) / 2. Carries an O(1/N) upward bias from the random
    /// buyer/seller count ratio, which compounds through the anchor.
    Mid,
};

using PopulationSpec = std::variant<FactorPopulation, HeteroPopulation>;

struct SimulationConfig {
    int sessions = 1000;
    std::uint64_t seed = 0;
    PopulationSpec population = FactorPopulation{};
    MarketSpec market;
    std::optional<StrategyParams> strategy;  ///< hetero populations only
    ClearingRule clearing = ClearingRule::Batch;
    SessionPriceRule price_rule = SessionPriceRule::QuoteWeighted;
    std::optional<double> funding;  ///< initial cash per agent; defaults to the solvency bound
    unsigned threads = 0;

    [[nodiscard]] int agents() const {
        return std::visit([](const auto& p) { return p.total(); }, population);
    }

    [[nodiscard]] std::vector<std::string> violations() const {
        std::vector<std::string> out;
        if (sessions < 1) out.emplace_back("sessions must be >= 1");
        if (market.periods < 1) out.emplace_back("periods must be >= 1");
        if (market.assets.empty() || market.assets.size() > 2) out.emplace_back("market needs one or two assets");
        for (const auto& a : market.assets)
            for (auto& v : a.violations(market.periods)) out.push_back("asset: " + v);
        auto pv = std::visit([](const auto& p) { return p.violations(); }, population);
        for (auto& v : pv) out.push_back("population: " + v);
        if (std::holds_alternative<HeteroPopulation>(population)) {
            if (!strategy) out.emplace_back("hetero population needs strategy parameters");
            else
                for (auto& v : strategy->violations()) out.push_back("strategy: " + v);
            if (market.assets.size() != 1) out.emplace_back("hetero population is simulated on one asset only");
        }
        if (funding && !(*funding >= 0.0)) out.emplace_back("funding must be nonnegative");
        if (!funding)
            for (const auto& a : market.assets)
                if (!(a.kappa > 1.0)) out.emplace_back("default funding bound requires kappa > 1");
        return out;
    }

    void validate() const {
        auto v = violations();
        if (!v.empty()) throw ConfigError("simulation: " + v.front());
    }

    /// Sum over assets of kappa_i * FV_{1,i} * T.
    [[nodiscard]] double cash_endowment() const {
        if (funding) return *funding;
        double total = 0.0;
        for (const auto& a : market.assets) total += endowment_bound(a, market.periods);
        return total;
    }
};

struct PeriodOutcome {
    int buyers = 0;
    int sellers = 0;
    double bid_value = 0.0;  ///< sum of buyer quotes
    double ask_value = 0.0;  ///< sum of seller quotes
    double bid = std::numeric_limits<double>::quiet_NaN();
    double ask = std::numeric_limits<double>::quiet_NaN();
    double mid = std::numeric_limits<double>::quiet_NaN();
    double price = 0.0;  ///< session price under the configured rule
    double max_quote = 0.0;
    bool excluded = false;  ///< no buyers or no sellers
};

struct CashViolation {
    int session = 0;
    int period = 0;
    int agent = 0;
    double cash = 0.0;
};

struct SessionOutcome {
    std::vector<std::vector<PeriodOutcome>> assets;  ///< [asset][period - 1]
    double min_cash = 0.0;
    std::optional<CashViolation> first_violation;
};

namespace detail {

inline std::vector<TraderType> roster(const PopulationSpec& pop) {
    std::vector<TraderType> out;
    auto add = [&](int n, TraderType t) { out.insert(out.end(), static_cast<std::size_t>(std::max(n, 0)), t); };
    if (const auto* f = std::get_if<FactorPopulation>(&pop)) {
        add(f->noise, TraderType::Noise);
        add(f->directional, TraderType::Directional);
        add(f->market_neutral, TraderType::MarketNeutral);
    } else {
        const auto& h = std::get<HeteroPopulation>(pop);
        add(h.noise, TraderType::Noise);
        add(h.fundamentalist, TraderType::Fundamentalist);
        add(h.speculator, TraderType::Speculator);
    }
    return out;
}

}  // namespace detail

/// Plays one session. Bids are charged against cash as if every bid filled,
/// which is the worst case for solvency; asks are never credited.
inline SessionOutcome run_session(const SimulationConfig& cfg, int session) {
    const int horizon = cfg.market.periods;
    const auto& assets = cfg.market.assets;
    const std::size_t n_assets = assets.size();
    const auto types = detail::roster(cfg.population);
    const bool hetero = std::holds_alternative<HeteroPopulation>(cfg.population);

    std::vector<AgentState> agents(types.size());
    for (std::size_t j = 0; j < types.size(); ++j) agents[j] = {cfg.cash_endowment(), 1, types[j]};

    SessionOutcome out;
    out.assets.assign(n_assets, std::vector<PeriodOutcome>(static_cast<std::size_t>(horizon)));
    out.min_cash = cfg.cash_endowment();

    std::vector<double> anchor(n_assets);
    for (std::size_t a = 0; a < n_assets; ++a) anchor[a] = fundamental_value(assets[a], 1, horizon);
    BeliefState beliefs = hetero ? initial_beliefs(assets[0], horizon) : BeliefState{};

    std::vector<char> side1(types.size());
    for (int t = 1; t <= horizon; ++t) {
        Positions group{};
        Quotes strategy_quotes{};
        if (hetero) {
            const double fv = fundamental_value(assets[0], t, horizon);
            beliefs = update_beliefs(beliefs, anchor[0], fv, continuation_value(assets[0], t + 1, horizon),
                                     *cfg.strategy, assets[0].mean_dividend());
            group = positions_of(classify_event(beliefs, fv));
            strategy_quotes = {0.0, (beliefs.anchor + fv) / 2.0,
                               (beliefs.expected_next + beliefs.expected_price) / 2.0};
        }

        for (std::size_t a = 0; a < n_assets; ++a) {
            const auto& asset = assets[a];
            const double fv = fundamental_value(asset, t, horizon);
            const double pi = buyer_probability(asset.phi, t);
            const double pi1 = buyer_probability(assets[0].phi, t);
            auto& po = out.assets[a][static_cast<std::size_t>(t - 1)];

            for (std::size_t j = 0; j < types.size(); ++j) {
                const DrawKey key(cfg.seed, static_cast<std::uint64_t>(session), static_cast<std::uint64_t>(t), j);
                bool buys = false;
                double quote = 0.0;
                const double noise_quote = (1.0 - asset.alpha) * key.uniform(2 * a + 1) * asset.kappa * fv +
                                           asset.alpha * anchor[a];
                switch (types[j]) {
                    case TraderType::Noise:
                        buys = key.bernoulli(2 * a, pi);
                        quote = noise_quote;
                        break;
                    case TraderType::Directional:
                    case TraderType::MarketNeutral:
                        if (a == 0) {
                            buys = key.bernoulli(0, pi1);
                            side1[j] = buys;
                        } else {
                            buys = (types[j] == TraderType::Directional) == static_cast<bool>(side1[j]);
                        }
                        quote = noise_quote;
                        break;
                    case TraderType::Fundamentalist:
                        buys = group.fundamentalist_buys;
                        quote = strategy_quotes.fundamentalist;
                        break;
                    case TraderType::Speculator:
                        buys = group.speculator_buys;
                        quote = strategy_quotes.speculator;
                        break;
                }
                po.max_quote = std::max(po.max_quote, quote);
                if (buys) {
                    ++po.buyers;
                    po.bid_value += quote;
                    auto& ag = agents[j];
                    ag.cash -= quote;
                    ag.shares += 1;
                    if (ag.cash < out.min_cash) out.min_cash = ag.cash;
                    if (ag.cash < 0.0 && !out.first_violation)
                        out.first_violation = CashViolation{session, t, static_cast<int>(j), ag.cash};
                } else {
                    ++po.sellers;
                    po.ask_value += quote;
                }
            }

            const int n = po.buyers + po.sellers;
            po.excluded = po.buyers == 0 || po.sellers == 0;
            if (!po.excluded) {
                po.bid = po.bid_value / po.sellers;
                po.ask = po.ask_value / po.buyers;
                po.mid = (po.bid + po.ask) / 2.0;
            }
            // the quote-weighted price is the mean posted quote, defined even for one-sided books
            const double quote_weighted = (po.bid_value + po.ask_value) / n;
            po.price = (cfg.price_rule == SessionPriceRule::Mid && !po.excluded) ? po.mid : quote_weighted;
            anchor[a] = po.price;
        }
    }
    return out;
}

struct PeriodStats {
    int t = 0;
    int sessions_used = 0;
    int excluded = 0;
    double price_mean = 0.0, price_se = 0.0;
    double mid_mean = 0.0, mid_se = 0.0;
    double quote_mean = 0.0, quote_se = 0.0;
    /// Pooled ratio estimators sum(value) / sum(count) with delta-method errors.
    double bid = 0.0, bid_se = 0.0;
    double ask = 0.0, ask_se = 0.0;
    double buyer_seller_ratio = 0.0, buyer_seller_ratio_se = 0.0;
    double buyer_fraction = 0.0, buyer_fraction_se = 0.0;
};

struct AssetSummary {
    std::vector<PeriodStats> periods;
    double max_quote = 0.0;
    double quote_bound = 0.0;  ///< kappa * FV_1
};

struct BankruptcyReport {
    bool solvent = true;
    double funding = 0.0;
    double worst_cash = 0.0;
    std::optional<CashViolation> first_violation;
};

struct MonteCarloSummary {
    int sessions = 0;
    int excluded_periods = 0;
    std::vector<AssetSummary> assets;
    BankruptcyReport solvency;
};

namespace detail {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& x) {
    MeanSe out;
    if (x.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    double s = 0.0;
    for (double v : x) s += v;
    out.mean = s / static_cast<double>(x.size());
    if (x.size() < 2) return out;
    double ss = 0.0;
    for (double v : x) ss += (v - out.mean) * (v - out.mean);
    out.se = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
    return out;
}

inline MeanSe pooled_ratio(const std::vector<double>& num, const std::vector<double>& den) {
    if (num.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    double sn = 0.0, sd = 0.0;
    for (std::size_t i = 0; i < num.size(); ++i) {
        sn += num[i];
        sd += den[i];
    }
    MeanSe out;
    out.mean = sn / sd;
    const double m = static_cast<double>(num.size());
    if (num.size() < 2) return out;
    double ss = 0.0;
    for (std::size_t i = 0; i < num.size(); ++i) {
        const double e = num[i] - out.mean * den[i];
        ss += e * e;
    }
    const double dbar = sd / m;
    out.se = std::sqrt(ss / (m - 1.0) / m) / dbar;
    return out;
}

inline std::vector<SessionOutcome> run_all_sessions(const SimulationConfig& cfg) {
    std::vector<SessionOutcome> outcomes(static_cast<std::size_t>(cfg.sessions));
    parallel_for(
        outcomes.size(), [&](std::size_t s) { outcomes[s] = run_session(cfg, static_cast<int>(s)); },
        cfg.threads);
    return outcomes;
}

inline BankruptcyReport solvency_of(const SimulationConfig& cfg, const std::vector<SessionOutcome>& outcomes) {
    BankruptcyReport r;
    r.funding = cfg.cash_endowment();
    r.worst_cash = r.funding;
    for (const auto& o : outcomes) {
        r.worst_cash = std::min(r.worst_cash, o.min_cash);
        if (o.first_violation && !r.first_violation) r.first_violation = o.first_violation;
    }
    r.solvent = !r.first_violation.has_value();
    return r;
}

}  // namespace detail

/// Runs `cfg.sessions` independent sessions and reduces them in session
/// order, so results are identical for any thread count.
inline MonteCarloSummary run_sessions(const SimulationConfig& cfg) {
    cfg.validate();
    const auto outcomes = detail::run_all_sessions(cfg);
    const int horizon = cfg.market.periods;
    const double n_agents = cfg.agents();

    MonteCarloSummary out;
    out.sessions = cfg.sessions;
    out.solvency = detail::solvency_of(cfg, outcomes);
    for (std::size_t a = 0; a < cfg.market.assets.size(); ++a) {
        AssetSummary as;
        as.quote_bound = cfg.market.assets[a].kappa * fundamental_value(cfg.market.assets[a], 1, horizon);
        for (int t = 1; t <= horizon; ++t) {
            std::vector<double> price, mid, quote, bid_v, ask_v, buyers, sellers, frac;
            PeriodStats ps;
            ps.t = t;
            for (const auto& o : outcomes) {
                const auto& po = o.assets[a][static_cast<std::size_t>(t - 1)];
                as.max_quote = std::max(as.max_quote, po.max_quote);
                if (po.excluded) {
                    ++ps.excluded;
                    continue;
                }
                price.push_back(po.price);
                mid.push_back(po.mid);
                quote.push_back((po.bid_value + po.ask_value) / n_agents);
                bid_v.push_back(po.bid_value);
                ask_v.push_back(po.ask_value);
                buyers.push_back(po.buyers);
                sellers.push_back(po.sellers);
                frac.push_back(po.buyers / n_agents);
            }
            ps.sessions_used = static_cast<int>(price.size());
            out.excluded_periods += ps.excluded;
            auto m = detail::mean_se(price);
            ps.price_mean = m.mean;
            ps.price_se = m.se;
            m = detail::mean_se(mid);
            ps.mid_mean = m.mean;
            ps.mid_se = m.se;
            m = detail::mean_se(quote);
            ps.quote_mean = m.mean;
            ps.quote_se = m.se;
            m = detail::pooled_ratio(bid_v, sellers);
            ps.bid = m.mean;
            ps.bid_se = m.se;
            m = detail::pooled_ratio(ask_v, buyers);
            ps.ask = m.mean;
            ps.ask_se = m.se;
            m = detail::pooled_ratio(buyers, sellers);
            ps.buyer_seller_ratio = m.mean;
            ps.buyer_seller_ratio_se = m.se;
            m = detail::mean_se(frac);
            ps.buyer_fraction = m.mean;
            ps.buyer_fraction_se = m.se;
            as.periods.push_back(ps);
        }
        out.assets.push_back(std::move(as));
    }
    return out;
}

/// True iff no agent's cash goes negative in any session when every posted
/// bid is charged.
inline BankruptcyReport verify_no_bankruptcy(const SimulationConfig& cfg) {
    cfg.validate();
    return detail::solvency_of(cfg, detail::run_all_sessions(cfg));
}

}  // namespace bubblemarket
