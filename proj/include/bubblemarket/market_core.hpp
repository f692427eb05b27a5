#pragma once

// Shared domain types and the closed-form building blocks used by every
// price model: fundamental value, weak-foresight buyer probability, the
// average noise-trader quote, the solvency endowment and the RD metric.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bubblemarket {

/// Input outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The market cannot form prevailing prices (one side of the book is empty).
class DegenerateMarketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model was configured outside the assumptions it is defined under.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// One tradeable asset: dividend process plus noise-trader behaviour.
struct AssetSpec {
    std::vector<double> dividend_support;
    double terminal_value = 0.0;
    double kappa = 1.0;  ///< confusion scale of the uniform quote component
    double alpha = 0.5;  ///< anchoring weight on the previous price
    double phi = 0.0;    ///< weak-foresight slope of the buyer probability

    [[nodiscard]] double mean_dividend() const {
        if (dividend_support.empty()) return 0.0;
        // smallest magnitudes first, so symmetric supports cancel to exactly 0
        auto d = dividend_support;
        std::sort(d.begin(), d.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
        return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
    }

    /// Human-readable list of violated invariants for a market of `periods`.
    [[nodiscard]] std::vector<std::string> violations(int periods) const {
        std::vector<std::string> out;
        if (dividend_support.empty()) out.emplace_back("dividend support must not be empty");
        if (!(kappa > 0.0)) out.emplace_back("kappa must be positive");
        if (!(alpha > 0.0 && alpha < 1.0)) out.emplace_back("alpha must lie in the open interval (0,1)");
        if (!(phi >= 0.0)) out.emplace_back("phi must be nonnegative");
        if (periods >= 1 && !(phi < 0.5 / periods))
            out.emplace_back("phi must lie in [0, 0.5/T)");
        return out;
    }

    void validate(int periods) const {
        auto v = violations(periods);
        if (!v.empty()) throw ConfigError("asset: " + v.front());
    }
};

/// Dividend supports of the reference two-asset market.
inline AssetSpec speculative_asset(double kappa, double alpha, double phi = 0.0) {
    return AssetSpec{{0.0, 0.10, 0.16, 0.22}, 1.80, kappa, alpha, phi};
}

inline AssetSpec value_asset(double kappa, double alpha, double phi = 0.0) {
    return AssetSpec{{-0.2, -0.1, 0.0, 0.1, 0.2}, 2.80, kappa, alpha, phi};
}

enum class InitialPriceRule { FundamentalValue };

struct MarketSpec {
    int periods = 15;
    std::vector<AssetSpec> assets;
    InitialPriceRule initial_price_rule = InitialPriceRule::FundamentalValue;
};

enum class EventLabel { E1, E2, E3, E4 };

inline std::string_view to_string(EventLabel e) {
    switch (e) {
        case EventLabel::E1: return "E1";
        case EventLabel::E2: return "E2";
        case EventLabel::E3: return "E3";
        case EventLabel::E4: return "E4";
    }
    return "?";
}

struct PeriodRecord {
    int t = 0;
    double fv = 0.0;
    double quote = 0.0;  ///< average noise-trader quote q_t
    double price = 0.0;
    double bid = 0.0;
    double ask = 0.0;
    double imbalance = 0.0;  ///< B_t / A_t - 1
    double rd_t = 0.0;
    std::optional<EventLabel> event;
};

struct PricePath {
    std::vector<PeriodRecord> periods;
    double rd = 0.0;

    [[nodiscard]] std::size_t size() const { return periods.size(); }
    [[nodiscard]] std::vector<double> prices() const {
        std::vector<double> out;
        out.reserve(periods.size());
        for (const auto& r : periods) out.push_back(r.price);
        return out;
    }
    [[nodiscard]] std::vector<double> fundamentals() const {
        std::vector<double> out;
        out.reserve(periods.size());
        for (const auto& r : periods) out.push_back(r.fv);
        return out;
    }
};

/// Expected demand (buyer count) and supply (seller count) of one book.
struct BookCounts {
    double demand = 0.0;
    double supply = 0.0;

    [[nodiscard]] double imbalance() const { return demand / supply - 1.0; }
};

/// FV_t = (T - t + 1) * mean_dividend + terminal_value, for 1 <= t <= T.
inline double fundamental_value(const AssetSpec& asset, int t, int horizon) {
    if (t < 1 || t > horizon)
        throw DomainError("fundamental_value: period " + std::to_string(t) + " outside [1, " +
                          std::to_string(horizon) + "]");
    return static_cast<double>(horizon - t + 1) * asset.mean_dividend() + asset.terminal_value;
}

/// Same formula extended one step past the horizon (FV_{T+1} = TV), which the
/// speculators' one-period-ahead expectation needs in the final period.
inline double continuation_value(const AssetSpec& asset, int t, int horizon) {
    if (t == horizon + 1) return asset.terminal_value;
    return fundamental_value(asset, t, horizon);
}

/// pi_t = max(0.5 - phi * t, 0).
inline double buyer_probability(double phi, int t) {
    return std::max(0.5 - phi * static_cast<double>(t), 0.0);
}

/// Mean quote (1 - alpha) * kappa * FV_t / 2 + alpha * previous price.
inline double noise_quote_mean(const AssetSpec& asset, double fv_t, double prev_price) {
    return (1.0 - asset.alpha) * asset.kappa * fv_t / 2.0 + asset.alpha * prev_price;
}

/// Cash that lets any agent post one bid per period for the whole session
/// without going negative: every quote stays below kappa * FV_1.
inline double endowment_bound(const AssetSpec& asset, int horizon) {
    if (!(asset.kappa > 1.0)) throw DomainError("endowment_bound: requires kappa > 1");
    return asset.kappa * fundamental_value(asset, 1, horizon) * static_cast<double>(horizon);
}

struct RdResult {
    std::vector<double> rd_t;
    double rd = 0.0;
};

/// Relative deviation of prices from fundamentals, normalised by |mean FV|.
inline RdResult rd_measure(std::span<const double> prices, std::span<const double> fundamentals) {
    if (prices.empty()) throw DomainError("rd_measure: empty path");
    if (prices.size() != fundamentals.size())
        throw DomainError("rd_measure: price and fundamental series differ in length");
    const double n = static_cast<double>(prices.size());
    const double fv_bar =
        std::abs(std::accumulate(fundamentals.begin(), fundamentals.end(), 0.0) / n);
    if (fv_bar == 0.0) throw DomainError("rd_measure: mean fundamental value is zero");
    RdResult out;
    out.rd_t.reserve(prices.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < prices.size(); ++i) {
        const double v = (prices[i] - fundamentals[i]) / fv_bar;
        out.rd_t.push_back(v);
        sum += v;
    }
    out.rd = sum / n;
    return out;
}

inline RdResult rd_measure(const PricePath& path) {
    const auto p = path.prices();
    const auto f = path.fundamentals();
    return rd_measure(p, f);
}

/// Fills rd_t on every record and the path-level average.
inline void annotate_rd(PricePath& path) {
    const auto rd = rd_measure(path);
    for (std::size_t i = 0; i < path.periods.size(); ++i) path.periods[i].rd_t = rd.rd_t[i];
    path.rd = rd.rd;
}

/// Price at which one side's aggregate quote value buys the other side's count.
///
/// `own_count` traders quote on this side, `other_count` on the opposite one.
/// Everyone is assumed to quote `base_quote` except for `excess_value`, the
/// summed deviation sum_j (q_j - base_quote) of the non-noise traders on this
/// side. Writing it as base * ratio + excess / other keeps balanced books
/// (ratio exactly 1, no excess) at exactly `base_quote`.
inline double prevailing_price(double base_quote, double own_count, double other_count,
                               double excess_value = 0.0) {
    if (!(other_count > 0.0))
        throw DegenerateMarketError("no counterparty: opposite side of the book is empty");
    return base_quote * (own_count / other_count) + excess_value / other_count;
}

}  // namespace bubblemarket
