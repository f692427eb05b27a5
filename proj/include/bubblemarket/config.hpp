#pragma once

// Experiment configuration files: sectioned `key = value` text.
//
//   # comment
//   [market]
//   model = homogeneous
//   periods = 15
//
//   [asset.1]
//   kappa = 4
//   alpha = 0.85
//
// Every key is addressed as "<section>.<key>" (asset.1.kappa), which is also
// the syntax of command-line overrides and of sweep axes:
//
//   [sweep]
//   asset.1.kappa = 3, 4, 5

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "factor.hpp"
#include "hetero.hpp"
#include "market_core.hpp"
#include "monte_carlo.hpp"

namespace bubblemarket {

class ParseError : public std::runtime_error {
public:
    /// line 0 marks a command-line override.
    ParseError(int line, int column, const std::string& message)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ", column " + std::to_string(column) +
                                            ": " + message
                                      : "override: " + message),
          line_(line),
          column_(column),
          message_(message) {}

    [[nodiscard]] int line() const { return line_; }
    [[nodiscard]] int column() const { return column_; }
    [[nodiscard]] const std::string& message() const { return message_; }

private:
    int line_;
    int column_;
    std::string message_;
};

struct ConfigEntry {
    std::string value;
    int line = 0;  ///< 0 when set from the command line
};

/// Flat key/value store that remembers first-insertion order (sweep axes are
/// taken in the order they appear).
class RawConfig {
public:
    void set(const std::string& key, std::string value, int line = 0) {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            order_.push_back(key);
            entries_.emplace(key, ConfigEntry{std::move(value), line});
        } else {
            it->second = {std::move(value), line};
        }
    }

    [[nodiscard]] const ConfigEntry* find(std::string_view key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? nullptr : &it->second;
    }

    [[nodiscard]] bool contains(std::string_view key) const { return find(key) != nullptr; }
    [[nodiscard]] const std::vector<std::string>& keys() const { return order_; }

private:
    std::vector<std::string> order_;
    std::map<std::string, ConfigEntry, std::less<>> entries_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

// Column (1-based) of the first character that cannot appear in a name, or 0.
inline std::size_t bad_name_char(std::string_view s) {
    for (std::size_t i = 0; i < s.size(); ++i)
        if (!is_name_char(s[i])) return i + 1;
    return 0;
}

}  // namespace detail

/// Parses configuration text. Errors carry 1-based line and column.
inline RawConfig parse_config(std::string_view text) {
    RawConfig out;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        // strip comments: a '#' or ';' at line start, or preceded by whitespace
        for (std::size_t i = 0; i < line.size(); ++i) {
            if ((line[i] == '#' || line[i] == ';') &&
                (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1])))) {
                line = line.substr(0, i);
                break;
            }
        }
        const auto body = detail::trim(line);
        if (body.empty()) continue;
        const int indent = static_cast<int>(line.find_first_not_of(" \t"));

        if (body.front() == '[') {
            if (body.back() != ']')
                throw ParseError(line_no, indent + static_cast<int>(body.size()) + 1,
                                 "unterminated section header, expected ']'");
            const auto name = detail::trim(body.substr(1, body.size() - 2));
            if (name.empty()) throw ParseError(line_no, indent + 2, "empty section name");
            if (auto bad = detail::bad_name_char(name))
                throw ParseError(line_no, static_cast<int>(line.find(name)) + static_cast<int>(bad),
                                 "invalid character in section name");
            section = std::string(name);
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, indent + 1, "expected 'key = value'");
        const auto key = detail::trim(line.substr(0, eq));
        if (key.empty()) throw ParseError(line_no, indent + 1, "missing key before '='");
        if (auto bad = detail::bad_name_char(key))
            throw ParseError(line_no, indent + static_cast<int>(bad), "invalid character in key");
        const auto value = detail::trim(line.substr(eq + 1));
        if (value.empty()) throw ParseError(line_no, static_cast<int>(eq) + 2, "missing value after '='");
        if (section.empty()) throw ParseError(line_no, indent + 1, "key outside of any [section]");

        const std::string full = section + "." + std::string(key);
        if (const auto* prev = out.find(full))
            throw ParseError(line_no, indent + 1,
                             "duplicate key '" + full + "' (first set on line " + std::to_string(prev->line) + ")");
        out.set(full, std::string(value), line_no);
    }
    return out;
}

inline RawConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// Applies one `key=value` override.
inline void apply_override(RawConfig& cfg, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw ParseError(0, 1, "expected key=value, got '" + std::string(assignment) + "'");
    const auto key = detail::trim(assignment.substr(0, eq));
    const auto value = detail::trim(assignment.substr(eq + 1));
    if (key.empty() || detail::bad_name_char(key) || key.find('.') == std::string_view::npos)
        throw ParseError(0, 1, "invalid key '" + std::string(key) + "'");
    if (value.empty()) throw ParseError(0, static_cast<int>(eq) + 2, "missing value for '" + std::string(key) + "'");
    cfg.set(std::string(key), std::string(value), 0);
}

// ---------------------------------------------------------------------------
// Key registry

enum class ValueKind { Integer, Number, NumberList, Word, Text };

inline std::optional<ValueKind> key_kind(std::string_view key) {
    static const std::map<std::string, ValueKind, std::less<>> table = [] {
        std::map<std::string, ValueKind, std::less<>> m{
            {"market.model", ValueKind::Word},
            {"market.periods", ValueKind::Integer},
            {"population.total", ValueKind::Integer},
            {"strategy.asset2_mode", ValueKind::Word},
            {"simulation.sessions", ValueKind::Integer},
            {"simulation.seed", ValueKind::Integer},
            {"simulation.threads", ValueKind::Integer},
            {"simulation.price_rule", ValueKind::Word},
            {"simulation.funding", ValueKind::Number},
            {"output.path", ValueKind::Text},
            {"output.format", ValueKind::Word},
            {"output.grid", ValueKind::Text},
        };
        for (const char* a : {"asset.1.", "asset.2."}) {
            m[std::string(a) + "dividends"] = ValueKind::NumberList;
            for (const char* k : {"terminal_value", "kappa", "alpha", "phi", "pi"})
                m[std::string(a) + k] = ValueKind::Number;
        }
        for (const char* k : {"noise", "directional", "market_neutral", "fundamentalist", "speculator"}) {
            m[std::string("population.") + k] = ValueKind::Integer;
            m[std::string("population.") + k + "_pct"] = ValueKind::Number;
        }
        for (const char* s : {"strategy.", "strategy.2."})
            for (const char* k : {"alpha_f", "gamma1", "gamma2"}) m[std::string(s) + k] = ValueKind::Number;
        return m;
    }();
    auto it = table.find(key);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

inline bool is_sweepable(std::string_view key) {
    const auto k = key_kind(key);
    return k && (*k == ValueKind::Integer || *k == ValueKind::Number);
}

inline std::optional<double> parse_number(std::string_view s) {
    s = detail::trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<long long> parse_integer(std::string_view s) {
    s = detail::trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        out.emplace_back(detail::trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                      : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Typed experiment description

enum class ModelKind { Homogeneous, FactorTwoAsset, HeteroSingle, HeteroTwoAsset, MonteCarlo };

inline std::string_view to_string(ModelKind m) {
    switch (m) {
        case ModelKind::Homogeneous: return "homogeneous";
        case ModelKind::FactorTwoAsset: return "factor_two_asset";
        case ModelKind::HeteroSingle: return "hetero_single";
        case ModelKind::HeteroTwoAsset: return "hetero_two_asset";
        case ModelKind::MonteCarlo: return "monte_carlo";
    }
    return "?";
}

enum class OutputFormat { Csv, Tsv };

struct SweepAxis {
    std::string key;
    std::vector<std::string> tokens;  ///< substituted verbatim into each cell
    std::vector<double> values;
};

struct SimulationSettings {
    int sessions = 1000;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    SessionPriceRule price_rule = SessionPriceRule::QuoteWeighted;
    std::optional<double> funding;
};

struct OutputSpec {
    std::string path = "-";  ///< "-" is standard output
    OutputFormat format = OutputFormat::Csv;
    std::string grid;  ///< contour grid file for sweeps; empty derives it from path
};

struct ExperimentConfig {
    ModelKind model = ModelKind::Homogeneous;
    MarketSpec market;
    std::optional<double> pi1_constant;
    FactorPopulation factor_population;
    HeteroPopulation hetero_population;
    bool hetero_agents = false;  ///< monte_carlo: fundamentalists/speculators instead of factor traders
    StrategyParams strategy;
    std::optional<StrategyParams> strategy2;
    Asset2Mode asset2_mode = Asset2Mode::FactorDirectional;
    SimulationSettings simulation;
    std::vector<SweepAxis> sweep;
    OutputSpec output;

    [[nodiscard]] SimulationConfig simulation_config() const {
        SimulationConfig s;
        s.sessions = simulation.sessions;
        s.seed = simulation.seed;
        if (hetero_agents) {
            s.population = hetero_population;
            s.strategy = strategy;
        } else {
            s.population = factor_population;
        }
        s.market = market;
        s.price_rule = simulation.price_rule;
        s.funding = simulation.funding;
        s.threads = simulation.threads;
        return s;
    }
};

struct Violation {
    std::string key;
    std::string message;
};

struct Interpretation {
    ExperimentConfig config;
    std::vector<Violation> violations;

    [[nodiscard]] bool ok() const { return violations.empty(); }
};

namespace detail {

class Reader {
public:
    Reader(const RawConfig& raw, std::vector<Violation>& v) : raw_(raw), v_(v) {}

    [[nodiscard]] bool has(std::string_view key) const { return raw_.contains(key); }

    std::optional<double> number(const std::string& key) {
        const auto* e = raw_.find(key);
        if (!e) return std::nullopt;
        auto n = parse_number(e->value);
        if (!n) fail(key, "expected a number, got '" + e->value + "'");
        return n;
    }

    std::optional<long long> integer(const std::string& key) {
        const auto* e = raw_.find(key);
        if (!e) return std::nullopt;
        auto n = parse_integer(e->value);
        if (!n) fail(key, "expected an integer, got '" + e->value + "'");
        return n;
    }

    std::optional<std::vector<double>> numbers(const std::string& key) {
        const auto* e = raw_.find(key);
        if (!e) return std::nullopt;
        std::vector<double> out;
        for (const auto& tok : split_list(e->value)) {
            auto n = parse_number(tok);
            if (!n) {
                fail(key, "expected a comma-separated list of numbers, got '" + e->value + "'");
                return std::nullopt;
            }
            out.push_back(*n);
        }
        return out;
    }

    std::optional<std::string> word(const std::string& key, std::initializer_list<std::string_view> allowed) {
        const auto* e = raw_.find(key);
        if (!e) return std::nullopt;
        if (std::find(allowed.begin(), allowed.end(), e->value) != allowed.end()) return e->value;
        std::string list;
        for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
        fail(key, "'" + e->value + "' is not one of: " + list);
        return std::nullopt;
    }

    std::optional<std::string> text(const std::string& key) {
        const auto* e = raw_.find(key);
        if (!e) return std::nullopt;
        return e->value;
    }

    void fail(const std::string& key, std::string message) { v_.push_back({key, std::move(message)}); }

private:
    const RawConfig& raw_;
    std::vector<Violation>& v_;
};

inline std::string field_key(const std::string& prefix, const std::string& message) {
    const auto word = message.substr(0, message.find(' '));
    if (word == "dividend") return prefix + "dividends";
    return prefix + word;
}

inline AssetSpec read_asset(Reader& r, int index, int periods, std::string_view model) {
    const std::string p = "asset." + std::to_string(index) + ".";
    AssetSpec a = index == 1 ? speculative_asset(0.0, 0.0) : value_asset(0.0, 0.0);
    if (auto d = r.numbers(p + "dividends")) a.dividend_support = *d;
    if (auto v = r.number(p + "terminal_value")) a.terminal_value = *v;
    for (const char* k : {"kappa", "alpha"})
        if (!r.has(p + k)) r.fail(p + k, "required by model " + std::string(model));
    auto kappa = r.number(p + "kappa");
    auto alpha = r.number(p + "alpha");
    a.kappa = kappa.value_or(1.0);
    a.alpha = alpha.value_or(0.5);
    if (auto v = r.number(p + "phi")) a.phi = *v;
    for (const auto& msg : a.violations(periods)) {
        const auto key = field_key(p, msg);
        if ((!kappa && key == p + "kappa") || (!alpha && key == p + "alpha")) continue;
        r.fail(key, msg);
    }
    return a;
}

inline StrategyParams read_strategy(Reader& r, const std::string& prefix, StrategyParams base) {
    if (auto v = r.number(prefix + "alpha_f")) base.alpha_f = *v;
    if (auto v = r.number(prefix + "gamma1")) base.gamma1 = *v;
    if (auto v = r.number(prefix + "gamma2")) base.gamma2 = *v;
    for (const auto& msg : base.violations()) r.fail(field_key(prefix, msg), msg);
    return base;
}

// Resolves three population counts from explicit counts, *_pct shares of
// population.total, and the model's fill-in rule for omitted groups.
inline std::array<int, 3> read_counts(Reader& r, const std::array<const char*, 3>& names, bool split_last_two) {
    const auto total = r.integer("population.total");
    std::array<std::optional<long long>, 3> c;
    for (std::size_t i = 0; i < 3; ++i) {
        const std::string key = std::string("population.") + names[i];
        if (r.has(key)) {
            c[i] = r.integer(key);
            if (!c[i]) c[i] = 0;
            if (r.has(key + "_pct")) r.fail(key + "_pct", "conflicts with " + key);
        } else if (r.has(key + "_pct")) {
            const auto pct = r.number(key + "_pct");
            if (!pct) {
                c[i] = 0;
            } else if (!total) {
                r.fail(key + "_pct", "needs population.total");
                c[i] = 0;
            } else {
                const double n = *pct * static_cast<double>(*total) / 100.0;
                const double rounded = std::round(n);
                if (std::abs(n - rounded) > 1e-9) {
                    r.fail(key + "_pct", "does not give an integer number of traders out of " +
                                             std::to_string(*total));
                }
                c[i] = static_cast<long long>(rounded);
            }
        }
    }

    const auto missing = static_cast<int>(std::count(c.begin(), c.end(), std::nullopt));
    if (total && split_last_two && !c[1] && !c[2]) {
        const long long rest = *total - c[0].value_or(0);
        if (rest < 0 || rest % 2 != 0) {
            r.fail("population.total",
                   "cannot split the non-noise remainder " + std::to_string(rest) + " evenly between " +
                       names[1] + " and " + names[2]);
        }
        c[1] = c[2] = std::max(rest, 0LL) / 2;
    } else if (total && missing == 1) {
        long long known = 0;
        for (const auto& x : c) known += x.value_or(0);
        for (std::size_t i = 0; i < 3; ++i) {
            if (!c[i]) {
                c[i] = *total - known;
                if (*c[i] < 0)
                    r.fail(std::string("population.") + names[i],
                           "derived count " + std::to_string(*c[i]) + " is negative");
            }
        }
    }

    std::array<int, 3> out{};
    long long sum = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        out[i] = static_cast<int>(c[i].value_or(0));
        sum += out[i];
        if (out[i] < 0) r.fail(std::string("population.") + names[i], "trader counts must be nonnegative");
    }
    if (total && sum != *total)
        r.fail("population.total", "population counts sum to " + std::to_string(sum) + " but population.total is " +
                                       std::to_string(*total));
    if (sum <= 0) r.fail("population", "population must contain at least one trader");
    return out;
}

}  // namespace detail

/// Builds the typed configuration of a single run (sweep entries are only
/// recorded, not applied). Every problem found is reported; the returned
/// config is meaningful only when no violations were found.
inline Interpretation interpret(const RawConfig& raw) {
    Interpretation out;
    auto& cfg = out.config;
    detail::Reader r(raw, out.violations);

    for (const auto& key : raw.keys()) {
        if (key.rfind("sweep.", 0) == 0) continue;
        if (!key_kind(key)) r.fail(key, "unknown key");
    }

    const auto model = r.word("market.model",
                              {"homogeneous", "factor_two_asset", "hetero_single", "hetero_two_asset", "monte_carlo"});
    if (!raw.contains("market.model")) r.fail("market.model", "required");
    if (model) {
        for (auto m : {ModelKind::Homogeneous, ModelKind::FactorTwoAsset, ModelKind::HeteroSingle,
                       ModelKind::HeteroTwoAsset, ModelKind::MonteCarlo})
            if (to_string(m) == *model) cfg.model = m;
    }
    const std::string model_name(to_string(cfg.model));

    if (auto p = r.integer("market.periods")) {
        if (*p < 1) r.fail("market.periods", "must be >= 1");
        cfg.market.periods = static_cast<int>(std::max(*p, 1LL));
    }
    const int T = cfg.market.periods;

    bool any_asset2 = false;
    for (const auto& key : raw.keys()) any_asset2 |= key.rfind("asset.2.", 0) == 0;
    const std::size_t n_assets =
        (cfg.model == ModelKind::FactorTwoAsset || cfg.model == ModelKind::HeteroTwoAsset ||
         (cfg.model == ModelKind::MonteCarlo && any_asset2))
            ? 2
            : 1;
    for (std::size_t i = 1; i <= n_assets; ++i)
        cfg.market.assets.push_back(detail::read_asset(r, static_cast<int>(i), T, model_name));

    const bool hetero_model = cfg.model == ModelKind::HeteroSingle || cfg.model == ModelKind::HeteroTwoAsset;
    bool hetero_keys = false;
    for (const char* k : {"fundamentalist", "speculator"})
        hetero_keys |= raw.contains(std::string("population.") + k) ||
                       raw.contains(std::string("population.") + k + "_pct");
    cfg.hetero_agents = hetero_model || (cfg.model == ModelKind::MonteCarlo && hetero_keys);

    if (cfg.model != ModelKind::Homogeneous) {
        if (cfg.hetero_agents) {
            const auto c = detail::read_counts(r, {"noise", "fundamentalist", "speculator"}, true);
            cfg.hetero_population = {c[0], c[1], c[2]};
        } else {
            const auto c = detail::read_counts(r, {"noise", "directional", "market_neutral"}, false);
            cfg.factor_population = {c[0], c[1], c[2]};
        }
    }

    if (cfg.hetero_agents) {
        cfg.strategy = detail::read_strategy(r, "strategy.", StrategyParams{});
        for (std::size_t i = 0; i < cfg.market.assets.size(); ++i)
            if (cfg.market.assets[i].phi != 0.0)
                r.fail("asset." + std::to_string(i + 1) + ".phi",
                       "must be 0 with fundamentalists and speculators (noise traders buy with probability 0.5)");
    }
    if (cfg.model == ModelKind::HeteroTwoAsset) {
        if (auto m = r.word("strategy.asset2_mode", {"factor_directional", "factor_market_neutral", "same_strategy"})) {
            for (auto mode : {Asset2Mode::FactorDirectional, Asset2Mode::FactorMarketNeutral, Asset2Mode::SameStrategy})
                if (to_string(mode) == *m) cfg.asset2_mode = mode;
        }
        if (cfg.asset2_mode == Asset2Mode::SameStrategy)
            cfg.strategy2 = detail::read_strategy(r, "strategy.2.", cfg.strategy);
    }

    if (cfg.model == ModelKind::FactorTwoAsset) {
        if (cfg.market.assets[1].phi != 0.0)
            r.fail("asset.2.phi", "must be 0 in the factor model (noise traders buy asset 2 with probability 0.5)");
        if (auto pi = r.number("asset.1.pi")) {
            if (!(*pi > 0.0 && *pi < 1.0)) r.fail("asset.1.pi", "must lie in the open interval (0,1)");
            cfg.pi1_constant = *pi;
        }
    } else if (raw.contains("asset.1.pi")) {
        r.fail("asset.1.pi", "only used by model factor_two_asset");
    }

    if (cfg.model == ModelKind::MonteCarlo) {
        auto& sim = cfg.simulation;
        if (auto v = r.integer("simulation.sessions")) {
            if (*v < 1) r.fail("simulation.sessions", "must be >= 1");
            sim.sessions = static_cast<int>(std::clamp<long long>(*v, 1, 1LL << 30));
        }
        if (auto v = r.integer("simulation.seed")) {
            if (*v < 0) r.fail("simulation.seed", "must be nonnegative");
            sim.seed = static_cast<std::uint64_t>(std::max(*v, 0LL));
        }
        if (auto v = r.integer("simulation.threads")) {
            if (*v < 0) r.fail("simulation.threads", "must be nonnegative (0 uses every core)");
            sim.threads = static_cast<unsigned>(std::clamp<long long>(*v, 0, 1024));
        }
        if (auto v = r.word("simulation.price_rule", {"quote_weighted", "mid"}))
            sim.price_rule = *v == "mid" ? SessionPriceRule::Mid : SessionPriceRule::QuoteWeighted;
        if (auto v = r.number("simulation.funding")) {
            if (*v < 0.0) r.fail("simulation.funding", "must be nonnegative");
            sim.funding = *v;
        }
        if (cfg.hetero_agents && n_assets != 1)
            r.fail("asset.2", "fundamentalists and speculators are simulated on one asset only");
        if (!sim.funding)
            for (std::size_t i = 0; i < cfg.market.assets.size(); ++i)
                if (!(cfg.market.assets[i].kappa > 1.0))
                    r.fail("asset." + std::to_string(i + 1) + ".kappa",
                           "default funding (kappa * FV_1 * T) requires kappa > 1; set simulation.funding instead");
    }

    if (auto v = r.text("output.path")) cfg.output.path = *v;
    if (auto v = r.word("output.format", {"csv", "tsv"})) cfg.output.format = *v == "tsv" ? OutputFormat::Tsv : OutputFormat::Csv;
    if (auto v = r.text("output.grid")) cfg.output.grid = *v;

    for (const auto& key : raw.keys()) {
        if (key.rfind("sweep.", 0) != 0) continue;
        SweepAxis axis;
        axis.key = key.substr(6);
        axis.tokens = split_list(raw.find(key)->value);
        for (const auto& tok : axis.tokens) {
            if (auto n = parse_number(tok)) axis.values.push_back(*n);
        }
        cfg.sweep.push_back(std::move(axis));
    }
    return out;
}

/// Sweep axes must name real numeric parameters with well-formed values.
inline std::vector<Violation> sweep_violations(const RawConfig& raw) {
    std::vector<Violation> out;
    for (const auto& key : raw.keys()) {
        if (key.rfind("sweep.", 0) != 0) continue;
        const auto target = key.substr(6);
        if (!key_kind(target)) {
            out.push_back({key, "sweep axis '" + target + "' is not a known parameter"});
            continue;
        }
        if (!is_sweepable(target)) {
            out.push_back({key, "sweep axis '" + target + "' is not numeric"});
            continue;
        }
        const bool integral = *key_kind(target) == ValueKind::Integer;
        for (const auto& tok : split_list(raw.find(key)->value)) {
            const bool good = integral ? parse_integer(tok).has_value() : parse_number(tok).has_value();
            if (!good) {
                out.push_back({key, std::string("'") + tok + "' is not " + (integral ? "an integer" : "a number")});
                break;
            }
        }
    }
    return out;
}

/// Raw config of one sweep cell: every axis key set to the cell's token.
inline RawConfig cell_config(const RawConfig& raw, const std::vector<SweepAxis>& axes,
                             const std::vector<std::size_t>& index) {
    RawConfig out = raw;
    for (std::size_t k = 0; k < axes.size(); ++k) out.set(axes[k].key, axes[k].tokens[index[k]], 0);
    return out;
}

/// Row-major index tuples over the axes, first axis slowest.
inline std::vector<std::vector<std::size_t>> cell_indices(const std::vector<SweepAxis>& axes) {
    std::vector<std::vector<double>> ranges;
    for (const auto& a : axes) {
        std::vector<double> r(a.tokens.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = static_cast<double>(i);
        ranges.push_back(std::move(r));
    }
    std::vector<std::vector<std::size_t>> out;
    if (axes.empty()) {
        out.emplace_back();
        return out;
    }
    for (const auto& p : grid_points(ranges)) {
        std::vector<std::size_t> idx;
        for (double d : p) idx.push_back(static_cast<std::size_t>(d));
        out.push_back(std::move(idx));
    }
    return out;
}

/// Every violated invariant of the file, checked on the first sweep cell so
/// that parameters supplied only through [sweep] count as present. An empty
/// result means the run will start; later cells that violate a constraint
/// are flagged in the output rather than aborting.
inline std::vector<Violation> validate_config(const RawConfig& raw) {
    auto out = sweep_violations(raw);
    if (!out.empty()) return out;
    auto base = interpret(raw);
    const auto& axes = base.config.sweep;
    const bool empty_axis = std::any_of(axes.begin(), axes.end(), [](const auto& a) { return a.tokens.empty(); });
    if (axes.empty() || empty_axis) return base.violations;
    auto first = interpret(cell_config(raw, axes, std::vector<std::size_t>(axes.size(), 0)));
    return first.violations;
}

}  // namespace bubblemarket
