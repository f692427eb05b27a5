#pragma once

// Runs a configured experiment (one cell, or every cell of a sweep) and
// renders the per-period result table and the contour grid.

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "factor.hpp"
#include "hetero.hpp"
#include "homogeneous.hpp"
#include "monte_carlo.hpp"
#include "sweep.hpp"

namespace bubblemarket {

/// %.12g, with "nan" / "inf" / "-inf" for non-finite values.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct ResultTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline void write_table(std::ostream& os, const ResultTable& table, OutputFormat format) {
    const char sep = format == OutputFormat::Tsv ? '\t' : ',';
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os << sep;
            os << cells[i];
        }
        os << '\n';
    };
    line(table.header);
    for (const auto& r : table.rows) line(r);
}

/// Column names of the per-period table, before the echoed sweep axes.
inline std::vector<std::string> table_columns(const ExperimentConfig& cfg) {
    std::vector<std::string> h{"run_id", "t"};
    auto add = [&](std::initializer_list<const char*> names, const std::string& suffix) {
        for (const char* n : names) h.push_back(n + suffix);
    };
    switch (cfg.model) {
        case ModelKind::Homogeneous:
            add({"fv", "quote", "price", "bid", "ask", "rd"}, "_1");
            add({"imbalance", "cum_imbalance"}, "");
            add({"equilibrium"}, "_1");
            break;
        case ModelKind::HeteroSingle:
            add({"fv", "quote", "price", "bid", "ask", "rd"}, "_1");
            add({"event", "imbalance", "cum_imbalance"}, "");
            add({"equilibrium"}, "_1");
            break;
        case ModelKind::FactorTwoAsset:
            for (const char* s : {"_1", "_2"})
                add({"fv", "quote", "price", "bid", "ask", "rd", "imbalance", "cum_imbalance", "equilibrium"}, s);
            break;
        case ModelKind::HeteroTwoAsset:
            for (const char* s : {"_1", "_2"})
                add({"fv", "quote", "price", "bid", "ask", "rd", "event", "imbalance", "cum_imbalance", "equilibrium"},
                    s);
            break;
        case ModelKind::MonteCarlo:
            for (std::size_t i = 1; i <= cfg.market.assets.size(); ++i)
                add({"fv", "price", "price_se", "mid", "mid_se", "bid", "bid_se", "ask", "ask_se", "rd",
                     "buyer_fraction", "buyer_fraction_se", "pi", "sessions_used", "excluded"},
                    "_" + std::to_string(i));
            break;
    }
    return h;
}

/// Outcome of one experiment cell.
struct CellResult {
    std::vector<std::vector<std::string>> rows;  ///< without run_id and echo columns
    std::vector<double> rd;                      ///< one per asset
    std::optional<MonteCarloSummary> monte_carlo;
};

namespace detail {

inline std::string flag(bool b) { return b ? "1" : "0"; }

// Cells for one asset of an analytic run, in table_columns order.
inline void analytic_cells(std::vector<std::string>& row, const PeriodRecord& r, double cum, bool eq,
                           const std::optional<std::string>& event) {
    for (double v : {r.fv, r.quote, r.price, r.bid, r.ask, r.rd_t}) row.push_back(format_number(v));
    if (event) row.push_back(*event);
    row.push_back(format_number(r.imbalance));
    row.push_back(format_number(cum));
    row.push_back(flag(eq));
}

inline void analytic_rows(CellResult& out, const std::vector<const PricePath*>& paths,
                          const std::vector<const std::vector<bool>*>& eq, bool with_events) {
    const std::size_t T = paths.front()->periods.size();
    std::vector<double> cum(paths.size(), 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        std::vector<std::string> row{std::to_string(t + 1)};
        for (std::size_t a = 0; a < paths.size(); ++a) {
            const auto& r = paths[a]->periods[t];
            cum[a] += r.imbalance;
            std::optional<std::string> ev;
            if (with_events) ev = std::string(to_string(*r.event));
            analytic_cells(row, r, cum[a], (*eq[a])[t], ev);
        }
        out.rows.push_back(std::move(row));
    }
    for (const auto* p : paths) out.rd.push_back(p->rd);
}

inline void monte_carlo_rows(CellResult& out, const ExperimentConfig& cfg, const MonteCarloSummary& mc) {
    const int T = cfg.market.periods;
    std::vector<std::vector<double>> rd_t;
    for (std::size_t a = 0; a < mc.assets.size(); ++a) {
        std::vector<double> prices, fvs;
        for (const auto& ps : mc.assets[a].periods) {
            if (ps.sessions_used == 0)
                throw DegenerateMarketError("every session had an empty book side at t=" + std::to_string(ps.t));
            prices.push_back(ps.price_mean);
            fvs.push_back(fundamental_value(cfg.market.assets[a], ps.t, T));
        }
        auto rd = rd_measure(prices, fvs);
        out.rd.push_back(rd.rd);
        rd_t.push_back(std::move(rd.rd_t));
    }
    for (int t = 1; t <= T; ++t) {
        std::vector<std::string> row{std::to_string(t)};
        for (std::size_t a = 0; a < mc.assets.size(); ++a) {
            const auto& asset = cfg.market.assets[a];
            const auto& ps = mc.assets[a].periods[static_cast<std::size_t>(t - 1)];
            for (double v : {fundamental_value(asset, t, T), ps.price_mean, ps.price_se, ps.mid_mean, ps.mid_se, ps.bid,
                             ps.bid_se, ps.ask, ps.ask_se, rd_t[a][static_cast<std::size_t>(t - 1)],
                             ps.buyer_fraction, ps.buyer_fraction_se})
                row.push_back(format_number(v));
            row.push_back(cfg.hetero_agents ? format_number(0.5) : format_number(buyer_probability(asset.phi, t)));
            row.push_back(std::to_string(ps.sessions_used));
            row.push_back(std::to_string(ps.excluded));
        }
        out.rows.push_back(std::move(row));
    }
}

}  // namespace detail

/// Runs one fully specified cell. Throws DegenerateMarketError (or
/// DomainError) when the market cannot form prices.
inline CellResult run_cell(const ExperimentConfig& cfg, unsigned threads = 0) {
    CellResult out;
    const int T = cfg.market.periods;
    const auto& assets = cfg.market.assets;
    switch (cfg.model) {
        case ModelKind::Homogeneous: {
            const auto r = average_price_path(assets[0], T);
            detail::analytic_rows(out, {&r.path}, {&r.in_equilibrium}, false);
            break;
        }
        case ModelKind::FactorTwoAsset: {
            const auto r = factor_price_paths(assets[0], assets[1], cfg.factor_population, T, cfg.pi1_constant);
            detail::analytic_rows(out, {&r.path_1, &r.path_2}, {&r.equilibrium_1, &r.equilibrium_2}, false);
            break;
        }
        case ModelKind::HeteroSingle: {
            const auto r = hetero_price_path(assets[0], cfg.hetero_population, cfg.strategy, T);
            std::vector<bool> eq;
            for (const auto& rec : r.records) eq.push_back(rec.bid == rec.ask);
            detail::analytic_rows(out, {&r.path}, {&eq}, true);
            break;
        }
        case ModelKind::HeteroTwoAsset: {
            const auto r = two_asset_hetero_paths(assets[0], assets[1], cfg.hetero_population, cfg.strategy,
                                                  cfg.strategy2, cfg.asset2_mode, T);
            detail::analytic_rows(out, {&r.path_1, &r.path_2}, {&r.equilibrium_1, &r.equilibrium_2}, true);
            break;
        }
        case ModelKind::MonteCarlo: {
            auto sim = cfg.simulation_config();
            if (threads) sim.threads = threads;
            out.monte_carlo = run_sessions(sim);
            detail::monte_carlo_rows(out, cfg, *out.monte_carlo);
            break;
        }
    }
    return out;
}

struct CellReport {
    std::size_t run_id = 0;
    std::vector<double> coords;  ///< sweep axis values
    std::optional<CellResult> result;
    std::optional<std::string> error;
    bool degenerate = false;  ///< error came from the market, not the configuration
};

struct ExperimentReport {
    ExperimentConfig base;
    std::vector<CellReport> cells;

    [[nodiscard]] std::size_t failed() const {
        std::size_t n = 0;
        for (const auto& c : cells) n += c.result ? 0 : 1;
        return n;
    }
};

/// Runs every cell of a validated configuration. Cells that violate a model
/// constraint or hit a degenerate market are recorded, never thrown.
inline ExperimentReport run_experiment(const RawConfig& raw) {
    ExperimentReport rep;
    rep.base = interpret(raw).config;
    const auto& axes = rep.base.sweep;
    const auto indices = cell_indices(axes);
    rep.cells.resize(indices.size());

    // Monte Carlo parallelises over sessions; analytic sweeps over cells.
    const bool mc = rep.base.model == ModelKind::MonteCarlo;
    const unsigned threads = rep.base.simulation.threads;
    parallel_for(
        indices.size(),
        [&](std::size_t i) {
            auto& cell = rep.cells[i];
            cell.run_id = i;
            for (std::size_t k = 0; k < axes.size(); ++k) cell.coords.push_back(axes[k].values[indices[i][k]]);
            const auto it = interpret(axes.empty() ? raw : cell_config(raw, axes, indices[i]));
            if (!it.ok()) {
                cell.error = it.violations.front().key + ": " + it.violations.front().message;
                return;
            }
            try {
                cell.result = run_cell(it.config, mc ? threads : 1);
            } catch (const ConfigError& e) {
                cell.error = e.what();
            } catch (const std::exception& e) {
                cell.error = e.what();
                cell.degenerate = true;
            }
        },
        mc ? 1 : threads);
    return rep;
}

inline ResultTable result_table(const ExperimentReport& rep) {
    ResultTable table;
    table.header = table_columns(rep.base);
    for (const auto& a : rep.base.sweep) table.header.push_back(a.key);
    for (const auto& cell : rep.cells) {
        if (!cell.result) continue;
        for (const auto& r : cell.result->rows) {
            std::vector<std::string> row{std::to_string(cell.run_id)};
            row.insert(row.end(), r.begin(), r.end());
            for (double c : cell.coords) row.push_back(format_number(c));
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

/// One row per sweep cell: axis values, average RD per asset, status.
inline ResultTable grid_table(const ExperimentReport& rep) {
    ResultTable table;
    for (const auto& a : rep.base.sweep) table.header.push_back(a.key);
    const std::size_t n_assets = rep.base.market.assets.size();
    for (std::size_t i = 1; i <= n_assets; ++i) table.header.push_back("rd_" + std::to_string(i));
    table.header.emplace_back("status");
    for (const auto& cell : rep.cells) {
        std::vector<std::string> row;
        for (double c : cell.coords) row.push_back(format_number(c));
        for (std::size_t i = 0; i < n_assets; ++i)
            row.push_back(cell.result && i < cell.result->rd.size() ? format_number(cell.result->rd[i]) : "nan");
        row.emplace_back(cell.result ? "ok" : "flagged");
        table.rows.push_back(std::move(row));
    }
    return table;
}

/// Grid file path: output.grid, else "<stem>.grid<ext>" next to output.path.
inline std::string grid_path(const OutputSpec& out) {
    if (!out.grid.empty()) return out.grid;
    if (out.path.empty() || out.path == "-") return {};
    const auto slash = out.path.find_last_of('/');
    const auto dot = out.path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return out.path + ".grid";
    return out.path.substr(0, dot) + ".grid" + out.path.substr(dot);
}

}  // namespace bubblemarket
