// bubblemarket: run, validate, sweep and simulate experiment configs.
//
// Exit codes: 0 success, 1 I/O failure, 2 parse or validation failure,
// 3 runtime degeneracy (a market side empty in every session, pi_t hitting 0).
// Failures print one JSON record on stderr.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bubblemarket/config.hpp"
#include "bubblemarket/experiment.hpp"

namespace bm = bubblemarket;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kIo = 1;
constexpr int kInvalid = 2;
constexpr int kDegenerate = 3;

struct Options {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> sessions;
    std::vector<std::string> overrides;
};

int report(int code, json record) {
    std::cerr << record.dump() << '\n';
    return code;
}

int io_error(const std::string& message) { return report(kIo, {{"status", "io_error"}, {"message", message}}); }

// Loads the file and applies --set/--seed/--sessions/--out. Returns an exit
// code on failure.
std::optional<int> load(const Options& o, bm::RawConfig& raw) {
    try {
        raw = bm::load_config(o.config);
        for (const auto& s : o.overrides) bm::apply_override(raw, s);
    } catch (const bm::ParseError& e) {
        json rec{{"status", "parse_error"}, {"file", o.config}, {"message", e.message()}};
        if (e.line() > 0) {
            rec["line"] = e.line();
            rec["column"] = e.column();
        }
        return report(kInvalid, rec);
    } catch (const std::exception& e) {
        return io_error(e.what());
    }
    if (o.seed) raw.set("simulation.seed", std::to_string(*o.seed));
    if (o.sessions) raw.set("simulation.sessions", std::to_string(*o.sessions));
    if (o.out) raw.set("output.path", *o.out);
    return std::nullopt;
}

json violations_json(const std::vector<bm::Violation>& v) {
    json arr = json::array();
    for (const auto& x : v) arr.push_back({{"key", x.key}, {"message", x.message}});
    return arr;
}

int write_to(const std::string& path, const bm::ResultTable& table, bm::OutputFormat fmt) {
    if (path.empty() || path == "-") {
        bm::write_table(std::cout, table, fmt);
        return kOk;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) return io_error("cannot write '" + path + "'");
    bm::write_table(os, table, fmt);
    return os ? kOk : io_error("write failed for '" + path + "'");
}

int cmd_validate(const Options& o) {
    bm::RawConfig raw;
    if (auto code = load(o, raw)) return *code;
    const auto v = bm::validate_config(raw);
    for (const auto& x : v) std::cout << x.key << ": " << x.message << '\n';
    if (v.empty()) {
        std::cout << "ok\n";
        return kOk;
    }
    return report(kInvalid, {{"status", "invalid"}, {"file", o.config}, {"violations", violations_json(v)}});
}

int cmd_run(const Options& o, bool require_sweep, bool force_monte_carlo) {
    bm::RawConfig raw;
    if (auto code = load(o, raw)) return *code;
    if (force_monte_carlo) raw.set("market.model", "monte_carlo");

    const auto v = bm::validate_config(raw);
    if (!v.empty())
        return report(kInvalid, {{"status", "invalid"}, {"file", o.config}, {"violations", violations_json(v)}});

    const auto base = bm::interpret(raw).config;
    if (require_sweep && base.sweep.empty())
        return report(kInvalid, {{"status", "invalid"},
                                 {"file", o.config},
                                 {"violations", json::array({{{"key", "sweep"}, {"message", "no sweep axes given"}}})}});

    const auto rep = bm::run_experiment(raw);
    const bool single = base.sweep.empty();

    if (single && !rep.cells.front().result) {
        const auto& cell = rep.cells.front();
        return report(cell.degenerate ? kDegenerate : kInvalid,
                      {{"status", cell.degenerate ? "degenerate" : "invalid"}, {"message", *cell.error}});
    }

    if (int code = write_to(base.output.path, bm::result_table(rep), base.output.format)) return code;
    if (!single) {
        const auto grid = bm::grid_path(base.output);
        if (!grid.empty())
            if (int code = write_to(grid, bm::grid_table(rep), base.output.format)) return code;
    }

    for (const auto& cell : rep.cells) {
        if (cell.error)
            std::cerr << json{{"status", "flagged"}, {"run_id", cell.run_id}, {"message", *cell.error}}.dump() << '\n';
        if (cell.result && cell.result->monte_carlo) {
            const auto& mc = *cell.result->monte_carlo;
            json rec{{"status", "simulated"},
                     {"run_id", cell.run_id},
                     {"sessions", mc.sessions},
                     {"excluded_periods", mc.excluded_periods},
                     {"solvent", mc.solvency.solvent},
                     {"funding", mc.solvency.funding},
                     {"worst_cash", mc.solvency.worst_cash}};
            if (const auto& f = mc.solvency.first_violation)
                rec["first_violation"] = {{"session", f->session}, {"period", f->period}, {"agent", f->agent},
                                          {"cash", f->cash}};
            std::cerr << rec.dump() << '\n';
        }
    }
    if (rep.failed() == rep.cells.size()) return kDegenerate;
    return kOk;
}

void add_common(CLI::App* sub, Options& o, bool run_flags) {
    sub->add_option("config", o.config, "experiment config file")->required();
    sub->add_option("--set", o.overrides, "override a key, e.g. --set asset.1.kappa=5")->take_all();
    if (!run_flags) return;
    sub->add_option("--out", o.out, "result table path ('-' for stdout)");
    sub->add_option("--seed", o.seed, "Monte Carlo seed");
    sub->add_option("--sessions", o.sessions, "Monte Carlo session count")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Average price dynamics of experimental asset markets"};
    app.require_subcommand(1);
    Options o;
    auto* run = app.add_subcommand("run", "run the configured model (every sweep cell if [sweep] is set)");
    auto* validate = app.add_subcommand("validate", "list every violated constraint without running");
    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep and write the contour grid");
    auto* simulate = app.add_subcommand("simulate", "run the agent-level Monte Carlo market");
    add_common(run, o, true);
    add_common(validate, o, false);
    add_common(sweep, o, true);
    add_common(simulate, o, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kInvalid;
    }

    if (*validate) return cmd_validate(o);
    if (*sweep) return cmd_run(o, true, false);
    if (*simulate) return cmd_run(o, false, true);
    return cmd_run(o, false, false);
}
