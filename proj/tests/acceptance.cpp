// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bubblemarket/config.hpp"
#include "bubblemarket/factor.hpp"
#include "bubblemarket/hetero.hpp"
#include "bubblemarket/homogeneous.hpp"
#include "bubblemarket/monte_carlo.hpp"

namespace bm = bubblemarket;
namespace fs = std::filesystem;

namespace {

constexpr int T = 15;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

bool hump_shaped(const std::vector<double>& p) {
    const auto peak = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    if (peak == 0 || peak + 1 == p.size()) return false;
    for (std::size_t i = 1; i <= peak; ++i)
        if (!(p[i] > p[i - 1])) return false;
    for (std::size_t i = peak + 1; i < p.size(); ++i)
        if (!(p[i] < p[i - 1])) return false;
    return true;
}

int sign(double x) { return (x > 0) - (x < 0); }

Outcome exact_equilibrium() {
    Outcome o;
    int points = 0;
    for (double kappa : {1.5, 2.0, 3.0, 4.0, 5.0})
        for (double alpha : {0.2, 0.4, 0.6, 0.8, 0.95}) {
            ++points;
            const auto r = bm::average_price_path(bm::speculative_asset(kappa, alpha, 0.0), T);
            for (const auto& p : r.path.periods)
                o.require(p.bid == p.quote && p.ask == p.quote,
                          fmt("phi=0: bid/ask differ from quote at kappa=%g alpha=%g t=%g", kappa, alpha, p.t));
            const auto w = bm::average_price_path(bm::speculative_asset(kappa, alpha, 0.01), T);
            for (const auto& p : w.path.periods)
                o.require(p.bid != p.ask, fmt("phi>0: bid == ask at kappa=%g alpha=%g t=%g", kappa, alpha, p.t));
        }
    if (o.pass) o.detail = std::to_string(points) + " grid points, bid = ask = quote exactly at phi=0";
    return o;
}

Outcome bubble_shape() {
    Outcome o;
    const auto w = bm::average_price_path(bm::speculative_asset(4.0, 0.85, 0.01), T);
    const auto prices = w.path.prices();
    const double fv15 = w.path.periods.back().fv;
    const double end = prices.back();
    o.require(hump_shaped(prices), "phi=0.01 path is not hump-shaped");
    o.require(std::abs(end - fv15) <= 0.5,
              fmt("phi=0.01 terminal price %.4f is %.4f from FV_15 = %.2f (band 0.5)", end, end - fv15, fv15));
    const auto e = bm::average_price_path(bm::speculative_asset(4.0, 0.85, 0.0), T);
    o.require(e.path.periods.back().price > fv15,
              fmt("phi=0 terminal price %.4f does not exceed FV_15", e.path.periods.back().price));
    if (o.pass) o.detail = fmt("hump-shaped, terminal %.4f vs FV_15 %.2f", end, fv15);
    return o;
}

Outcome rd_monotonicity() {
    Outcome o;
    const std::vector<double> kappas{3, 4, 5}, alphas{0.75, 0.85, 0.95}, phis{0, 0.005, 0.01};
    const auto s = bm::sweep_rd(bm::speculative_asset(4.0, 0.85), {kappas, alphas, phis}, T);
    o.require(s.flagged() == 0, "grid has flagged cells");
    auto rd = [&](std::size_t k, std::size_t a, std::size_t p) { return s.cells[(k * 3 + a) * 3 + p].values[0]; };
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t p = 0; p < 3; ++p)
            for (std::size_t k = 1; k < 3; ++k)
                o.require(rd(k, a, p) >= rd(k - 1, a, p),
                          fmt("RD decreases in kappa at alpha=%g phi=%g", alphas[a], phis[p]));
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t p = 1; p < 3; ++p)
                o.require(rd(k, a, p) <= rd(k, a, p - 1),
                          fmt("RD increases in phi at kappa=%g alpha=%g", kappas[k], alphas[a]));
    if (o.pass) o.detail = "27 cells";
    return o;
}

Outcome factor_equilibrium() {
    Outcome o;
    std::mt19937_64 rng(20240601);
    const auto asset1 = bm::speculative_asset(4.0, 0.85, 0.01);
    const auto asset2 = bm::value_asset(2.0, 0.85);
    int n = 0, balanced = 0, neutral = 0, off = 0, eq_cells = 0;
    for (int i = 0; i < 200; ++i) {
        const int jn = std::uniform_int_distribution<int>(0, 60)(rng);
        int jd = std::uniform_int_distribution<int>(0, 50)(rng);
        int jmn = std::uniform_int_distribution<int>(0, 50)(rng);
        double pi1 = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
        if (i % 4 == 1) jmn = jd;
        if (i % 4 == 2) pi1 = 0.5;
        if (jn + jd + jmn == 0) continue;
        const bm::FactorPopulation pop{jn, jd, jmn};
        const bool predicted = jd == jmn || pi1 == 0.5;
        const auto c = bm::factor_asset2_counts(pop, pi1, 0.5);
        const double q = 2.8;
        const bool equal = bm::prevailing_price(q, c.demand, c.supply) == bm::prevailing_price(q, c.supply, c.demand);
        o.require(equal == predicted, fmt("J_D=%g J_MN=%g pi1=%g: bid=ask disagrees with the condition", jd, jmn, pi1));
        o.require(bm::check_equilibrium_conditions(pop, pi1, 0.5).asset2 == predicted, "check_equilibrium_conditions");
        ++n;
        balanced += jd == jmn;
        neutral += pi1 == 0.5 && jd != jmn;
        off += !predicted;
        if (predicted) {
            const auto r = bm::factor_price_paths(asset1, asset2, pop, T, pi1);
            ++eq_cells;
            o.require(std::abs(r.path_2.rd) < 1e-12, fmt("RD_2 = %g in an equilibrium cell", r.path_2.rd));
        }
    }
    o.require(balanced > 0 && neutral > 0 && off > 0, "random draws missed a branch");
    if (o.pass)
        o.detail = std::to_string(n) + " combinations (" + std::to_string(balanced) + " J_D=J_MN, " +
                   std::to_string(neutral) + " pi1=0.5, " + std::to_string(off) + " off), " + std::to_string(eq_cells) +
                   " equilibrium paths with |RD_2| < 1e-12";
    return o;
}

Outcome factor_signs() {
    Outcome o;
    const auto a1 = bm::speculative_asset(4.0, 0.85, 0.01);
    const auto a2 = bm::value_asset(2.0, 0.85);
    const auto dir = bm::factor_price_paths(a1, a2, {50, 45, 5}, T);
    const auto mn = bm::factor_price_paths(a1, a2, {50, 5, 45}, T);
    o.require(dir.path_2.rd < 0, fmt("RD_2 = %g with (45, 5)", dir.path_2.rd));
    o.require(mn.path_2.rd > 0, fmt("RD_2 = %g with (5, 45)", mn.path_2.rd));
    o.require(dir.path_1.rd == mn.path_1.rd, "RD_1 differs between runs");
    for (std::size_t t = 0; t < dir.path_1.size(); ++t)
        o.require(dir.path_1.periods[t].price == mn.path_1.periods[t].price, "asset-1 path differs");
    if (o.pass) o.detail = fmt("RD_2 = %.4f / %.4f, RD_1 = %.4f in both", dir.path_2.rd, mn.path_2.rd, dir.path_1.rd);
    return o;
}

Outcome event_machine() {
    Outcome o;
    const auto r = bm::hetero_price_path(bm::speculative_asset(4.0, 0.85), {50, 6, 4}, {0.25, 0.10, 4.0}, T);
    std::vector<bm::EventLabel> firsts;
    std::string seq;
    for (const auto& rec : r.records) {
        if (std::find(firsts.begin(), firsts.end(), rec.event) == firsts.end()) firsts.push_back(rec.event);
        seq += std::string(bm::to_string(rec.event)) + " ";
    }
    o.require(r.records.front().event == bm::EventLabel::E2, "first event is not E2");
    auto pos = [&](bm::EventLabel e) {
        const auto it = std::find(firsts.begin(), firsts.end(), e);
        return it == firsts.end() ? -1 : static_cast<int>(it - firsts.begin());
    };
    const int p2 = pos(bm::EventLabel::E2), p4 = pos(bm::EventLabel::E4), p3 = pos(bm::EventLabel::E3);
    o.require(p2 >= 0 && p4 > p2 && p3 > p4, "first occurrences are not ordered E2, E4, E3: " + seq);
    int first_negative = 0, first_e3 = 0;
    for (const auto& rec : r.records) {
        if (!first_negative && rec.cumulative_imbalance < 0) first_negative = rec.t;
        if (!first_e3 && rec.event == bm::EventLabel::E3) first_e3 = rec.t;
    }
    o.require(first_negative > 0, "cumulative imbalance never turns negative");
    for (const auto& rec : r.records)
        if (rec.t < first_negative) o.require(rec.cumulative_imbalance > 0, "cumulative imbalance not positive in boom");
    o.require(first_e3 >= first_negative - 1,
              fmt("E3 starts at t=%g, cumulative imbalance negative from t=%g", first_e3, first_negative));
    if (o.pass) o.detail = seq + fmt("(E3 from t=%g, cum < 0 from t=%g)", first_e3, first_negative);
    return o;
}

Outcome noise_limit() {
    Outcome o;
    const auto asset = bm::speculative_asset(4.0, 0.85);
    const auto h = bm::average_price_path(asset, T);
    std::vector<double> gaps;
    for (int jn : {100, 1000, 10000}) {
        const auto r = bm::hetero_price_path(asset, {jn, 6, 4}, {0.25, 0.10, 4.0}, T);
        double worst = 0.0;
        for (std::size_t t = 0; t < h.path.size(); ++t)
            worst = std::max(worst, std::abs(r.records[t].mid - h.path.periods[t].price));
        gaps.push_back(worst);
    }
    o.require(gaps[1] < gaps[0] && gaps[2] < gaps[1], "gap does not shrink monotonically");
    o.require(gaps[2] < 0.05, fmt("gap %.4f at J_N=10000", gaps[2]));
    if (o.pass) o.detail = fmt("max gap %.4f / %.4f / %.5f", gaps[0], gaps[1], gaps[2]);
    return o;
}

Outcome spread_sign() {
    Outcome o;
    const auto asset = bm::speculative_asset(4.0, 0.85);
    const double dbar = asset.mean_dividend();
    int checked = 0;
    for (double g2 : {0.5, 1.017, 4.0}) {
        const auto r = bm::hetero_price_path(asset, {50, 25, 25}, {1.0, 0.0, g2}, T);
        for (std::size_t i = 0; i < r.records.size(); ++i) {
            const double fv = r.path.periods[i].fv;
            const auto& rec = r.records[i];
            ++checked;
            o.require(sign(rec.ask - rec.bid) == sign(g2 - 2 * fv / (2 * fv - dbar)),
                      fmt("sign mismatch at gamma2=%g t=%g", g2, rec.t));
        }
    }
    if (o.pass) o.detail = std::to_string(checked) + " periods";
    return o;
}

Outcome two_asset_equivalence() {
    Outcome o;
    const auto a1 = bm::speculative_asset(4.0, 0.85);
    const auto a2 = bm::value_asset(2.0, 0.85);
    const bm::HeteroPopulation pop{50, 25, 25};
    const bm::StrategyParams s1{1.0, 0.0, 4.0};
    const auto dir = bm::two_asset_hetero_paths(a1, a2, pop, s1, std::nullopt, bm::Asset2Mode::FactorDirectional, T);
    const auto mn = bm::two_asset_hetero_paths(a1, a2, pop, s1, std::nullopt, bm::Asset2Mode::FactorMarketNeutral, T);
    const auto same =
        bm::two_asset_hetero_paths(a1, a2, pop, s1, bm::StrategyParams{1.0, 0.0, 1.0}, bm::Asset2Mode::SameStrategy, T);
    const auto off =
        bm::two_asset_hetero_paths(a1, a2, pop, s1, bm::StrategyParams{1.0, 0.0, 1.5}, bm::Asset2Mode::SameStrategy, T);
    constexpr double eps = 1e-12;
    double worst = 0.0;
    for (std::size_t t = 0; t < dir.path_2.size(); ++t) {
        for (const auto* r : {&dir, &mn, &same}) {
            const auto& p = r->path_2.periods[t];
            worst = std::max({worst, std::abs(p.price - 2.80), std::abs(p.bid - 2.80), std::abs(p.ask - 2.80)});
        }
        o.require(std::abs(off.path_2.periods[t].ask - off.path_2.periods[t].bid) > eps,
                  fmt("gamma_22=1.5 keeps bid = ask at t=%g", static_cast<double>(t + 1)));
        o.require(off.path_1.periods[t].price == dir.path_1.periods[t].price &&
                      off.path_1.periods[t].bid == dir.path_1.periods[t].bid,
                  "asset-1 path changes with gamma_22");
    }
    o.require(worst <= eps, fmt("asset-2 paths deviate from 2.80 by %g", worst));
    if (o.pass) o.detail = fmt("asset-2 max deviation %g, RD_2 with gamma_22=1.5: %.4f", worst, off.path_2.rd);
    return o;
}

Outcome monte_carlo() {
    Outcome o;
    const auto it = bm::interpret(bm::load_config(std::string(BUBBLEMARKET_CONFIG_DIR) + "/mc_homogeneous.ini"));
    if (!it.ok()) {
        o.require(false, "mc_homogeneous.ini is invalid");
        return o;
    }
    const auto sim = it.config.simulation_config();
    const auto mc = bm::run_sessions(sim);
    const auto h = bm::average_price_path(sim.market.assets[0], sim.market.periods);
    double worst_price = 0.0, worst_frac = 0.0;
    for (std::size_t t = 0; t < h.path.size(); ++t) {
        const auto& ps = mc.assets[0].periods[t];
        const double zp = std::abs(ps.price_mean - h.path.periods[t].quote) / ps.price_se;
        const double zf = std::abs(ps.buyer_fraction - bm::buyer_probability(0.0, ps.t)) / ps.buyer_fraction_se;
        worst_price = std::max(worst_price, zp);
        worst_frac = std::max(worst_frac, zf);
        o.require(zp <= 3.0, fmt("t=%g: mean price %.3f SE from the analytic path", ps.t, zp));
        o.require(zf <= 3.0, fmt("t=%g: buyer fraction %.3f SE from pi_t", ps.t, zf));
    }
    o.require(mc.solvency.solvent, fmt("agent cash reached %g", mc.solvency.worst_cash));
    if (o.pass)
        o.detail = fmt("N=%g, M=%g, max |z| price %.2f", sim.agents(), sim.sessions, worst_price) +
                   fmt(", buyer fraction %.2f, min cash %.2f", worst_frac, mc.solvency.worst_cash);
    return o;
}

std::map<std::string, std::string> run_dir(const fs::path& dir, const fs::path& config) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string cmd = "cd '" + dir.string() + "' && '" + BUBBLEMARKET_CLI + "' run '" + config.string() +
                            "' > stdout.txt 2> stderr.txt";
    const int status = std::system(cmd.c_str());
    std::map<std::string, std::string> files;
    files["exit"] = std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1);
    for (const auto& e : fs::directory_iterator(dir)) {
        std::ifstream is(e.path(), std::ios::binary);
        std::ostringstream ss;
        ss << is.rdbuf();
        files[e.path().filename().string()] = ss.str();
    }
    return files;
}

Outcome determinism() {
    Outcome o;
    std::vector<fs::path> configs;
    for (const auto& e : fs::directory_iterator(BUBBLEMARKET_CONFIG_DIR))
        if (e.path().extension() == ".ini") configs.push_back(e.path());
    std::sort(configs.begin(), configs.end());
    const fs::path root = fs::path(BUBBLEMARKET_SCRATCH_DIR) / "determinism";
    for (const auto& c : configs) {
        const auto a = run_dir(root / "a", c);
        const auto b = run_dir(root / "b", c);
        o.require(a.at("exit") == "0", c.filename().string() + " exited with " + a.at("exit"));
        o.require(a == b, c.filename().string() + " output differs between invocations");
    }
    if (o.pass) o.detail = std::to_string(configs.size()) + " bundled configs, byte-identical outputs";
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> check;
    };
    const std::vector<Criterion> criteria{
        {1, "exact equilibrium at phi=0", 1, exact_equilibrium},
        {2, "homogeneous bubble shape", 1, bubble_shape},
        {3, "RD monotone in kappa and phi", 1, rd_monotonicity},
        {4, "factor model asset-2 equilibrium condition", 1, factor_equilibrium},
        {5, "factor misvaluation signs", 1, factor_signs},
        {6, "event machine reference run", 1, event_machine},
        {7, "convergence to homogeneous path as noise grows", 1, noise_limit},
        {8, "spread sign in the limit case", 1, spread_sign},
        {9, "two-asset equivalence", 1, two_asset_equivalence},
        {10, "Monte Carlo consistency", 60, monte_carlo},
        {11, "CLI determinism", 60, determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > c.budget_s) {
            if (o.pass) o.detail = fmt("took %.2f s, budget %g s", secs, c.budget_s);
            o.pass = false;
        }
        failed += o.pass ? 0 : 1;
        std::printf("%-4s criterion %2d  %-48s %8.3f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                    o.detail.c_str());
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
