#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace bubblemarket {

/// One grid point of a parameter sweep. A cell whose model run threw keeps
/// its coordinates and carries the message instead of values.
struct SurfaceCell {
    std::vector<double> coords;
    std::vector<double> values;
    std::optional<std::string> error;

    [[nodiscard]] bool ok() const { return !error.has_value(); }
};

struct SurfaceTable {
    std::vector<std::string> axes;
    std::vector<std::string> value_names;
    std::vector<SurfaceCell> cells;  ///< row-major, first axis slowest

    [[nodiscard]] std::size_t flagged() const {
        return static_cast<std::size_t>(
            std::count_if(cells.begin(), cells.end(), [](const auto& c) { return !c.ok(); }));
    }
};

/// Cartesian product of the axis value lists, row-major.
inline std::vector<std::vector<double>> grid_points(const std::vector<std::vector<double>>& axes) {
    std::vector<std::vector<double>> out;
    if (axes.empty()) return out;
    std::size_t total = 1;
    for (const auto& a : axes) total *= a.size();
    out.reserve(total);
    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t n = 0; n < total; ++n) {
        std::vector<double> point(axes.size());
        for (std::size_t k = 0; k < axes.size(); ++k) point[k] = axes[k][idx[k]];
        out.push_back(std::move(point));
        for (std::size_t k = axes.size(); k-- > 0;) {
            if (++idx[k] < axes[k].size()) break;
            idx[k] = 0;
        }
    }
    return out;
}

/// Calls `fn(i)` for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). Worker w takes indices w, w + threads, ...; callers store
/// results by index so output never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned threads = 0) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, n)));
    auto work = [&](std::size_t begin) {
        for (std::size_t i = begin; i < n; i += threads) fn(i);
    };
    if (threads <= 1) {
        work(0);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, std::size_t{w});
}

/// Runs `fn` over every point in parallel. Exceptions flag the cell.
template <typename Fn>
std::vector<SurfaceCell> evaluate_points(const std::vector<std::vector<double>>& points, Fn&& fn,
                                         unsigned threads = 0) {
    std::vector<SurfaceCell> cells(points.size());
    parallel_for(
        points.size(),
        [&](std::size_t i) {
            cells[i].coords = points[i];
            try {
                cells[i].values = fn(points[i]);
            } catch (const std::exception& e) {
                cells[i].values.clear();
                cells[i].error = e.what();
            }
        },
        threads);
    return cells;
}

template <typename Fn>
SurfaceTable sweep_grid(std::vector<std::string> axis_names, const std::vector<std::vector<double>>& axes,
                        std::vector<std::string> value_names, Fn&& fn, unsigned threads = 0) {
    SurfaceTable table;
    table.axes = std::move(axis_names);
    table.value_names = std::move(value_names);
    table.cells = evaluate_points(grid_points(axes), std::forward<Fn>(fn), threads);
    return table;
}

}  // namespace bubblemarket
