#pragma once
// Independent reference implementations used by the unit tests and the
// acceptance runner. None of them share code with the library under test
// beyond the Costmap container.

#include <cmath>
#include <numbers>
#include <optional>
#include <queue>
#include <vector>

#include "wheelplan/costmap.hpp"
#include "wheelplan/random.hpp"

namespace oracle {

using wheelplan::CellIndex;
using wheelplan::CellState;
using wheelplan::Costmap;

// Path cost as (straight, diagonal) step counts, compared exactly:
// a + sqrt2*b < c + sqrt2*d  <=>  a - c < sqrt2 (d - b).
struct StepCost {
    long straight = 0;
    long diagonal = 0;
    double metres(double res) const { return res * (straight + std::numbers::sqrt2 * diagonal); }
};

inline bool less(const StepCost& p, const StepCost& q) {
    const long lhs = p.straight - q.straight, rhs = q.diagonal - p.diagonal;
    // lhs < sqrt2 * rhs
    if (rhs >= 0) return lhs < 0 || lhs * lhs < 2 * rhs * rhs;
    return lhs < 0 && lhs * lhs > 2 * rhs * rhs;
}

inline bool equal(const StepCost& p, const StepCost& q) { return p.straight == q.straight && p.diagonal == q.diagonal; }

// Plain Dijkstra over the 8-connected Free cells, diagonal moves only when both
// orthogonal neighbours are Free. Linear scan for the minimum: slow but obvious.
inline std::optional<StepCost> dijkstra(const Costmap& map, CellIndex start, CellIndex goal) {
    if (!map.is_free(start) || !map.is_free(goal)) return std::nullopt;
    const int w = map.width(), h = map.height();
    std::vector<std::optional<StepCost>> best(static_cast<std::size_t>(w) * h);
    std::vector<bool> done(best.size(), false);
    auto id = [w](CellIndex c) { return static_cast<std::size_t>(c.row) * w + c.col; };
    best[id(start)] = StepCost{};
    for (;;) {
        std::optional<std::size_t> pick;
        for (std::size_t i = 0; i < best.size(); ++i) {
            if (done[i] || !best[i]) continue;
            if (!pick || less(*best[i], *best[*pick])) pick = i;
        }
        if (!pick) return std::nullopt;
        done[*pick] = true;
        const CellIndex c{static_cast<int>(*pick / w), static_cast<int>(*pick % w)};
        if (c == goal) return best[*pick];
        for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
                if (dr == 0 && dc == 0) continue;
                const CellIndex n{c.row + dr, c.col + dc};
                if (!map.is_free(n)) continue;
                const bool diag = dr != 0 && dc != 0;
                if (diag && (!map.is_free({c.row + dr, c.col}) || !map.is_free({c.row, c.col + dc}))) continue;
                StepCost cand = *best[*pick];
                (diag ? cand.diagonal : cand.straight) += 1;
                auto& slot = best[id(n)];
                if (!done[id(n)] && (!slot || less(cand, *slot))) slot = cand;
            }
        }
    }
}

// Lattice disc: every offset with (dr^2 + dc^2) * res^2 <= radius^2, using
// integer arithmetic on the radius in cells.
inline bool within_disc(int dr, int dc, double radius, double res) {
    const long r_cells = std::lround(radius / res);
    return static_cast<long>(dr) * dr + static_cast<long>(dc) * dc <= r_cells * r_cells;
}

inline Costmap brute_inflate(const Costmap& in, double radius) {
    Costmap out = in;
    for (int r = 0; r < in.height(); ++r)
        for (int c = 0; c < in.width(); ++c)
            for (int r2 = 0; r2 < in.height(); ++r2)
                for (int c2 = 0; c2 < in.width(); ++c2)
                    if (in.at({r2, c2}) == CellState::Occupied && within_disc(r - r2, c - c2, radius, in.resolution()))
                        out.set({r, c}, CellState::Occupied);
    return out;
}

inline Costmap brute_constrict(const Costmap& in, double radius) {
    Costmap out = in;
    for (int r = 0; r < in.height(); ++r)
        for (int c = 0; c < in.width(); ++c) {
            if (in.at({r, c}) != CellState::Free) continue;
            for (int r2 = 0; r2 < in.height(); ++r2)
                for (int c2 = 0; c2 < in.width(); ++c2)
                    if (in.at({r2, c2}) != CellState::Free && within_disc(r - r2, c - c2, radius, in.resolution()))
                        out.set({r, c}, CellState::Unknown);
        }
    return out;
}

// Segment a->b touches a non-Free cell, sampled every `step` metres.
inline bool supersampled_clear(const Costmap& map, wheelplan::Vec2 a, wheelplan::Vec2 b, double step = 0.01) {
    const double len = wheelplan::distance(a, b);
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) / n;
        const auto cell = map.cell_of({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
        if (!cell || map.at(*cell) != CellState::Free) return false;
    }
    return true;
}

// w x h Free grid at 0.1 m, origin (0,0), each cell Occupied with probability `density`.
inline Costmap random_map(std::uint64_t seed, int w, int h, double density) {
    wheelplan::Rng rng(seed);
    Costmap m(w, h, 0.1, wheelplan::Pose2D{0.0, 0.0, 0.0}, CellState::Free);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            if (wheelplan::uniform01(rng) < density) m.set({r, c}, CellState::Occupied);
    return m;
}

// Random three-state map for the morphology checks.
inline Costmap random_tristate(std::uint64_t seed, int w, int h) {
    wheelplan::Rng rng(seed);
    Costmap m(w, h, 0.1, wheelplan::Pose2D{0.0, 0.0, 0.0}, CellState::Free);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const double u = wheelplan::uniform01(rng);
            if (u < 0.03) m.set({r, c}, CellState::Occupied);
            else if (u < 0.06) m.set({r, c}, CellState::Unknown);
        }
    return m;
}

}  // namespace oracle
