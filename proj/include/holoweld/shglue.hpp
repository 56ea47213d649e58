#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "fields.hpp"
#include "windows.hpp"

namespace holoweld {

/// Nonnegative subharmonic patches on S_1, one per window, with a common
/// sup bound M. The bound is validated, not trusted.
struct SubharmonicPatchSet {
    Configuration config;            // requires C > 7
    std::vector<RealField> patches;  // sampled on S_1 around 0
    double M = 1.0;

    void validate() const {
        config.validate();
        if (!(config.C > 7.0))
            throw std::invalid_argument("subharmonic glue: needs C > 7");
        if (patches.size() != config.points.size())
            throw std::invalid_argument("subharmonic glue: one patch per window required");
        if (!(M > 0)) throw std::invalid_argument("subharmonic glue: M must be positive");
        for (std::size_t i = 0; i < patches.size(); ++i) {
            const auto& p = patches[i];
            p.check_finite("patch");
            for (double v : p.values) {
                if (v < 0.0)
                    throw std::invalid_argument("subharmonic glue: negative patch value");
                if (v > M)
                    throw std::invalid_argument("subharmonic glue: patch exceeds the bound M");
            }
            // radius 16h: a sub-mean-value violation of slope L shows a
            // defect ~ r L, which must clear the 10 h L tolerance
            const auto rep = subharmonic_check(p, 16.0 * p.grid.h());
            if (!rep.pass)
                throw std::invalid_argument(
                    "subharmonic glue: patch " + std::to_string(i) +
                    " fails the sub-mean-value test (excess " +
                    std::to_string(rep.max_excess) + ")");
        }
    }
};

/// Glued subharmonic function u = max(2 M v, patch) on each D^{+1/(3C)},
/// 2 M v elsewhere; pointwise evaluable on the whole plane.
class SubharmonicGlue {
public:
    WindowSystem ws;
    std::vector<RealField> patches;
    double M = 1.0;
    RealField u; // sampled on the build grid

    /// Window whose dilated zero set contains z, or -1.
    int window_at(cplx z) const {
        const auto [cx, cy] = winimpl::cell_of(z);
        const auto it = ws.b_sets.find(winimpl::cell_key(cx, cy));
        if (it == ws.b_sets.end()) return -1;
        const double r = 1.0 / (3.0 * ws.config.C);
        for (int idx : it->second)
            if (ws.geometry[idx].d_rects.distance(z) < r) return idx;
        return -1;
    }

    double value(cplx z) const {
        double val = 2.0 * M * ws.value(z);
        const int idx = window_at(z);
        if (idx >= 0)
            val = std::max(val, patches[idx].interp(z - ws.config.points[idx]));
        return val;
    }
};

inline SubharmonicGlue glue_subharmonic(const SubharmonicPatchSet& ps, const Grid& grid,
                                        int local_n = 0) {
    ps.validate();
    SubharmonicGlue out;
    out.ws = build_window_system(ps.config, grid, local_n);
    out.patches = ps.patches;
    out.M = ps.M;
    out.u = RealField(grid);
    parallel_for(0, grid.size(), [&](std::size_t k) {
        out.u.values[k] = out.value(grid.point(k));
    });
    out.u.check_finite("glued subharmonic field");
    return out;
}

struct ShEntry {
    int window = 0;
    std::size_t d_nodes = 0;
    double sh1_max_diff = 0.0;   // u vs shifted patch on D nodes, exact zero expected
    double sh3_min = 0.0;        // min u over the annulus
    std::size_t sh3_nodes = 0;
    bool pass = true;
};

struct ShReport {
    std::vector<ShEntry> entries;
    double sh2_log_max_u = 0.0;   // log max u over the build grid
    double sh2_log_bound = 0.0;   // log(2M) + pi C^2
    double sh2_log_margin = 0.0;
    bool pass = true;
};

/// SH1: u equals the shifted patch node-exactly on every D raster node.
/// SH2: log max u <= log(2M) + pi C^2 (checked in log space).
/// SH3: min u over D^{+5/(3C)} \ D^{+1/(3C)} is at least M.
inline ShReport check_sh(const SubharmonicGlue& g, int local_n = 0) {
    const double C = g.ws.config.C;
    ShReport rep;
    double max_u = 0.0;
    for (double v : g.u.values) max_u = std::max(max_u, v);
    rep.sh2_log_bound = std::log(2.0 * g.M) + M_PI * C * C;
    rep.sh2_log_max_u = max_u > 0 ? std::log(max_u) : -std::numeric_limits<double>::infinity();
    rep.sh2_log_margin = rep.sh2_log_bound - rep.sh2_log_max_u;
    rep.pass = rep.sh2_log_margin >= 0.0;

    if (local_n <= 0) local_n = static_cast<int>(std::ceil(12 * C)) + 1;
    for (std::size_t i = 0; i < g.ws.config.points.size(); ++i) {
        ShEntry e;
        e.window = static_cast<int>(i);
        const cplx lam = g.ws.config.points[i];
        const auto& d = g.ws.d_sets[i];
        for (std::size_t k = 0; k < d.grid.size(); ++k) {
            if (!d.member[k]) continue;
            const cplx z = d.grid.point(k);
            ++e.d_nodes;
            const double diff = std::fabs(g.value(z) - g.patches[i].interp(z - lam));
            e.sh1_max_diff = std::max(e.sh1_max_diff, diff);
        }
        // annulus sampling with exact rectangle distances
        const auto& dr = g.ws.geometry[i].d_rects;
        Grid lg(Square(lam, 1.0 + 2.0 / C), local_n);
        e.sh3_min = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < lg.size(); ++k) {
            const cplx z = lg.point(k);
            const double dist = dr.distance(z);
            if (dist < 1.0 / (3.0 * C) || dist >= 5.0 / (3.0 * C)) continue;
            ++e.sh3_nodes;
            e.sh3_min = std::min(e.sh3_min, g.value(z));
        }
        e.pass = e.sh1_max_diff == 0.0 && (e.sh3_nodes == 0 || e.sh3_min >= g.M);
        rep.pass = rep.pass && e.pass;
        rep.entries.push_back(e);
    }
    return rep;
}

} // namespace holoweld
