#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "fields.hpp"
#include "rects.hpp"
#include "rng.hpp"

namespace holoweld {

/// Finite point set with inf-norm separation > 2, plus the strip constant C.
struct Configuration {
    std::vector<cplx> points;
    std::vector<int> labels; // empty, or one class id per point
    double C = 8.0;

    void validate() const {
        if (!(C >= 1.0)) throw std::invalid_argument("Configuration: C must be >= 1");
        if (!labels.empty() && labels.size() != points.size())
            throw std::invalid_argument("Configuration: label count mismatch");
        for (std::size_t i = 0; i < points.size(); ++i)
            for (std::size_t j = i + 1; j < points.size(); ++j)
                if (norm_inf(points[i] - points[j]) <= 2.0)
                    throw std::invalid_argument(
                        "Configuration: separation violation between points " +
                        std::to_string(i) + " and " + std::to_string(j));
    }
};

/// Rejection-sampled configuration in the centered box of the given
/// half-edge. Positions can be snapped to a lattice pitch (the welding
/// grids want window centers on grid nodes).
inline Configuration random_configuration(Rng& rng, int max_points, double box_half_edge,
                                          double C, double snap = 0.0) {
    Configuration cfg;
    cfg.C = C;
    const int attempts = 400 * std::max(1, max_points);
    for (int a = 0; a < attempts && static_cast<int>(cfg.points.size()) < max_points; ++a) {
        cplx z{rng.uniform(-box_half_edge, box_half_edge),
               rng.uniform(-box_half_edge, box_half_edge)};
        if (snap > 0.0)
            z = {std::round(z.real() / snap) * snap, std::round(z.imag() / snap) * snap};
        bool ok = true;
        for (cplx p : cfg.points)
            if (norm_inf(z - p) <= 2.0 + 1e-9) {
                ok = false;
                break;
            }
        if (ok) cfg.points.push_back(z);
    }
    return cfg;
}

/// b_C: cos/cosh profile inside the open horizontal strip |Im z| < 1/C.
inline double base_window(cplx z, double C) {
    if (!(std::fabs(z.imag()) < 1.0 / C)) return 0.0;
    return std::cos(0.5 * M_PI * C * z.imag()) * std::cosh(0.5 * M_PI * C * z.real());
}

namespace winimpl {
// Strip profile around an axis-aligned line: transverse offset t, along s.
inline double strip_value(double t, double s, double C) {
    if (!(std::fabs(t) < 1.0 / C)) return 0.0;
    return std::cos(0.5 * M_PI * C * t) * std::cosh(0.5 * M_PI * C * s);
}
} // namespace winimpl

/// Window function v_lambda: four b_C strips along the edges of S_1(lambda),
/// zero on the inner square, tails growing along the edge directions.
inline double window_fn(cplx z, cplx lambda, double C) {
    const double x = z.real() - lambda.real();
    const double y = z.imag() - lambda.imag();
    double v = winimpl::strip_value(y + 1.0, x, C);        // bottom edge
    v = std::max(v, winimpl::strip_value(y - 1.0, x, C));  // top edge
    v = std::max(v, winimpl::strip_value(x + 1.0, y, C));  // left edge
    v = std::max(v, winimpl::strip_value(x - 1.0, y, C));  // right edge
    return v;
}

/// Grid function v_0: e^{2 pi C} times the strip profile over all odd
/// horizontal and vertical lines. Locally at most one line per axis is
/// within reach, so this is a max of at most two smooth values.
inline double grid_fn(cplx z, double C) {
    const double scale = std::exp(2.0 * M_PI * C);
    double v = 0.0;
    auto axis = [&](double t, double s) {
        const double k = std::floor(0.5 * (t + 1.0));
        for (double line : {2.0 * k - 1.0, 2.0 * k + 1.0})
            v = std::max(v, winimpl::strip_value(t - line, s, C));
    };
    axis(z.imag(), z.real()); // horizontal odd lines
    axis(z.real(), z.imag()); // vertical odd lines
    return scale * v;
}

/// One transverse strip: axis 0 means |x - line| < half_width (vertical).
struct WindowStrip {
    int axis = 0;
    double line = 0.0;
    double half_width = 0.0;
};

struct PerWindowGeometry {
    RectRegion d_rects;                        // exact D_lambda decomposition
    std::vector<WindowStrip> strips;           // strips meeting S_1(lambda)
    std::vector<std::pair<int, int>> cells;    // A_lambda (even lattice)
};

namespace winimpl {

inline long long cell_key(int cx, int cy) {
    return (static_cast<long long>(cx) << 32) ^ (static_cast<std::uint32_t>(cy));
}

inline std::pair<int, int> cell_of(cplx z) {
    return {2 * static_cast<int>(std::floor(0.5 * (z.real() + 1.0))),
            2 * static_cast<int>(std::floor(0.5 * (z.imag() + 1.0)))};
}

/// Complement of the open strip intervals inside [lo, hi].
inline std::vector<std::pair<double, double>> interval_complement(
    double lo, double hi, std::vector<std::pair<double, double>> cuts) {
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::pair<double, double>> out;
    double cur = lo;
    for (auto [a, b] : cuts) {
        if (b <= cur) continue;
        if (a > hi) break;
        if (a > cur) out.emplace_back(cur, std::min(a, hi));
        cur = std::max(cur, b);
        if (cur >= hi) break;
    }
    if (cur < hi) out.emplace_back(cur, hi);
    return out;
}

} // namespace winimpl

/// The assembled subharmonic window field of a configuration: cell-local
/// max of the grid function and the windows whose squares meet the cell.
class WindowSystem {
public:
    Configuration config;
    RealField v;                                  // sampled on the build grid
    std::vector<RasterSet> d_sets;                // per-window raster of D_lambda
    std::vector<PerWindowGeometry> geometry;      // exact strip/rect geometry
    std::unordered_map<long long, std::vector<int>> b_sets; // cell -> window ids

    double value(cplx z) const {
        double val = grid_fn(z, config.C);
        const auto [cx, cy] = winimpl::cell_of(z);
        const auto it = b_sets.find(winimpl::cell_key(cx, cy));
        if (it != b_sets.end())
            for (int idx : it->second)
                val = std::max(val, window_fn(z, config.points[idx], config.C));
        return val;
    }

    const std::vector<std::pair<int, int>>& a_set(int window) const {
        return geometry[window].cells;
    }
};

/// Cell assignment and D_lambda geometry; v sampled on `ambient`. The
/// per-window rasters live on S_1(lambda) grids with local_n nodes per
/// edge (default resolves the 2/C strips with 16 nodes).
inline WindowSystem build_window_system(const Configuration& cfg, const Grid& ambient,
                                        int local_n = 0) {
    cfg.validate();
    WindowSystem ws;
    ws.config = cfg;
    const double C = cfg.C;
    const double w = 1.0 / C;
    if (local_n <= 0) local_n = static_cast<int>(std::ceil(16 * C)) + 1;

    // A_lambda / B^omega with positive-measure intersection (inf distance < 2)
    ws.geometry.resize(cfg.points.size());
    for (std::size_t i = 0; i < cfg.points.size(); ++i) {
        const cplx lam = cfg.points[i];
        const int bx = 2 * static_cast<int>(std::floor(0.5 * (lam.real() + 1.0)));
        const int by = 2 * static_cast<int>(std::floor(0.5 * (lam.imag() + 1.0)));
        for (int cx = bx - 2; cx <= bx + 2; cx += 2)
            for (int cy = by - 2; cy <= by + 2; cy += 2) {
                if (std::fabs(lam.real() - cx) < 2.0 && std::fabs(lam.imag() - cy) < 2.0) {
                    ws.geometry[i].cells.emplace_back(cx, cy);
                    ws.b_sets[winimpl::cell_key(cx, cy)].push_back(static_cast<int>(i));
                }
            }
    }

    // Exact D_lambda: per shared cell, the square piece minus the open
    // strips of the grid lines and of every window acting in that cell.
    for (std::size_t i = 0; i < cfg.points.size(); ++i) {
        const cplx lam = cfg.points[i];
        const Rect sq{lam.real() - 1, lam.imag() - 1, lam.real() + 1, lam.imag() + 1};
        auto& geo = ws.geometry[i];
        std::vector<WindowStrip> strips;
        auto add_strip = [&](int axis, double line) {
            const double lo = axis == 0 ? sq.x0 : sq.y0;
            const double hi = axis == 0 ? sq.x1 : sq.y1;
            if (line + w <= lo || line - w >= hi) return;
            for (const auto& s : strips)
                if (s.axis == axis && s.line == line) return;
            strips.push_back({axis, line, w});
        };
        for (const auto& [cx, cy] : geo.cells) {
            add_strip(0, cx - 1.0);
            add_strip(0, cx + 1.0);
            add_strip(1, cy - 1.0);
            add_strip(1, cy + 1.0);
            for (int j : ws.b_sets[winimpl::cell_key(cx, cy)]) {
                const cplx mu = cfg.points[j];
                add_strip(0, mu.real() - 1.0);
                add_strip(0, mu.real() + 1.0);
                add_strip(1, mu.imag() - 1.0);
                add_strip(1, mu.imag() + 1.0);
            }
        }
        geo.strips = strips;
        for (const auto& [cx, cy] : geo.cells) {
            const Rect cell{cx - 1.0, cy - 1.0, cx + 1.0, cy + 1.0};
            const auto piece = sq.intersect(cell);
            if (!piece) continue;
            std::vector<std::pair<double, double>> xcuts, ycuts;
            auto cell_strip = [&](int axis, double line) {
                (axis == 0 ? xcuts : ycuts).emplace_back(line - w, line + w);
            };
            cell_strip(0, cell.x0);
            cell_strip(0, cell.x1);
            cell_strip(1, cell.y0);
            cell_strip(1, cell.y1);
            for (int j : ws.b_sets.at(winimpl::cell_key(cx, cy))) {
                const cplx mu = cfg.points[j];
                cell_strip(0, mu.real() - 1.0);
                cell_strip(0, mu.real() + 1.0);
                cell_strip(1, mu.imag() - 1.0);
                cell_strip(1, mu.imag() + 1.0);
            }
            const auto xs = winimpl::interval_complement(piece->x0, piece->x1, xcuts);
            const auto ys = winimpl::interval_complement(piece->y0, piece->y1, ycuts);
            for (auto [x0, x1] : xs)
                for (auto [y0, y1] : ys) geo.d_rects.add({x0, y0, x1, y1});
        }
    }

    ws.v = RealField(ambient);
    const Grid& g = ambient;
    parallel_for(0, g.size(), [&](std::size_t k) { ws.v.values[k] = ws.value(g.point(k)); });

    // raster D_lambda on a local grid, extracted from v == 0
    ws.d_sets.reserve(cfg.points.size());
    for (std::size_t i = 0; i < cfg.points.size(); ++i) {
        Grid lg(Square(cfg.points[i], 1.0), local_n);
        RasterSet d(lg);
        for (std::size_t k = 0; k < lg.size(); ++k)
            d.member[k] = ws.value(lg.point(k)) == 0.0 ? 1 : 0;
        ws.d_sets.push_back(std::move(d));
    }
    return ws;
}

// ---- property checkers ----

struct P1Entry {
    int window = 0;
    bool dilation_inside = false;   // D^{+1/C} inside S_1(lambda)
    int component_count = 0;        // components of S_1 \ D on the local raster
    int strip_count = 0;
    double max_strip_width = 0.0;
    double area_fraction = 0.0;     // exact rect area of D / 4
    AreaEstimate raster_area;       // raster measure with error bar
    double paper_bound = 0.0;       // 1 - 80/C
    bool pass = false;
};

struct P1Report {
    std::vector<P1Entry> entries;
    bool pass = true;
};

namespace winimpl {

inline int component_count(const RasterSet& s) {
    const int n = s.grid.n;
    std::vector<int> label(s.grid.size(), -1);
    int comps = 0;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < s.grid.size(); ++start) {
        if (!s.member[start] || label[start] >= 0) continue;
        ++comps;
        stack.push_back(start);
        label[start] = comps;
        while (!stack.empty()) {
            const std::size_t cur = stack.back();
            stack.pop_back();
            const int ix = static_cast<int>(cur % n), iy = static_cast<int>(cur / n);
            const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
            for (int d = 0; d < 4; ++d) {
                const int jx = ix + dx[d], jy = iy + dy[d];
                if (jx < 0 || jx >= n || jy < 0 || jy >= n) continue;
                const std::size_t j = s.grid.index(jx, jy);
                if (s.member[j] && label[j] < 0) {
                    label[j] = comps;
                    stack.push_back(j);
                }
            }
        }
    }
    return comps;
}

} // namespace winimpl

inline P1Report check_P1(const WindowSystem& ws) {
    P1Report rep;
    const double C = ws.config.C;
    for (std::size_t i = 0; i < ws.config.points.size(); ++i) {
        P1Entry e;
        e.window = static_cast<int>(i);
        const cplx lam = ws.config.points[i];
        const Rect sq{lam.real() - 1, lam.imag() - 1, lam.real() + 1, lam.imag() + 1};
        e.dilation_inside = true;
        for (const auto& r : ws.geometry[i].d_rects.rects)
            if (!sq.contains(r.grow(1.0 / C))) e.dilation_inside = false;
        e.strip_count = static_cast<int>(ws.geometry[i].strips.size());
        for (const auto& s : ws.geometry[i].strips)
            e.max_strip_width = std::max(e.max_strip_width, 2.0 * s.half_width);
        // complement raster for the component count
        RasterSet comp(ws.d_sets[i].grid);
        for (std::size_t k = 0; k < comp.member.size(); ++k)
            comp.member[k] = ws.d_sets[i].member[k] ? 0 : 1;
        e.component_count = winimpl::component_count(comp);
        e.area_fraction = ws.geometry[i].d_rects.area() / 4.0;
        e.raster_area = raster_area(ws.d_sets[i]);
        e.paper_bound = 1.0 - 80.0 / C;
        e.pass = e.dilation_inside && e.component_count <= 20 &&
                 e.max_strip_width <= 2.0 / C + 1e-12 &&
                 e.area_fraction >= e.paper_bound &&
                 e.raster_area.value / 4.0 + e.raster_area.half_width / 4.0 >= e.paper_bound;
        rep.pass = rep.pass && e.pass;
        rep.entries.push_back(e);
    }
    return rep;
}

struct P2Report {
    double min_log_margin = std::numeric_limits<double>::infinity();
    std::size_t nodes = 0;
    bool pass = true;
};

/// v(z) <= exp(2 pi C) exp(pi C |z| / 2) at every sampled node, compared in
/// log space so large C cannot overflow the bound.
inline P2Report check_P2(const WindowSystem& ws) {
    P2Report rep;
    const double C = ws.config.C;
    const Grid& g = ws.v.grid;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double val = ws.v.values[k];
        rep.nodes++;
        const double bound = 2.0 * M_PI * C + 0.5 * M_PI * C * std::abs(g.point(k));
        if (val <= 0.0) continue; // log margin infinite
        const double margin = bound - std::log(val);
        rep.min_log_margin = std::min(rep.min_log_margin, margin);
        if (margin < 0.0) rep.pass = false;
    }
    return rep;
}

struct P3Entry {
    int window = 0;
    double min_value = std::numeric_limits<double>::infinity();
    double tolerance = 0.0;
    std::size_t nodes = 0;
    bool pass = true;
};

struct P3Report {
    std::vector<P3Entry> entries;
    bool pass = true;
};

/// v >= 1/2 on the annulus D^{+5/(3C)} \ D^{+1/(3C)}, sampled on a local
/// grid around each window with exact distances to the D rectangles.
inline P3Report check_P3(const WindowSystem& ws, int local_n = 0) {
    P3Report rep;
    const double C = ws.config.C;
    if (local_n <= 0) local_n = static_cast<int>(std::ceil(24 * C)) + 1;
    for (std::size_t i = 0; i < ws.config.points.size(); ++i) {
        P3Entry e;
        e.window = static_cast<int>(i);
        const auto& dr = ws.geometry[i].d_rects;
        Grid lg(Square(ws.config.points[i], 1.0 + 2.0 / C), local_n);
        const double h = lg.h();
        for (std::size_t k = 0; k < lg.size(); ++k) {
            const cplx z = lg.point(k);
            const double d = dr.distance(z);
            if (d < 1.0 / (3.0 * C) || d >= 5.0 / (3.0 * C)) continue;
            const double val = ws.value(z);
            ++e.nodes;
            if (val < e.min_value) {
                e.min_value = val;
                double lip = 0.0;
                for (cplx dz : {cplx(h, 0), cplx(-h, 0), cplx(0, h), cplx(0, -h)})
                    lip = std::max(lip, std::fabs(ws.value(z + dz) - val) / h);
                e.tolerance = 10.0 * h * lip;
            }
        }
        e.pass = e.nodes == 0 || e.min_value >= 0.5 - e.tolerance;
        rep.pass = rep.pass && e.pass;
        rep.entries.push_back(e);
    }
    return rep;
}

} // namespace holoweld
