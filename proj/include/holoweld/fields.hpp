#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "parallel.hpp"

namespace holoweld {

namespace detail {
inline bool finite(double v) { return std::isfinite(v); }
inline bool finite(cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }
inline double abs_of(double v) { return std::fabs(v); }
inline double abs_of(cplx v) { return std::abs(v); }
} // namespace detail

template <typename T>
struct Field {
    Grid grid;
    std::vector<T> values;

    Field() = default;
    explicit Field(const Grid& g, T fill = T{}) : grid(g), values(g.size(), fill) {}

    T& at(int ix, int iy) { return values[grid.index(ix, iy)]; }
    const T& at(int ix, int iy) const { return values[grid.index(ix, iy)]; }

    /// Bilinear interpolation; z is clamped to the grid box.
    T interp(cplx z) const {
        const double h = grid.h();
        double fx = (z.real() - grid.x(0)) / h;
        double fy = (z.imag() - grid.y(0)) / h;
        fx = std::clamp(fx, 0.0, static_cast<double>(grid.n - 1));
        fy = std::clamp(fy, 0.0, static_cast<double>(grid.n - 1));
        int ix = std::min(static_cast<int>(fx), grid.n - 2);
        int iy = std::min(static_cast<int>(fy), grid.n - 2);
        const double tx = fx - ix, ty = fy - iy;
        const T v00 = at(ix, iy), v10 = at(ix + 1, iy);
        const T v01 = at(ix, iy + 1), v11 = at(ix + 1, iy + 1);
        return v00 * ((1 - tx) * (1 - ty)) + v10 * (tx * (1 - ty)) +
               v01 * ((1 - tx) * ty) + v11 * (tx * ty);
    }

    void check_finite(const char* what) const {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!detail::finite(values[i]))
                throw std::runtime_error(std::string(what) + ": non-finite value at node " +
                                         std::to_string(i));
        }
    }
};

using RealField = Field<double>;
using ComplexField = Field<cplx>;

struct RasterSet {
    Grid grid;
    std::vector<std::uint8_t> member;

    RasterSet() = default;
    explicit RasterSet(const Grid& g, bool fill = false)
        : grid(g), member(g.size(), fill ? 1 : 0) {}

    bool at(int ix, int iy) const { return member[grid.index(ix, iy)] != 0; }
    void set(int ix, int iy, bool v) { member[grid.index(ix, iy)] = v ? 1 : 0; }
    std::size_t count() const {
        std::size_t c = 0;
        for (auto m : member) c += m;
        return c;
    }
    bool empty() const { return count() == 0; }
};

/// Raster measure with the discretization error bar (perimeter * h).
struct AreaEstimate {
    double value = 0.0;
    double half_width = 0.0;
};

inline AreaEstimate raster_area(const RasterSet& s) {
    const double h = s.grid.h();
    const int n = s.grid.n;
    std::size_t cnt = 0, boundary_edges = 0;
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            if (!s.at(ix, iy)) continue;
            ++cnt;
            const bool edge = ix == 0 || ix == n - 1 || iy == 0 || iy == n - 1;
            if (edge || !s.at(ix - 1, iy) || !s.at(ix + 1, iy) || !s.at(ix, iy - 1) ||
                !s.at(ix, iy + 1))
                ++boundary_edges;
        }
    }
    return {static_cast<double>(cnt) * h * h, static_cast<double>(boundary_edges) * h * h};
}

template <typename Fn>
auto sample(const Square& sq, int n, Fn&& fn) {
    using T = decltype(fn(cplx{}));
    Field<T> f{Grid(sq, n)};
    const Grid& g = f.grid;
    parallel_for(0, g.size(), [&](std::size_t i) { f.values[i] = fn(g.point(i)); });
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        if (!detail::finite(f.values[i])) {
            const cplx z = g.point(i);
            throw std::runtime_error("sample: non-finite value at node (" +
                                     std::to_string(i % g.n) + "," + std::to_string(i / g.n) +
                                     "), z = " + std::to_string(z.real()) + "+" +
                                     std::to_string(z.imag()) + "i");
        }
    }
    return f;
}

namespace detail {
/// Node offsets within Euclidean distance eps (in grid units of h).
inline std::vector<std::pair<int, int>> disc_offsets(double eps, double h) {
    const int r = static_cast<int>(std::floor(eps / h + 1e-12));
    std::vector<std::pair<int, int>> off;
    const double r2 = (eps / h) * (eps / h) * (1.0 + 1e-12);
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            if (dx * dx + dy * dy <= r2) off.emplace_back(dx, dy);
    return off;
}
} // namespace detail

/// Nodes within distance eps of a member node.
inline RasterSet dilate(const RasterSet& s, double eps) {
    if (eps < 0) throw std::invalid_argument("dilate: eps must be >= 0");
    RasterSet out(s.grid);
    const int n = s.grid.n;
    const auto off = detail::disc_offsets(eps, s.grid.h());
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            if (!s.at(ix, iy)) continue;
            for (auto [dx, dy] : off) {
                const int jx = ix + dx, jy = iy + dy;
                if (jx >= 0 && jx < n && jy >= 0 && jy < n) out.set(jx, jy, true);
            }
        }
    return out;
}

/// Nodes whose sampled eps-ball avoids the complement. The complement
/// includes everything outside the grid square, and at eps = 0 the nodes
/// 4-adjacent to the complement are still removed (one-node band).
inline RasterSet erode(const RasterSet& s, double eps) {
    if (eps < 0) throw std::invalid_argument("erode: eps must be >= 0");
    const int n = s.grid.n;
    RasterSet killed(s.grid);
    const auto off = detail::disc_offsets(eps, s.grid.h());
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            if (s.at(ix, iy)) continue;
            for (auto [dx, dy] : off) {
                const int jx = ix + dx, jy = iy + dy;
                if (jx >= 0 && jx < n && jy >= 0 && jy < n) killed.set(jx, jy, true);
            }
        }
    RasterSet out(s.grid);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            if (!s.at(ix, iy) || killed.at(ix, iy)) continue;
            if (ix == 0 || ix == n - 1 || iy == 0 || iy == n - 1) continue;
            if (!s.at(ix - 1, iy) || !s.at(ix + 1, iy) || !s.at(ix, iy - 1) ||
                !s.at(ix, iy + 1))
                continue;
            if (s.grid.square.depth(s.grid.point(ix, iy)) < eps) continue;
            out.set(ix, iy, true);
        }
    return out;
}

/// Max over interior nodes of u(center) minus the sampled circle mean of
/// radius r. Subharmonic data keeps this near or below zero.
inline double subharmonicity_defect(const RealField& u, double r, int circle_samples = 16) {
    const Grid& g = u.grid;
    const double h = g.h();
    if (!(r >= 2.0 * h))
        throw std::runtime_error("subharmonicity_defect: r < 2h, refine the grid");
    double worst = -std::numeric_limits<double>::infinity();
    std::vector<double> worst_row(g.n, worst);
    parallel_for(0, static_cast<std::size_t>(g.n), [&](std::size_t iy) {
        double w = -std::numeric_limits<double>::infinity();
        for (int ix = 0; ix < g.n; ++ix) {
            const cplx z = g.point(ix, static_cast<int>(iy));
            if (g.square.depth(z) < r) continue;
            double mean = 0.0;
            for (int k = 0; k < circle_samples; ++k) {
                const double th = 2.0 * M_PI * k / circle_samples;
                mean += u.interp(z + cplx(r * std::cos(th), r * std::sin(th)));
            }
            mean /= circle_samples;
            w = std::max(w, u.at(ix, static_cast<int>(iy)) - mean);
        }
        worst_row[iy] = w;
    });
    for (double w : worst_row) worst = std::max(worst, w);
    return worst;
}

/// Per-node local Lipschitz estimate: max forward-difference slope.
inline RealField local_lipschitz(const RealField& u) {
    const Grid& g = u.grid;
    const double h = g.h();
    RealField lip(g, 0.0);
    for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix) {
            double m = 0.0;
            if (ix + 1 < g.n) m = std::max(m, std::fabs(u.at(ix + 1, iy) - u.at(ix, iy)) / h);
            if (iy + 1 < g.n) m = std::max(m, std::fabs(u.at(ix, iy + 1) - u.at(ix, iy)) / h);
            if (ix > 0) m = std::max(m, std::fabs(u.at(ix, iy) - u.at(ix - 1, iy)) / h);
            if (iy > 0) m = std::max(m, std::fabs(u.at(ix, iy) - u.at(ix, iy - 1)) / h);
            lip.values[g.index(ix, iy)] = m;
        }
    return lip;
}

struct SubharmonicReport {
    double max_defect = 0.0;   // worst u(z) - circle mean
    double max_excess = 0.0;   // worst defect_i - tol_i; passes when <= 0
    double tolerance_scale = 10.0;
    bool pass = true;
};

/// Sub-mean-value test with the default tolerance 10 * h * (local Lipschitz).
inline SubharmonicReport subharmonic_check(const RealField& u, double r,
                                           int circle_samples = 16) {
    const Grid& g = u.grid;
    const double h = g.h();
    if (!(r >= 2.0 * h))
        throw std::runtime_error("subharmonic_check: r < 2h, refine the grid");
    const RealField lip = local_lipschitz(u);
    SubharmonicReport rep;
    std::vector<double> row_defect(g.n, -std::numeric_limits<double>::infinity());
    std::vector<double> row_excess(g.n, -std::numeric_limits<double>::infinity());
    const int reach = static_cast<int>(std::ceil(r / h)) + 1;
    parallel_for(0, static_cast<std::size_t>(g.n), [&](std::size_t iyz) {
        const int iy = static_cast<int>(iyz);
        double wd = -std::numeric_limits<double>::infinity(), we = wd;
        for (int ix = 0; ix < g.n; ++ix) {
            const cplx z = g.point(ix, iy);
            if (g.square.depth(z) < r) continue;
            double mean = 0.0;
            double liploc = 0.0;
            for (int k = 0; k < circle_samples; ++k) {
                const double th = 2.0 * M_PI * k / circle_samples;
                mean += u.interp(z + cplx(r * std::cos(th), r * std::sin(th)));
            }
            mean /= circle_samples;
            for (int dy = -reach; dy <= reach; dy += reach)
                for (int dx = -reach; dx <= reach; dx += reach) {
                    const int jx = std::clamp(ix + dx, 0, g.n - 1);
                    const int jy = std::clamp(iy + dy, 0, g.n - 1);
                    liploc = std::max(liploc, lip.at(jx, jy));
                }
            const double defect = u.at(ix, iy) - mean;
            wd = std::max(wd, defect);
            we = std::max(we, defect - 10.0 * h * liploc);
        }
        row_defect[iyz] = wd;
        row_excess[iyz] = we;
    });
    rep.max_defect = *std::max_element(row_defect.begin(), row_defect.end());
    rep.max_excess = *std::max_element(row_excess.begin(), row_excess.end());
    rep.pass = rep.max_excess <= 0.0;
    return rep;
}

/// Central-difference d-bar = (d/dx + i d/dy)/2; second-order one-sided
/// stencils at the boundary so holomorphic data gives O(h^2) everywhere.
inline ComplexField dbar_fd(const ComplexField& f) {
    const Grid& g = f.grid;
    if (g.n < 3) throw std::runtime_error("dbar_fd: need n >= 3");
    const double h = g.h();
    ComplexField out(g);
    const int n = g.n;
    auto dx = [&](int ix, int iy) -> cplx {
        if (ix == 0) return (-3.0 * f.at(0, iy) + 4.0 * f.at(1, iy) - f.at(2, iy)) / (2 * h);
        if (ix == n - 1)
            return (3.0 * f.at(n - 1, iy) - 4.0 * f.at(n - 2, iy) + f.at(n - 3, iy)) / (2 * h);
        return (f.at(ix + 1, iy) - f.at(ix - 1, iy)) / (2 * h);
    };
    auto dy = [&](int ix, int iy) -> cplx {
        if (iy == 0) return (-3.0 * f.at(ix, 0) + 4.0 * f.at(ix, 1) - f.at(ix, 2)) / (2 * h);
        if (iy == n - 1)
            return (3.0 * f.at(ix, n - 1) - 4.0 * f.at(ix, n - 2) + f.at(ix, n - 3)) / (2 * h);
        return (f.at(ix, iy + 1) - f.at(ix, iy - 1)) / (2 * h);
    };
    parallel_for(0, static_cast<std::size_t>(n), [&](std::size_t iy) {
        for (int ix = 0; ix < n; ++ix)
            out.at(ix, static_cast<int>(iy)) =
                0.5 * (dx(ix, static_cast<int>(iy)) + cplx(0, 1) * dy(ix, static_cast<int>(iy)));
    });
    return out;
}

template <typename T>
double sup_norm(const Field<T>& f, const RasterSet* region = nullptr) {
    if (region && !region->grid.same_layout(f.grid))
        throw std::runtime_error("sup_norm: region grid mismatch");
    double m = -1.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        if (region && !region->member[i]) continue;
        m = std::max(m, detail::abs_of(f.values[i]));
    }
    if (m < 0) throw std::runtime_error("sup_norm: empty region");
    return m;
}

} // namespace holoweld
