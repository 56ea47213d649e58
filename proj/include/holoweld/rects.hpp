#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "geometry.hpp"

namespace holoweld {

struct Rect {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0; // x0 <= x1, y0 <= y1

    Rect() = default;
    Rect(double a, double b, double c, double d) : x0(a), y0(b), x1(c), y1(d) {}
    static Rect square(cplx center, double half_edge) {
        return {center.real() - half_edge, center.imag() - half_edge,
                center.real() + half_edge, center.imag() + half_edge};
    }

    bool valid() const { return x1 > x0 && y1 > y0; }
    double area() const { return valid() ? (x1 - x0) * (y1 - y0) : 0.0; }
    bool contains(double x, double y) const {
        return x >= x0 && x <= x1 && y >= y0 && y <= y1;
    }
    bool contains(const Rect& r) const {
        return r.x0 >= x0 && r.x1 <= x1 && r.y0 >= y0 && r.y1 <= y1;
    }
    std::optional<Rect> intersect(const Rect& r) const {
        Rect out{std::max(x0, r.x0), std::max(y0, r.y0), std::min(x1, r.x1),
                 std::min(y1, r.y1)};
        if (!out.valid()) return std::nullopt;
        return out;
    }
    Rect shrink(double eps) const { return {x0 + eps, y0 + eps, x1 - eps, y1 - eps}; }
    Rect grow(double eps) const { return {x0 - eps, y0 - eps, x1 + eps, y1 + eps}; }

    /// Euclidean distance from a point to this (closed) rectangle.
    double distance(cplx z) const {
        const double dx = std::max({x0 - z.real(), 0.0, z.real() - x1});
        const double dy = std::max({y0 - z.imag(), 0.0, z.imag() - y1});
        return std::hypot(dx, dy);
    }
    /// Distance from a point to the complement (depth); <= 0 outside.
    double depth(cplx z) const {
        return std::min(std::min(z.real() - x0, x1 - z.real()),
                        std::min(z.imag() - y0, y1 - z.imag()));
    }
};

/// Union of axis-aligned rectangles; rectangles may overlap.
struct RectRegion {
    std::vector<Rect> rects;

    RectRegion() = default;
    explicit RectRegion(std::vector<Rect> rs) : rects(std::move(rs)) {}

    void add(const Rect& r) {
        if (r.valid()) rects.push_back(r);
    }
    bool empty() const { return rects.empty(); }

    bool contains(cplx z) const {
        for (const auto& r : rects)
            if (r.contains(z.real(), z.imag())) return true;
        return false;
    }

    double distance(cplx z) const {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& r : rects) d = std::min(d, r.distance(z));
        return d;
    }

    /// Max depth into any member rectangle (union depth is at least this).
    double depth(cplx z) const {
        double d = -std::numeric_limits<double>::infinity();
        for (const auto& r : rects) d = std::max(d, r.depth(z));
        return d;
    }

    RectRegion clipped(const Rect& frame) const {
        RectRegion out;
        for (const auto& r : rects)
            if (auto c = r.intersect(frame)) out.add(*c);
        return out;
    }

    /// Exact union area via coordinate-compressed sweep line.
    double area() const {
        if (rects.empty()) return 0.0;
        struct Event {
            double x;
            int type; // +1 open, -1 close
            int yi0, yi1;
        };
        std::vector<double> ys;
        ys.reserve(rects.size() * 2);
        for (const auto& r : rects) {
            ys.push_back(r.y0);
            ys.push_back(r.y1);
        }
        std::sort(ys.begin(), ys.end());
        ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
        auto yindex = [&](double y) {
            return static_cast<int>(std::lower_bound(ys.begin(), ys.end(), y) - ys.begin());
        };
        std::vector<Event> events;
        events.reserve(rects.size() * 2);
        for (const auto& r : rects) {
            events.push_back({r.x0, +1, yindex(r.y0), yindex(r.y1)});
            events.push_back({r.x1, -1, yindex(r.y0), yindex(r.y1)});
        }
        std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
            if (a.x != b.x) return a.x < b.x;
            return a.type > b.type;
        });
        std::vector<int> cover(ys.size() > 0 ? ys.size() - 1 : 0, 0);
        double total = 0.0, prev_x = events.front().x;
        auto covered_len = [&] {
            double len = 0.0;
            for (std::size_t i = 0; i < cover.size(); ++i)
                if (cover[i] > 0) len += ys[i + 1] - ys[i];
            return len;
        };
        for (const auto& e : events) {
            if (e.x > prev_x) {
                total += covered_len() * (e.x - prev_x);
                prev_x = e.x;
            }
            for (int i = e.yi0; i < e.yi1; ++i) cover[i] += e.type;
        }
        return total;
    }

    /// Area of (this intersect frame).
    double area_in(const Rect& frame) const { return clipped(frame).area(); }

    /// Whether r is covered by the union, decided by area arithmetic.
    bool covers(const Rect& r, double rel_tol = 1e-9) const {
        if (!r.valid()) return true;
        const double a = clipped(r).area();
        return a >= r.area() * (1.0 - rel_tol);
    }
};

} // namespace holoweld
