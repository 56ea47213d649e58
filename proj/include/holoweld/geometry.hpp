#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace holoweld {

using cplx = std::complex<double>;

inline double norm_inf(cplx z) { return std::max(std::fabs(z.real()), std::fabs(z.imag())); }

/// Axis-aligned square [center - a, center + a]^2.
struct Square {
    cplx center{0.0, 0.0};
    double half_edge = 1.0;

    Square() = default;
    Square(cplx c, double a) : center(c), half_edge(a) {
        if (!(a > 0.0)) throw std::invalid_argument("Square: half_edge must be positive");
    }
    static Square origin(double a) { return Square(cplx(0, 0), a); }

    double area() const { return 4.0 * half_edge * half_edge; }
    bool contains(cplx z) const { return norm_inf(z - center) <= half_edge; }
    /// Distance to the exterior; negative outside.
    double depth(cplx z) const { return half_edge - norm_inf(z - center); }
};

/// Uniform node-centered sampling of a square, corners included.
struct Grid {
    Square square;
    int n = 2; // samples per edge

    Grid() = default;
    Grid(Square s, int samples) : square(s), n(samples) {
        if (n < 2) throw std::invalid_argument("Grid: need n >= 2");
    }

    double h() const { return 2.0 * square.half_edge / (n - 1); }
    std::size_t size() const { return static_cast<std::size_t>(n) * n; }

    double x(int ix) const { return square.center.real() - square.half_edge + ix * h(); }
    double y(int iy) const { return square.center.imag() - square.half_edge + iy * h(); }
    cplx point(int ix, int iy) const { return {x(ix), y(iy)}; }
    cplx point(std::size_t idx) const {
        return point(static_cast<int>(idx % n), static_cast<int>(idx / n));
    }
    std::size_t index(int ix, int iy) const {
        return static_cast<std::size_t>(iy) * n + ix;
    }

    bool same_layout(const Grid& o) const {
        return n == o.n && square.center == o.square.center &&
               square.half_edge == o.square.half_edge;
    }
};

} // namespace holoweld
