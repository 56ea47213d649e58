#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

#include "fields.hpp"

namespace holoweld {

namespace detail {
inline void put_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) os.put(static_cast<char>((bits >> (8 * i)) & 0xff));
}
inline double get_f64(std::istream& is) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
        const int c = is.get();
        if (c < 0) throw std::runtime_error("field container: truncated");
        bits |= static_cast<std::uint64_t>(c & 0xff) << (8 * i);
    }
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}
inline void put_u32(std::ostream& os, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        const int c = is.get();
        if (c < 0) throw std::runtime_error("field container: truncated");
        v |= static_cast<std::uint32_t>(c & 0xff) << (8 * i);
    }
    return v;
}
} // namespace detail

// Binary container: "HWF1" | center re,im | half_edge | n | kind | payload.
// kind 0 = real (one f64 per node), kind 1 = complex (re,im per node).

inline void write_field(std::ostream& os, const RealField& f) {
    os.write("HWF1", 4);
    detail::put_f64(os, f.grid.square.center.real());
    detail::put_f64(os, f.grid.square.center.imag());
    detail::put_f64(os, f.grid.square.half_edge);
    detail::put_u32(os, static_cast<std::uint32_t>(f.grid.n));
    os.put(0);
    for (double v : f.values) detail::put_f64(os, v);
}

inline void write_field(std::ostream& os, const ComplexField& f) {
    os.write("HWF1", 4);
    detail::put_f64(os, f.grid.square.center.real());
    detail::put_f64(os, f.grid.square.center.imag());
    detail::put_f64(os, f.grid.square.half_edge);
    detail::put_u32(os, static_cast<std::uint32_t>(f.grid.n));
    os.put(1);
    for (cplx v : f.values) {
        detail::put_f64(os, v.real());
        detail::put_f64(os, v.imag());
    }
}

struct FieldContainer {
    int kind = 0; // 0 real, 1 complex
    RealField real;
    ComplexField complex;
};

inline FieldContainer read_field(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (is.gcount() != 4 || std::memcmp(magic, "HWF1", 4) != 0)
        throw std::runtime_error("field container: bad magic");
    const double cr = detail::get_f64(is), ci = detail::get_f64(is);
    const double a = detail::get_f64(is);
    const int n = static_cast<int>(detail::get_u32(is));
    const int kind = is.get();
    FieldContainer out;
    out.kind = kind;
    Grid g(Square(cplx(cr, ci), a), n);
    if (kind == 0) {
        out.real = RealField(g);
        for (auto& v : out.real.values) v = detail::get_f64(is);
    } else if (kind == 1) {
        out.complex = ComplexField(g);
        for (auto& v : out.complex.values) {
            const double re = detail::get_f64(is);
            const double im = detail::get_f64(is);
            v = cplx(re, im);
        }
    } else {
        throw std::runtime_error("field container: unknown kind");
    }
    return out;
}

template <typename T>
void write_csv(std::ostream& os, const Field<T>& f) {
    os << "x,y,re,im\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const cplx z = f.grid.point(i);
        double re, im;
        if constexpr (std::is_same_v<T, double>) {
            re = f.values[i];
            im = 0.0;
        } else {
            re = f.values[i].real();
            im = f.values[i].imag();
        }
        os << z.real() << ',' << z.imag() << ',' << re << ',' << im << '\n';
    }
}

/// P5 PGM, 255 = member.
inline void write_pgm(std::ostream& os, const RasterSet& s) {
    os << "P5\n" << s.grid.n << ' ' << s.grid.n << "\n255\n";
    // top image row = max y
    for (int iy = s.grid.n - 1; iy >= 0; --iy)
        for (int ix = 0; ix < s.grid.n; ++ix)
            os.put(s.at(ix, iy) ? static_cast<char>(255) : 0);
}

/// Grayscale PGM heatmap of a real field (linear ramp over [min, max]).
inline void write_pgm(std::ostream& os, const RealField& f) {
    double lo = f.values[0], hi = f.values[0];
    for (double v : f.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    os << "P5\n" << f.grid.n << ' ' << f.grid.n << "\n255\n";
    for (int iy = f.grid.n - 1; iy >= 0; --iy)
        for (int ix = 0; ix < f.grid.n; ++ix) {
            const double t = (f.at(ix, iy) - lo) / span;
            os.put(static_cast<char>(std::lround(255.0 * t)));
        }
}

} // namespace holoweld
