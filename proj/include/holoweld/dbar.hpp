#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fields.hpp"
#include "parallel.hpp"

namespace holoweld {

namespace fftimpl {

/// Iterative radix-2 complex FFT, n a power of two.
inline void fft_inplace(cplx* a, int n, bool inverse) {
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * M_PI / len;
        const cplx wl(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (int k = 0; k < len / 2; ++k) {
                const cplx u = a[i + k];
                const cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / n;
        for (int i = 0; i < n; ++i) a[i] *= inv;
    }
}

inline void transpose(std::vector<cplx>& buf, int n) {
    parallel_for(0, static_cast<std::size_t>(n), [&](std::size_t r) {
        for (std::size_t c = r + 1; c < static_cast<std::size_t>(n); ++c)
            std::swap(buf[r * n + c], buf[c * n + r]);
    });
}

/// In-place 2-D FFT on an n x n row-major buffer.
inline void fft2d(std::vector<cplx>& buf, int n, bool inverse) {
    parallel_for(0, static_cast<std::size_t>(n),
                 [&](std::size_t r) { fft_inplace(buf.data() + r * n, n, inverse); });
    transpose(buf, n);
    parallel_for(0, static_cast<std::size_t>(n),
                 [&](std::size_t r) { fft_inplace(buf.data() + r * n, n, inverse); });
    transpose(buf, n);
}

inline int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

} // namespace fftimpl

struct DbarOptions {
    int poly_degree = 64;  // holomorphic projection subspace: span{1, z, ..., z^d}
    int quad_stride = 0;   // 0: choose so the projection samples ~2e5 nodes
    int pad_margin = 0;    // 0: at least n/8 + 32 torus padding
};

/// Solver output: the correction alpha plus its certificates, and the
/// Arnoldi data needed to evaluate the projected polynomial anywhere.
struct DbarResult {
    ComplexField alpha;
    double residual_sup = 0.0;        // sup |dbar_fd(alpha) - rhs| over the grid
    double residual_interior = 0.0;   // same, three nodes in from the boundary
    double residual_particular = 0.0; // interior residual before the projection
    double weighted_alpha_norm = 0.0; // integral |alpha|^2 e^{-u} / (1+|z|^2)^2
    double rhs_weighted_norm = 0.0;   // integral |rhs|^2 e^{-u}
    double cauchy_norm = 0.0;         // weighted norm before the projection
    int poly_degree = 0;              // effective basis degree
    int hess_cols = 0;
    double seed_norm = 0.0;           // weighted norm of the constant 1
    std::vector<cplx> hessenberg;     // (d+1) x hess_cols recurrence table
    std::vector<cplx> coeff;          // projection coefficients

    /// Evaluate the projected polynomial at any z (Arnoldi recurrence).
    cplx poly_at(cplx zin) const {
        if (coeff.empty() || seed_norm <= 0.0) return {0.0, 0.0};
        const cplx z = (zin - basis_shift) * basis_scale;
        cplx q[256];
        q[0] = cplx(1.0 / seed_norm, 0.0);
        cplx acc = coeff[0] * q[0];
        for (int k = 0; k < poly_degree; ++k) {
            cplx next = z * q[k];
            for (int j = 0; j <= k; ++j)
                next -= hessenberg[static_cast<std::size_t>(j) * hess_cols + k] * q[j];
            next /= hessenberg[static_cast<std::size_t>(k + 1) * hess_cols + k];
            q[k + 1] = next;
            acc += coeff[k + 1] * next;
        }
        return acc;
    }

    cplx basis_scale{1.0, 0.0};
    cplx basis_shift{0.0, 0.0};
};

namespace dbarimpl {

/// Quadrature weight: h^2 midpoint, halved on the boundary ring.
inline double quad_weight(const Grid& g, int ix, int iy) {
    double w = g.h() * g.h();
    if (ix == 0 || ix == g.n - 1) w *= 0.5;
    if (iy == 0 || iy == g.n - 1) w *= 0.5;
    return w;
}

inline double hormander_weight(cplx z, double u) {
    // e^{-u} / (1 + |z|^2)^2 assembled in log space; underflow gives zero
    return std::exp(-u - 2.0 * std::log1p(std::norm(z)));
}

} // namespace dbarimpl

/// Minimal-weighted-norm solve of dbar(alpha) = rhs.
///
/// The particular solution is the exact lattice inverse of the central
/// difference dbar on an enclosing torus: FFT, divide by the symbol
/// i/(2h) (sin t1 + i sin t2), transform back. Compactly supported rhs has
/// no content on the four singular modes (telescoping sums vanish), so the
/// interior residual is at rounding level. The weighted-L2 projection onto
/// polynomials of the configured degree is then subtracted; that alone
/// lowers the weighted norm toward the minimum over the affine solution
/// space while perturbing the residual only by the O(h^2) discrete dbar of
/// a polynomial.
inline DbarResult solve_dbar_min(const ComplexField& rhs, const RealField* u = nullptr,
                                 const DbarOptions& opt = {}) {
    const Grid& g = rhs.grid;
    const int n = g.n;
    const double h = g.h();
    if (n < 8) throw std::invalid_argument("solve_dbar_min: grid too small");
    if (u && !u->grid.same_layout(g))
        throw std::invalid_argument("solve_dbar_min: weight grid mismatch");
    if (opt.poly_degree > 255)
        throw std::invalid_argument("solve_dbar_min: polynomial degree cap is 255");

    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            const bool frame = ix < 3 || iy < 3 || ix >= n - 3 || iy >= n - 3;
            if (frame && rhs.at(ix, iy) != cplx(0.0, 0.0))
                throw std::invalid_argument(
                    "solve_dbar_min: rhs must be compactly supported inside the grid");
        }

    // ---- torus particular solution ----
    const int margin = opt.pad_margin > 0 ? opt.pad_margin : n / 8 + 32;
    const int N = fftimpl::next_pow2(n + margin);
    std::vector<cplx> buf(static_cast<std::size_t>(N) * N, cplx(0, 0));
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            buf[static_cast<std::size_t>(iy) * N + ix] = rhs.at(ix, iy);
    fftimpl::fft2d(buf, N, false);
    parallel_for(0, static_cast<std::size_t>(N), [&](std::size_t k2) {
        const double t2 = 2.0 * M_PI * static_cast<double>(k2) / N;
        const double s2 = std::sin(t2);
        for (int k1 = 0; k1 < N; ++k1) {
            cplx& val = buf[k2 * N + k1];
            const bool sing1 = k1 == 0 || 2 * k1 == N;
            const bool sing2 = k2 == 0 || 2 * static_cast<int>(k2) == N;
            if (sing1 && sing2) {
                val = 0.0;
            } else {
                const double t1 = 2.0 * M_PI * k1 / N;
                val /= cplx(0.0, 0.5 / h) * cplx(std::sin(t1), s2);
            }
        }
    });
    fftimpl::fft2d(buf, N, true);

    DbarResult res;
    res.alpha = ComplexField(g);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            res.alpha.at(ix, iy) = buf[static_cast<std::size_t>(iy) * N + ix];
    buf.clear();
    buf.shrink_to_fit();

    // ---- weighted polynomial projection (Arnoldi on a quadrature subsample) ----
    const int d = std::max(0, opt.poly_degree);
    res.hess_cols = d + 1;
    res.basis_shift = g.square.center;
    res.basis_scale = cplx(1.0 / g.square.half_edge, 0.0);

    int stride = opt.quad_stride;
    if (stride <= 0) {
        stride = 1;
        while (static_cast<long long>((n + stride - 1) / stride) *
                   ((n + stride - 1) / stride) >
               200000LL)
            ++stride;
    }
    std::vector<std::size_t> nodes;
    std::vector<double> wq;
    for (int iy = 0; iy < n; iy += stride)
        for (int ix = 0; ix < n; ix += stride) {
            const std::size_t k = g.index(ix, iy);
            const double uw = u ? u->values[k] : 0.0;
            const double w = dbarimpl::hormander_weight(g.point(k), uw) *
                             (h * stride) * (h * stride);
            if (w > 0.0) {
                nodes.push_back(k);
                wq.push_back(w);
            }
        }

    const std::size_t m = nodes.size();
    std::vector<cplx> zs(m);
    for (std::size_t i = 0; i < m; ++i)
        zs[i] = (g.point(nodes[i]) - res.basis_shift) * res.basis_scale;

    auto wdot = [&](const std::vector<cplx>& a, const std::vector<cplx>& b) {
        return cplx(ordered_sum(m, [&](std::size_t i) {
                        return wq[i] * (std::conj(a[i]) * b[i]).real();
                    }),
                    ordered_sum(m, [&](std::size_t i) {
                        return wq[i] * (std::conj(a[i]) * b[i]).imag();
                    }));
    };

    std::vector<std::vector<cplx>> basis;
    res.hessenberg.assign(static_cast<std::size_t>(d + 1) * res.hess_cols, cplx(0, 0));
    if (m > 0) {
        basis.emplace_back(m, cplx(1.0, 0.0));
        res.seed_norm = std::sqrt(wdot(basis[0], basis[0]).real());
        if (res.seed_norm > 0)
            for (auto& v : basis[0]) v /= res.seed_norm;
        for (int k = 0; k < d; ++k) {
            std::vector<cplx> next(m);
            for (std::size_t i = 0; i < m; ++i) next[i] = zs[i] * basis[k][i];
            for (int pass = 0; pass < 2; ++pass)
                for (int j = 0; j <= k; ++j) {
                    const cplx proj = wdot(basis[j], next);
                    res.hessenberg[static_cast<std::size_t>(j) * res.hess_cols + k] += proj;
                    for (std::size_t i = 0; i < m; ++i) next[i] -= proj * basis[j][i];
                }
            const double nrm = std::sqrt(std::max(0.0, wdot(next, next).real()));
            res.hessenberg[static_cast<std::size_t>(k + 1) * res.hess_cols + k] = nrm;
            if (!(nrm > 1e-300)) break; // weight support exhausted
            for (auto& v : next) v /= nrm;
            basis.push_back(std::move(next));
        }
    }
    res.poly_degree = std::max(0, static_cast<int>(basis.size()) - 1);

    std::vector<cplx> a0(m);
    for (std::size_t i = 0; i < m; ++i) a0[i] = res.alpha.values[nodes[i]];
    res.coeff.assign(basis.size(), cplx(0, 0));
    for (std::size_t j = 0; j < basis.size(); ++j) res.coeff[j] = wdot(basis[j], a0);

    auto weighted_norm = [&](const ComplexField& f) {
        return ordered_sum(g.size(), [&](std::size_t k) {
            const double uw = u ? u->values[k] : 0.0;
            const int ix = static_cast<int>(k % n), iy = static_cast<int>(k / n);
            const double w =
                dbarimpl::hormander_weight(g.point(k), uw) * dbarimpl::quad_weight(g, ix, iy);
            return w * std::norm(f.values[k]);
        });
    };
    res.cauchy_norm = weighted_norm(res.alpha);
    {
        const ComplexField db0 = dbar_fd(res.alpha);
        double sup0 = 0.0;
        for (int iy = 3; iy < n - 3; ++iy)
            for (int ix = 3; ix < n - 3; ++ix)
                sup0 = std::max(sup0, std::abs(db0.at(ix, iy) - rhs.at(ix, iy)));
        res.residual_particular = sup0;
    }

    if (!basis.empty()) {
        // chunked basis recurrence over the full grid
        constexpr std::size_t kChunk = 32768;
        const std::size_t chunks = (g.size() + kChunk - 1) / kChunk;
        const int deg = res.poly_degree;
        parallel_for(0, chunks, [&](std::size_t c) {
            const std::size_t lo = c * kChunk, hi = std::min(g.size(), lo + kChunk);
            const std::size_t len = hi - lo;
            std::vector<std::vector<cplx>> q(deg + 1, std::vector<cplx>(len));
            std::vector<cplx> zloc(len), acc(len);
            for (std::size_t i = 0; i < len; ++i) {
                zloc[i] = (g.point(lo + i) - res.basis_shift) * res.basis_scale;
                q[0][i] = cplx(1.0 / res.seed_norm, 0.0);
                acc[i] = res.coeff[0] * q[0][i];
            }
            for (int k = 0; k < deg; ++k) {
                auto& next = q[k + 1];
                for (std::size_t i = 0; i < len; ++i) next[i] = zloc[i] * q[k][i];
                for (int j = 0; j <= k; ++j) {
                    const cplx hj = res.hessenberg[static_cast<std::size_t>(j) * res.hess_cols + k];
                    if (hj == cplx(0, 0)) continue;
                    for (std::size_t i = 0; i < len; ++i) next[i] -= hj * q[j][i];
                }
                const cplx hk =
                    res.hessenberg[static_cast<std::size_t>(k + 1) * res.hess_cols + k];
                const cplx ck = res.coeff[k + 1];
                for (std::size_t i = 0; i < len; ++i) {
                    next[i] /= hk;
                    acc[i] += ck * next[i];
                }
            }
            for (std::size_t i = 0; i < len; ++i) res.alpha.values[lo + i] -= acc[i];
        });
    }

    res.weighted_alpha_norm = weighted_norm(res.alpha);
    res.rhs_weighted_norm = ordered_sum(g.size(), [&](std::size_t k) {
        const double uw = u ? u->values[k] : 0.0;
        const int ix = static_cast<int>(k % n), iy = static_cast<int>(k / n);
        const double w = std::exp(-uw) * dbarimpl::quad_weight(g, ix, iy);
        return w * std::norm(rhs.values[k]);
    });

    const ComplexField db = dbar_fd(res.alpha);
    double sup = 0.0, sup_int = 0.0;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            const double r = std::abs(db.at(ix, iy) - rhs.at(ix, iy));
            sup = std::max(sup, r);
            if (ix >= 3 && iy >= 3 && ix < n - 3 && iy < n - 3)
                sup_int = std::max(sup_int, r);
        }
    res.residual_sup = sup;
    res.residual_interior = sup_int;
    return res;
}

/// Test-side quadrature oracle: the plane Cauchy transform
/// (1/pi) integral rhs(w) / (z - w) dm(w) with the singular node dropped.
inline ComplexField cauchy_transform_baseline(const ComplexField& rhs) {
    const Grid& g = rhs.grid;
    const double h2 = g.h() * g.h();
    std::vector<std::size_t> support;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (rhs.values[k] != cplx(0, 0)) support.push_back(k);
    ComplexField out(g);
    parallel_for(0, g.size(), [&](std::size_t k) {
        const cplx z = g.point(k);
        cplx acc(0, 0);
        for (std::size_t w : support) {
            if (w == k) continue;
            acc += rhs.values[w] / (z - g.point(w));
        }
        out.values[k] = acc * (h2 / M_PI);
    });
    return out;
}

} // namespace holoweld
