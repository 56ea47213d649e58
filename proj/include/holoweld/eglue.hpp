#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dbar.hpp"
#include "fields.hpp"
#include "shglue.hpp"
#include "windows.hpp"

namespace holoweld {

/// Standard bump: exp(-1/(1-|z|^2)) on the open unit disc, zero outside.
inline double bump(cplx z) {
    const double r2 = std::norm(z);
    if (r2 >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - r2));
}

/// Analytic patches on S_1, one per window, with the growth-budget bound
/// sup |f_lambda| <= exp(2^{1-B} M) and M > 40 log C.
struct AnalyticPatchSet {
    Configuration config;
    std::vector<ComplexField> patches;
    double M = 400.0;
    double B = 10.0;
    double holomorphy_factor = 50.0; // dbar_fd sup <= factor * h^2 * sup|patch|

    void validate() const {
        config.validate();
        if (patches.size() != config.points.size())
            throw std::invalid_argument("entire glue: one patch per window required");
        for (cplx p : config.points)
            if (!(norm_inf(p) <= config.C))
                throw std::invalid_argument("entire glue: window centers must lie in S_C");
        if (!(M > 40.0 * std::log(config.C)))
            throw std::invalid_argument("entire glue: hypothesis M > 40 log C fails");
        const double log_bound = std::pow(2.0, 1.0 - B) * M;
        for (std::size_t i = 0; i < patches.size(); ++i) {
            const auto& p = patches[i];
            p.check_finite("analytic patch");
            const double sup = sup_norm(p);
            if (sup > 0.0 && std::log(sup) > log_bound)
                throw std::invalid_argument("entire glue: patch " + std::to_string(i) +
                                            " exceeds exp(2^{1-B} M)");
            const double leak = sup_norm(dbar_fd(p));
            if (leak > holomorphy_factor * p.grid.h() * p.grid.h() * std::max(sup, 1e-300))
                throw std::invalid_argument("entire glue: patch " + std::to_string(i) +
                                            " fails the holomorphy test");
        }
    }
};

struct Cutoff {
    RealField chi;
    double gradient_bound = 0.0; // 100 C
    double max_gradient = 0.0;   // measured
    bool one_on_inner = true;    // chi = 1 on every D^{+1/(4C)}
    bool zero_off_outer = true;  // chi = 0 off the union of D^{+3/(4C)}
    bool pass = true;
};

/// Mollified indicator cutoff: the normalized bump of radius 1/(4C)
/// convolved with the indicator of the union of D^{+1/(2C)}.
inline Cutoff build_cutoff(const WindowSystem& ws, const Grid& grid) {
    const double C = ws.config.C;
    const double h = grid.h();
    if (h > 1.0 / (32.0 * C) + 1e-12)
        throw std::invalid_argument(
            "build_cutoff: grid too coarse, need h <= 1/(32C)");
    const double r = 1.0 / (4.0 * C);
    const int reach = static_cast<int>(std::floor(r / h));

    // discrete normalized kernel
    std::vector<double> kernel((2 * reach + 1) * (2 * reach + 1), 0.0);
    double ksum = 0.0;
    for (int dy = -reach; dy <= reach; ++dy)
        for (int dx = -reach; dx <= reach; ++dx) {
            const double v = bump(cplx(dx * h / r, dy * h / r));
            kernel[(dy + reach) * (2 * reach + 1) + dx + reach] = v;
            ksum += v;
        }
    for (double& v : kernel) v /= ksum;

    Cutoff cut;
    cut.chi = RealField(grid, 0.0);
    cut.gradient_bound = 100.0 * C;

    // psi = 1 within distance 1/(2C) of a D rectangle; chi is its mollified
    // version, evaluated only near the windows (zero elsewhere)
    const double psi_r = 1.0 / (2.0 * C);
    const int n = grid.n;
    for (std::size_t w = 0; w < ws.config.points.size(); ++w) {
        const cplx lam = ws.config.points[w];
        const auto& dr = ws.geometry[w].d_rects;
        // bounding box of the evaluation zone
        const double pad = psi_r + r + 2 * h;
        const int ix0 = std::max(0, static_cast<int>((lam.real() - 1 - pad - grid.x(0)) / h));
        const int ix1 = std::min(n - 1, static_cast<int>((lam.real() + 1 + pad - grid.x(0)) / h) + 1);
        const int iy0 = std::max(0, static_cast<int>((lam.imag() - 1 - pad - grid.y(0)) / h));
        const int iy1 = std::min(n - 1, static_cast<int>((lam.imag() + 1 + pad - grid.y(0)) / h) + 1);
        // psi on the padded box
        const int bw = ix1 - ix0 + 1, bh = iy1 - iy0 + 1;
        if (bw <= 0 || bh <= 0) continue;
        std::vector<std::uint8_t> psi(static_cast<std::size_t>(bw) * bh, 0);
        parallel_for(0, static_cast<std::size_t>(bh), [&](std::size_t ry) {
            for (int rx = 0; rx < bw; ++rx) {
                const cplx z = grid.point(ix0 + rx, iy0 + static_cast<int>(ry));
                psi[ry * bw + rx] = dr.distance(z) < psi_r ? 1 : 0;
            }
        });
        parallel_for(0, static_cast<std::size_t>(bh), [&](std::size_t ry) {
            for (int rx = 0; rx < bw; ++rx) {
                double acc = 0.0;
                for (int dy = -reach; dy <= reach; ++dy) {
                    const int sy = static_cast<int>(ry) + dy;
                    if (sy < 0 || sy >= bh) continue;
                    for (int dx = -reach; dx <= reach; ++dx) {
                        const int sx = rx + dx;
                        if (sx < 0 || sx >= bw) continue;
                        if (psi[static_cast<std::size_t>(sy) * bw + sx])
                            acc += kernel[(dy + reach) * (2 * reach + 1) + dx + reach];
                    }
                }
                if (acc > 0.0)
                    cut.chi.at(ix0 + rx, iy0 + static_cast<int>(ry)) = std::min(1.0, acc);
            }
        });
    }

    // measured invariants
    for (std::size_t w = 0; w < ws.config.points.size(); ++w) {
        const auto& dr = ws.geometry[w].d_rects;
        const cplx lam = ws.config.points[w];
        const int ix0 = std::max(0, static_cast<int>((lam.real() - 1.2 - grid.x(0)) / h));
        const int ix1 = std::min(n - 1, static_cast<int>((lam.real() + 1.2 - grid.x(0)) / h) + 1);
        const int iy0 = std::max(0, static_cast<int>((lam.imag() - 1.2 - grid.y(0)) / h));
        const int iy1 = std::min(n - 1, static_cast<int>((lam.imag() + 1.2 - grid.y(0)) / h) + 1);
        for (int iy = iy0; iy <= iy1; ++iy)
            for (int ix = ix0; ix <= ix1; ++ix) {
                const cplx z = grid.point(ix, iy);
                const double dist = dr.distance(z);
                const double val = cut.chi.at(ix, iy);
                if (dist < 1.0 / (4.0 * C) && val != 1.0) cut.one_on_inner = false;
                if (dist > 3.0 / (4.0 * C) && val != 0.0) cut.zero_off_outer = false;
            }
    }
    double grad = 0.0;
    for (int iy = 1; iy < n - 1; ++iy)
        for (int ix = 1; ix < n - 1; ++ix) {
            const double gx = (cut.chi.at(ix + 1, iy) - cut.chi.at(ix - 1, iy)) / (2 * h);
            const double gy = (cut.chi.at(ix, iy + 1) - cut.chi.at(ix, iy - 1)) / (2 * h);
            grad = std::max(grad, std::hypot(gx, gy));
        }
    cut.max_gradient = grad;
    cut.pass = cut.one_on_inner && cut.zero_off_outer && grad <= cut.gradient_bound;
    return cut;
}

namespace eglimpl {

/// Window centers must sit on the weld lattice so patch nodes map to weld
/// nodes exactly; returns the node index of lambda or throws.
inline void check_alignment(const Grid& weld, const ComplexField& patch, cplx lam) {
    const double h = weld.h();
    if (std::fabs(patch.grid.h() - h) > 1e-12 * h)
        throw std::invalid_argument("entire glue: patch grid spacing differs from the weld grid");
    if (std::abs(patch.grid.square.center) > 1e-12 ||
        std::fabs(patch.grid.square.half_edge - 1.0) > 1e-12)
        throw std::invalid_argument("entire glue: patches must be sampled on S_1 around 0");
    const double cells = 1.0 / h; // the unit offset to the patch corner
    if (std::fabs(cells - std::round(cells)) > 1e-6)
        throw std::invalid_argument("entire glue: weld spacing must divide the unit square");
    const double fx = (lam.real() - weld.x(0)) / h;
    const double fy = (lam.imag() - weld.y(0)) / h;
    if (std::fabs(fx - std::round(fx)) > 1e-6 || std::fabs(fy - std::round(fy)) > 1e-6)
        throw std::invalid_argument("entire glue: window center off the weld lattice");
}

} // namespace eglimpl

/// g = chi * sum f_lambda(z - lambda) 1_{S_1(lambda)}; node-exact patch
/// reads (the configuration is lattice-aligned by construction).
inline ComplexField assemble_g(const AnalyticPatchSet& ps, const Cutoff& cut,
                               const WindowSystem& ws) {
    const Grid& grid = cut.chi.grid;
    const double C = ps.config.C;
    // the chi = 0 area must separate the squares: D^{+3/(4C)} stays inside
    // the open square with a quarter-corridor to spare
    for (std::size_t w = 0; w < ws.config.points.size(); ++w) {
        const cplx lam = ws.config.points[w];
        const Rect sq{lam.real() - 1, lam.imag() - 1, lam.real() + 1, lam.imag() + 1};
        for (const auto& r : ws.geometry[w].d_rects.rects)
            if (!sq.shrink(1.0 / (8.0 * C)).contains(r.grow(3.0 / (4.0 * C))))
                throw std::invalid_argument(
                    "entire glue: cutoff support does not separate the squares");
    }
    ComplexField g(grid);
    const double h = grid.h();
    for (std::size_t w = 0; w < ps.config.points.size(); ++w) {
        const cplx lam = ps.config.points[w];
        eglimpl::check_alignment(grid, ps.patches[w], lam);
        const auto& patch = ps.patches[w];
        const int pn = patch.grid.n;
        const int jx0 = static_cast<int>(std::round((lam.real() - 1.0 - grid.x(0)) / h));
        const int jy0 = static_cast<int>(std::round((lam.imag() - 1.0 - grid.y(0)) / h));
        for (int py = 0; py < pn; ++py) {
            const int iy = jy0 + py;
            if (iy < 0 || iy >= grid.n) continue;
            for (int px = 0; px < pn; ++px) {
                const int ix = jx0 + px;
                if (ix < 0 || ix >= grid.n) continue;
                const double c = cut.chi.at(ix, iy);
                if (c != 0.0) g.at(ix, iy) = c * patch.at(px, py);
            }
        }
    }
    return g;
}

struct E1Entry {
    int window = 0;
    std::size_t inner_nodes = 0;
    double sup_inner = 0.0;       // sup over D^{-1/(4C)} of |f - f_lambda(.-lambda)|
    double paper_threshold = 0.0; // e^{-M/4}
    double cert_floor = 0.0;      // mean-value bound from the achieved weighted norm
    double tolerance = 0.0;       // max(paper_threshold, 10 * cert_floor)
    double bad_area_eff = 0.0;    // m(S_1 \ A^{-eps}) at the effective threshold
    double bad_area_paper = 0.0;  // same at the paper threshold
    double bad_area_bound = 0.0;  // 160/C + 200 eps
    bool inner_ok = true;
};

struct GlueResult {
    ComplexField f;
    ComplexField alpha;
    double dbar_residual = 0.0;          // sup |dbar_fd(f)| = solver residual
    double dbar_residual_interior = 0.0;
    double weighted_alpha_norm = 0.0;
    double rhs_weighted_norm = 0.0;
    double rhs_ring_weighted_norm = 0.0; // restricted to the transition rings
    double cert_slack = 0.0;             // weighted_alpha_norm / (rhs_weighted_norm / 2)
    double rhs_cert_log_bound = 0.0;     // 4 log C - M/2
    bool rhs_cert_ok = true;             // log rhs_ring_weighted_norm <= bound
    double dbar_support_leak = 0.0;      // |dbar g| outside the rings / (h^2 sup|g|)
    std::vector<E1Entry> e1;
    std::vector<RasterSet> a_sets;       // A_lambda at the effective threshold
    double e2_log_log_bound = 0.0;       // log of 2^{1-B} M e^{pi C^2}
    double e2_log_max = 0.0;             // log max |f| over grid and S_C scan
    double e2_log_max_grid = 0.0;
    bool e2_ok = true;
    double far_const_abs = 0.0;          // |mean of f - p| on the outer frame
    double extension_err = 0.0;          // max |f - p - c| on the outer frame
    DbarResult solver;
    bool pass = true;
};

/// Lemma-2.3 style weld: f = g - alpha with alpha the minimal-weighted-norm
/// dbar correction under the glued subharmonic weight.
inline GlueResult glue_entire(const AnalyticPatchSet& ps, const SubharmonicGlue& sh,
                              const DbarOptions& opt = {}, double e1_eps = 0.01) {
    ps.validate();
    const double C = ps.config.C;
    const double M = ps.M;
    if (sh.ws.config.points.size() != ps.config.points.size())
        throw std::invalid_argument("glue_entire: window sets differ");
    for (std::size_t i = 0; i < ps.config.points.size(); ++i)
        if (sh.ws.config.points[i] != ps.config.points[i])
            throw std::invalid_argument("glue_entire: window sets differ");
    if (std::fabs(sh.M - M) > 1e-9 * M)
        throw std::invalid_argument("glue_entire: subharmonic glue used a different M");

    const Grid& grid = sh.u.grid;
    Cutoff cut = build_cutoff(sh.ws, grid);
    ComplexField g = assemble_g(ps, cut, sh.ws);
    const double sup_g = sup_norm(g);
    ComplexField rhs = dbar_fd(g);

    GlueResult out;
    // dbar g must live on the mollification rings; the ring-restricted
    // weighted integral is the certificate integrand of the construction
    // (off the rings the continuum dbar g vanishes and only the h^2
    // discretization floor remains, reported as the leak)
    {
        double leak = 0.0;
        double ring_norm = 0.0;
        const double h = grid.h();
        const int n = grid.n;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const cplx z = grid.point(k);
            bool in_ring = false;
            const auto [cx, cy] = winimpl::cell_of(z);
            const auto it = sh.ws.b_sets.find(winimpl::cell_key(cx, cy));
            if (it != sh.ws.b_sets.end())
                for (int idx : it->second) {
                    const double d = sh.ws.geometry[idx].d_rects.distance(z);
                    if (d > 1.0 / (4.0 * C) - 2.5 * h && d < 3.0 / (4.0 * C) + 2.5 * h) {
                        in_ring = true;
                        break;
                    }
                }
            if (!in_ring) {
                leak = std::max(leak, std::abs(rhs.values[k]));
            } else {
                const int ix = static_cast<int>(k % n), iy = static_cast<int>(k / n);
                ring_norm += std::exp(-sh.u.values[k]) * std::norm(rhs.values[k]) *
                             dbarimpl::quad_weight(grid, ix, iy);
            }
        }
        out.dbar_support_leak = leak / (h * h * std::max(sup_g, 1e-300));
        out.rhs_ring_weighted_norm = ring_norm;
    }

    out.solver = solve_dbar_min(rhs, &sh.u, opt);
    out.alpha = out.solver.alpha;
    out.weighted_alpha_norm = out.solver.weighted_alpha_norm;
    out.rhs_weighted_norm = out.solver.rhs_weighted_norm;
    out.cert_slack = out.weighted_alpha_norm / (0.5 * std::max(out.rhs_weighted_norm, 1e-300));
    out.rhs_cert_log_bound = 4.0 * std::log(C) - 0.5 * M;
    out.rhs_cert_ok = out.rhs_ring_weighted_norm <= 0.0 ||
                      std::log(out.rhs_ring_weighted_norm) <= out.rhs_cert_log_bound;

    out.f = ComplexField(grid);
    for (std::size_t k = 0; k < grid.size(); ++k)
        out.f.values[k] = g.values[k] - out.alpha.values[k];
    out.dbar_residual = out.solver.residual_sup;
    out.dbar_residual_interior = out.solver.residual_interior;

    // far-field constant: f - p on the outer frame (lattice solve artifacts)
    {
        cplx acc(0, 0);
        double worst = 0.0;
        std::size_t cnt = 0;
        std::vector<cplx> diffs;
        for (int ix = 0; ix < grid.n; ++ix)
            for (int iy : {0, grid.n - 1}) {
                diffs.push_back(out.f.at(ix, iy) - out.solver.poly_at(grid.point(ix, iy)));
                diffs.push_back(out.f.at(iy, ix) - out.solver.poly_at(grid.point(iy, ix)));
            }
        for (cplx d : diffs) acc += d;
        cnt = diffs.size();
        const cplx c = acc / static_cast<double>(cnt);
        for (cplx d : diffs) worst = std::max(worst, std::abs(d - c));
        out.far_const_abs = std::abs(c);
        out.extension_err = worst;

        // E2 in log space: grid max plus a coarse S_C scan via p + c when
        // the weld grid does not reach S_C
        double vmax = 0.0;
        for (cplx v : out.f.values) vmax = std::max(vmax, std::abs(v));
        out.e2_log_max_grid = vmax > 0 ? std::log(vmax) : -700.0;
        double scan_max = vmax;
        if (grid.square.half_edge < C || std::abs(grid.square.center) > 1e-12) {
            const int sn = 256;
            for (int iy = 0; iy < sn; ++iy)
                for (int ix = 0; ix < sn; ++ix) {
                    const cplx z{-C + 2.0 * C * ix / (sn - 1), -C + 2.0 * C * iy / (sn - 1)};
                    scan_max = std::max(scan_max, std::abs(out.solver.poly_at(z) + c));
                }
        }
        out.e2_log_max = scan_max > 0 ? std::log(scan_max) : -700.0;
        out.e2_log_log_bound = (1.0 - ps.B) * std::log(2.0) + std::log(M) + M_PI * C * C;
        // compare log|f|max against exp((1-B)log2 + log M + pi C^2) in log space
        const double log_of_bound_log = out.e2_log_log_bound;
        out.e2_ok = out.e2_log_max <= 0.0 ||
                    std::log(std::max(out.e2_log_max, 1e-300)) <= log_of_bound_log;
    }

    // E1 per window
    const double c0 = 1.0 / (16.0 * C);
    const double h = grid.h();
    for (std::size_t w = 0; w < ps.config.points.size(); ++w) {
        E1Entry e;
        e.window = static_cast<int>(w);
        e.paper_threshold = std::exp(-0.25 * M);
        const cplx lam = ps.config.points[w];
        const auto& dr = sh.ws.geometry[w].d_rects;
        const auto& patch = ps.patches[w];
        const int pn = patch.grid.n;
        const int jx0 = static_cast<int>(std::round((lam.real() - 1.0 - grid.x(0)) / h));
        const int jy0 = static_cast<int>(std::round((lam.imag() - 1.0 - grid.y(0)) / h));

        double weight_factor = 0.0; // max (1+|z|^2)^2 e^u over the ball-swept zone
        for (int py = 0; py < pn; ++py)
            for (int px = 0; px < pn; ++px) {
                const int ix = jx0 + px, iy = jy0 + py;
                if (ix < 0 || ix >= grid.n || iy < 0 || iy >= grid.n) continue;
                const cplx z = grid.point(ix, iy);
                const double depth = dr.depth(z);
                if (depth > 1.0 / (4.0 * C)) {
                    ++e.inner_nodes;
                    const double diff = std::abs(out.f.at(ix, iy) - patch.at(px, py));
                    e.sup_inner = std::max(e.sup_inner, diff);
                }
                if (depth > 3.0 / (16.0 * C)) {
                    const double fac = std::exp(2.0 * std::log1p(std::norm(z)) +
                                                sh.u.at(ix, iy));
                    weight_factor = std::max(weight_factor, fac);
                }
            }
        e.cert_floor =
            std::sqrt(weight_factor * out.weighted_alpha_norm / (M_PI * c0 * c0));
        e.tolerance = std::max(e.paper_threshold, 10.0 * e.cert_floor);
        e.inner_ok = e.inner_nodes == 0 || e.sup_inner <= e.tolerance;

        // A_lambda rasters and the E1 measure statement
        Grid local(Square(lam, 1.0), pn);
        RasterSet a_eff(local), a_paper(local);
        const double eff = e.tolerance;
        for (int py = 0; py < pn; ++py)
            for (int px = 0; px < pn; ++px) {
                const int ix = jx0 + px, iy = jy0 + py;
                if (ix < 0 || ix >= grid.n || iy < 0 || iy >= grid.n) continue;
                const double diff = std::abs(out.f.at(ix, iy) - patch.at(px, py));
                a_eff.set(px, py, diff < eff);
                a_paper.set(px, py, diff < e.paper_threshold);
            }
        e.bad_area_bound = 160.0 / C + 200.0 * e1_eps;
        e.bad_area_eff = 4.0 - raster_area(erode(a_eff, e1_eps)).value;
        e.bad_area_paper = 4.0 - raster_area(erode(a_paper, e1_eps)).value;
        out.a_sets.push_back(std::move(a_eff));
        out.pass = out.pass && e.inner_ok &&
                   (e.bad_area_bound >= 4.0 || e.bad_area_eff <= e.bad_area_bound);
        out.e1.push_back(e);
    }
    out.pass = out.pass && out.e2_ok && out.rhs_cert_ok && cut.pass;
    return out;
}

} // namespace holoweld
