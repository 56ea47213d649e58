#include <catch2/catch_amalgamated.hpp>

#include <holoweld/eglue.hpp>

using namespace holoweld;

namespace {

struct WeldFixture {
    AnalyticPatchSet ps;
    SubharmonicGlue sh;
    Grid grid{Square::origin(3.0), 1537}; // h = 1/256, divides the unit square

    // cubic patches on the weld-aligned S_1 grid
    void build(Rng& rng, std::vector<cplx> lambdas, double C, double B, double M) {
        ps.config.C = C;
        ps.config.points = std::move(lambdas);
        ps.B = B;
        ps.M = M;
        const int pn = static_cast<int>(std::round(2.0 / grid.h())) + 1;
        const double cap = std::exp(std::pow(2.0, 1.0 - B) * M) * 0.9;
        for (std::size_t i = 0; i < ps.config.points.size(); ++i) {
            cplx c[4];
            for (auto& v : c) v = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
            auto poly = [&](cplx z) { return c[0] + c[1] * z + c[2] * z * z + c[3] * z * z * z; };
            double sup = 0.0;
            Grid probe(Square::origin(1.0), 33);
            for (std::size_t k = 0; k < probe.size(); ++k)
                sup = std::max(sup, std::abs(poly(probe.point(k))));
            const double scale = cap / (1.05 * sup);
            ps.patches.push_back(
                sample(Square::origin(1.0), pn, [&](cplx z) { return scale * poly(z); }));
        }
        SubharmonicPatchSet sps;
        sps.config = ps.config;
        sps.M = M;
        for (const auto& p : ps.patches) {
            RealField lp(p.grid);
            for (std::size_t k = 0; k < p.values.size(); ++k) {
                const double a = std::abs(p.values[k]);
                lp.values[k] = a > 1.0 ? std::log(a) : 0.0;
            }
            sps.patches.push_back(std::move(lp));
        }
        sh = glue_subharmonic(sps, grid);
    }
};

} // namespace

TEST_CASE("bump oracle values") {
    CHECK(bump(cplx(0, 0)) == Catch::Approx(std::exp(-1.0)));
    CHECK(bump(cplx(0, 0)) == Catch::Approx(0.36787944117144233));
    CHECK(bump(cplx(1, 0)) == 0.0);
    CHECK(bump(cplx(0, -1)) == 0.0);
    CHECK(bump(cplx(2.5, 1)) == 0.0);
    CHECK(bump(cplx(0.5, 0)) == Catch::Approx(std::exp(-4.0 / 3.0)));
    CHECK(bump(cplx(0.5, 0)) == Catch::Approx(0.2635971381157267));
    CHECK(bump(cplx(0, 0.5)) == bump(cplx(0.5, 0))); // radial
}

TEST_CASE("cutoff on a single deep window, C = 8, 1025^2") {
    Configuration cfg;
    cfg.C = 8.0;
    cfg.points = {cplx(0, 0)};
    Grid grid(Square::origin(2.0), 1025); // h = 1/256 <= 1/(32 C)
    auto ws = build_window_system(cfg, grid);
    auto cut = build_cutoff(ws, grid);
    CHECK(cut.pass);
    CHECK(cut.one_on_inner);
    CHECK(cut.zero_off_outer);
    CHECK(cut.chi.at(512, 512) == 1.0); // chi = 1 at the window center
    CHECK(cut.max_gradient <= 100.0 * cfg.C);
    CHECK(cut.max_gradient > 0.0);
}

TEST_CASE("cutoff vanishes between two windows at distance 2.5") {
    Configuration cfg;
    cfg.C = 8.0;
    cfg.points = {cplx(-1.25, 0), cplx(1.25, 0)};
    Grid grid(Square::origin(2.5), 1281); // h = 1/256
    auto ws = build_window_system(cfg, grid);
    auto cut = build_cutoff(ws, grid);
    CHECK(cut.pass);
    // the midpoint lies outside every D^{+3/(4C)}
    CHECK(cut.chi.at(640, 640) == 0.0);
}

TEST_CASE("cutoff demands h <= 1/(32 C)") {
    Configuration cfg;
    cfg.C = 8.0;
    cfg.points = {cplx(0, 0)};
    Grid coarse(Square::origin(2.0), 257); // h = 1/64
    auto ws = build_window_system(cfg, coarse);
    REQUIRE_THROWS_WITH(build_cutoff(ws, coarse),
                        Catch::Matchers::ContainsSubstring("1/(32C)"));
}

TEST_CASE("assembled g reproduces patches where chi = 1") {
    Rng rng(5);
    WeldFixture fx;
    fx.build(rng, {cplx(-1.5, 0.0), cplx(1.5, 0.5)}, 8.0, 8.0, 120.0);
    auto cut = build_cutoff(fx.sh.ws, fx.grid);
    auto g = assemble_g(fx.ps, cut, fx.sh.ws);

    const double C = fx.ps.config.C;
    const double h = fx.grid.h();
    for (std::size_t w = 0; w < fx.ps.config.points.size(); ++w) {
        const cplx lam = fx.ps.config.points[w];
        const auto& dr = fx.sh.ws.geometry[w].d_rects;
        const int pn = fx.ps.patches[w].grid.n;
        const int jx0 = static_cast<int>(std::round((lam.real() - 1.0 - fx.grid.x(0)) / h));
        const int jy0 = static_cast<int>(std::round((lam.imag() - 1.0 - fx.grid.y(0)) / h));
        std::size_t inner = 0;
        for (int py = 0; py < pn; py += 3)
            for (int px = 0; px < pn; px += 3) {
                const cplx z = fx.grid.point(jx0 + px, jy0 + py);
                if (dr.distance(z) < 1.0 / (4.0 * C) - 2 * h) {
                    ++inner;
                    CHECK(g.at(jx0 + px, jy0 + py) == fx.ps.patches[w].at(px, py));
                }
            }
        CHECK(inner > 100);
    }
}

TEST_CASE("constant patches give g = chi and g = 0") {
    WeldFixture fx;
    fx.ps.config.C = 8.0;
    fx.ps.config.points = {cplx(0, 0)};
    fx.ps.B = 8.0;
    fx.ps.M = 120.0;
    const int pn = static_cast<int>(std::round(2.0 / fx.grid.h())) + 1;
    fx.ps.patches.push_back(sample(Square::origin(1.0), pn, [](cplx) { return cplx(1, 0); }));
    SubharmonicPatchSet sps;
    sps.config = fx.ps.config;
    sps.M = 120.0;
    sps.patches.push_back(sample(Square::origin(1.0), pn, [](cplx) { return 0.0; }));
    auto sh = glue_subharmonic(sps, fx.grid);
    auto cut = build_cutoff(sh.ws, fx.grid);
    auto g = assemble_g(fx.ps, cut, sh.ws);
    for (std::size_t k = 0; k < g.values.size(); ++k)
        CHECK(g.values[k] == cplx(cut.chi.values[k], 0.0));
}

TEST_CASE("single zero patch welds to the zero function") {
    WeldFixture fx;
    fx.ps.config.C = 8.0;
    fx.ps.config.points = {cplx(0.5, -0.5)};
    fx.ps.B = 8.0;
    fx.ps.M = 120.0;
    const int pn = static_cast<int>(std::round(2.0 / fx.grid.h())) + 1;
    fx.ps.patches.push_back(sample(Square::origin(1.0), pn, [](cplx) { return cplx(0, 0); }));
    SubharmonicPatchSet sps;
    sps.config = fx.ps.config;
    sps.M = 120.0;
    sps.patches.push_back(sample(Square::origin(1.0), pn, [](cplx) { return 0.0; }));
    auto sh = glue_subharmonic(sps, fx.grid);
    auto res = glue_entire(fx.ps, sh, {.poly_degree = 8});
    CHECK(sup_norm(res.f) == 0.0);
    CHECK(sup_norm(res.alpha) == 0.0);
    CHECK(res.dbar_residual == 0.0);
    REQUIRE(res.e1.size() == 1);
    CHECK(res.e1[0].sup_inner == 0.0);
    CHECK(res.e1[0].inner_ok);
    // A_lambda fills the whole square at the paper threshold
    CHECK(res.e1[0].bad_area_paper == Catch::Approx(0.0).margin(0.1));
    CHECK(res.pass);
}

TEST_CASE("two-patch weld: certificates, support and E2 hold") {
    Rng rng(9);
    WeldFixture fx;
    fx.build(rng, {cplx(-1.5, 0.0), cplx(1.5, 0.5)}, 8.0, 8.0, 120.0);
    auto res = glue_entire(fx.ps, fx.sh, {.poly_degree = 48}, 0.01);

    // f is discretely entire: residual plus the h^2 envelope
    const double h = fx.grid.h();
    CHECK(sup_norm(dbar_fd(res.f)) <=
          res.dbar_residual + 50.0 * h * h * std::max(1.0, sup_norm(res.f)));
    // dbar g lives on the rings
    CHECK(res.dbar_support_leak <= 60.0);
    // log-space certificates
    CHECK(res.rhs_cert_ok);
    CHECK(res.e2_ok);
    for (const auto& e : res.e1) {
        CHECK(e.inner_nodes > 0);
        CHECK(e.inner_ok);
        CHECK(e.sup_inner <= e.tolerance);
        CHECK(e.cert_floor > 0.0);
    }
    CHECK(res.pass);

    // weighted norm did not grow under projection
    CHECK(res.solver.weighted_alpha_norm <= res.solver.cauchy_norm * (1 + 1e-12));
}

TEST_CASE("hypothesis violations are rejected") {
    Rng rng(13);
    WeldFixture fx;
    fx.build(rng, {cplx(-1.5, 0.0)}, 8.0, 8.0, 120.0);

    auto bad = fx.ps;
    bad.M = 40.0 * std::log(8.0) * 0.9; // fails M > 40 log C
    REQUIRE_THROWS_WITH(bad.validate(), Catch::Matchers::ContainsSubstring("40 log C"));

    auto loud = fx.ps;
    for (auto& v : loud.patches[0].values) v *= 50.0;
    REQUIRE_THROWS_WITH(loud.validate(), Catch::Matchers::ContainsSubstring("exceeds"));

    auto rough = fx.ps;
    for (std::size_t k = 0; k < rough.patches[0].values.size(); ++k)
        rough.patches[0].values[k] += ((k % 2) ? 0.02 : -0.02);
    REQUIRE_THROWS_WITH(rough.validate(), Catch::Matchers::ContainsSubstring("holomorphy"));
}
