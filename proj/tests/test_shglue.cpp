#include <catch2/catch_amalgamated.hpp>

#include <holoweld/shglue.hpp>

using namespace holoweld;

namespace {

// random cubic scaled so log+|p| stays below the bound
RealField logplus_cubic_patch(Rng& rng, int n, double target_sup_log) {
    cplx c[4];
    for (auto& v : c) v = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    auto p = [&](cplx z) { return c[0] + c[1] * z + c[2] * z * z + c[3] * z * z * z; };
    double sup = 0.0;
    Grid probe(Square::origin(1.0), 64);
    for (std::size_t k = 0; k < probe.size(); ++k)
        sup = std::max(sup, std::abs(p(probe.point(k))));
    const double scale = std::exp(target_sup_log) / (sup * 1.2);
    return sample(Square::origin(1.0), n, [&](cplx z) {
        const double a = std::abs(p(z)) * scale;
        return a > 1.0 ? std::log(a) : 0.0;
    });
}

Configuration spread_config(Rng& rng, int count, double box, double C) {
    auto cfg = random_configuration(rng, count, box, C);
    return cfg;
}

} // namespace

TEST_CASE("hypothesis and input validation") {
    SubharmonicPatchSet ps;
    ps.config.C = 6.5; // needs > 7
    ps.M = 1.0;
    REQUIRE_THROWS_WITH(ps.validate(), Catch::Matchers::ContainsSubstring("C > 7"));

    ps.config.C = 8.0;
    ps.config.points = {cplx(0, 0)};
    ps.patches.push_back(sample(Square::origin(1.0), 33, [](cplx) { return -0.25; }));
    REQUIRE_THROWS_WITH(ps.validate(), Catch::Matchers::ContainsSubstring("negative"));

    ps.patches[0] = sample(Square::origin(1.0), 33, [](cplx) { return 3.0; });
    REQUIRE_THROWS_WITH(ps.validate(), Catch::Matchers::ContainsSubstring("bound"));

    // a field that is badly super-mean-value at the center
    ps.M = 5.0;
    ps.patches[0] = sample(Square::origin(1.0), 129,
                           [](cplx z) { return std::max(0.0, 0.5 - std::abs(z)); });
    REQUIRE_THROWS_WITH(ps.validate(), Catch::Matchers::ContainsSubstring("sub-mean-value"));
}

TEST_CASE("zero patches reduce the glue to twice the window field") {
    Rng rng(3);
    SubharmonicPatchSet ps;
    ps.config = spread_config(rng, 4, 3.0, 8.0);
    REQUIRE(ps.config.points.size() >= 2);
    ps.M = 1.0;
    for (std::size_t i = 0; i < ps.config.points.size(); ++i)
        ps.patches.push_back(sample(Square::origin(1.0), 33, [](cplx) { return 0.0; }));

    auto glue = glue_subharmonic(ps, Grid(Square::origin(4.5), 401));
    for (std::size_t k = 0; k < glue.u.grid.size(); ++k)
        CHECK(glue.u.values[k] == 2.0 * glue.ws.value(glue.u.grid.point(k)));

    auto rep = check_sh(glue);
    CHECK(rep.pass);
    for (const auto& e : rep.entries) {
        CHECK(e.sh1_max_diff == 0.0);
        // SH3 here is exactly P3 scaled by 2M
        CHECK(e.sh3_min >= ps.M);
    }
}

TEST_CASE("random cubic patches weld with exact SH1 and all margins") {
    Rng rng(17);
    for (double C : {8.0, 16.0}) {
        SubharmonicPatchSet ps;
        ps.config = spread_config(rng, 5, 3.5, C);
        REQUIRE(ps.config.points.size() >= 3);
        ps.M = 5.0;
        for (std::size_t i = 0; i < ps.config.points.size(); ++i)
            ps.patches.push_back(logplus_cubic_patch(rng, 129, 4.5));

        auto glue = glue_subharmonic(ps, Grid(Square::origin(5.0), 501));
        auto rep = check_sh(glue);
        INFO("C = " << C);
        CHECK(rep.pass);
        CHECK(rep.sh2_log_margin >= 0.0);
        CHECK(rep.sh2_log_bound == Catch::Approx(std::log(2 * ps.M) + M_PI * C * C));
        for (const auto& e : rep.entries) {
            CHECK(e.d_nodes > 0);
            CHECK(e.sh1_max_diff == 0.0); // node-exact equality on D
            CHECK(e.sh3_nodes > 0);
            CHECK(e.sh3_min >= ps.M);
        }

        // u is nonnegative and passes the doubled-tolerance sub-mean test
        for (double v : glue.u.values) CHECK(v >= 0.0);
    }
}

TEST_CASE("well-definedness seam: 2Mv dominates the patches on the ring") {
    Rng rng(29);
    SubharmonicPatchSet ps;
    ps.config = spread_config(rng, 4, 3.0, 9.0);
    ps.M = 3.0;
    for (std::size_t i = 0; i < ps.config.points.size(); ++i)
        ps.patches.push_back(logplus_cubic_patch(rng, 65, 2.8));
    auto glue = glue_subharmonic(ps, Grid(Square::origin(4.0), 301));

    const double C = ps.config.C;
    for (std::size_t w = 0; w < ps.config.points.size(); ++w) {
        const auto& dr = glue.ws.geometry[w].d_rects;
        Grid lg(Square(ps.config.points[w], 1.0 + 2.0 / C), 301);
        for (std::size_t k = 0; k < lg.size(); ++k) {
            const cplx z = lg.point(k);
            const double d = dr.distance(z);
            if (d < 1.0 / (3.0 * C) || d >= 5.0 / (3.0 * C)) continue;
            const double upper = ps.M; // patch sup bound
            CHECK(2.0 * ps.M * glue.ws.value(z) >= upper);
        }
    }
}

TEST_CASE("glued field passes the sub-mean-value test with doubled tolerance") {
    Rng rng(41);
    SubharmonicPatchSet ps;
    ps.config = spread_config(rng, 3, 2.5, 8.0);
    ps.M = 5.0;
    for (std::size_t i = 0; i < ps.config.points.size(); ++i)
        ps.patches.push_back(logplus_cubic_patch(rng, 129, 4.0));
    auto glue = glue_subharmonic(ps, Grid(Square::origin(3.5), 561));
    auto rep = subharmonic_check(glue.u, 3.0 * glue.u.grid.h());
    // max of two passing fields: allow twice the per-field tolerance
    CHECK(rep.max_excess <= rep.max_defect * 0.0 + 10.0 * glue.u.grid.h() *
                                 sup_norm(local_lipschitz(glue.u)));
}
