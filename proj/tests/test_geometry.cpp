#include <doctest.h>

#include <cmath>

#include "oscdiff/errors.hpp"
#include "oscdiff/geometry.hpp"

using namespace oscdiff;

namespace {

// Independent count: bubble points by phi > 0, ghosts by an Inside 4-neighbour.
struct Counts {
    int inside = 0, ghost = 0, inactive = 0;
};

Counts enumerate(int n, double radius) {
    const double h = 2.0 / n;
    auto bubble = [&](int i, int j) {
        const double x = -1 + (i + 0.5) * h, y = -1 + (j + 0.5) * h;
        return radius - std::hypot(x, y) > 0.0;
    };
    Counts c;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            if (!bubble(i, j)) {
                ++c.inside;
                continue;
            }
            bool g = false;
            const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
            for (int k = 0; k < 4; ++k) {
                const int a = i + di[k], b = j + dj[k];
                if (a >= 0 && a < n && b >= 0 && b < n && !bubble(a, b)) g = true;
            }
            g ? ++c.ghost : ++c.inactive;
        }
    }
    return c;
}

GridIndex index_of(const Grid& g, Vec2 p) {
    return {static_cast<int>(std::lround((p.x + 1) / g.h() - 0.5)),
            static_cast<int>(std::lround((p.y + 1) / g.h() - 0.5))};
}

}  // namespace

TEST_CASE("grid cell centers and rejection of tiny grids") {
    const Grid g(20);
    CHECK(g.h() == doctest::Approx(0.1));
    CHECK(g.x(0) == doctest::Approx(-0.95));
    CHECK(g.y(19) == doctest::Approx(0.95));
    CHECK(g.size() == 400u);
    CHECK_THROWS_AS(Grid(3), ConfigurationError);
}

TEST_CASE("circle level set: sign, gradient and projection") {
    const CircleLevelSet ls(0.2);
    CHECK(ls.value({0.0, 0.0}) == doctest::Approx(0.2));
    CHECK(ls.value({0.2, 0.0}) == doctest::Approx(0.0));
    CHECK(ls.value({0.5, 0.0}) < 0.0);
    const Vec2 grad = ls.gradient({0.1, 0.0});
    CHECK(grad.x == doctest::Approx(-1.0));
    const Vec2 b = ls.project({0.15, 0.05});
    CHECK(b.x == doctest::Approx(0.18973665961010275).epsilon(1e-12));
    CHECK(b.y == doctest::Approx(0.063245553203367583).epsilon(1e-12));
}

TEST_CASE("generic level set projection converges to the zero level") {
    struct Ellipse final : LevelSet {
        double value(Vec2 p) const override {
            return 1.0 - std::sqrt(p.x * p.x / 0.04 + p.y * p.y / 0.01);
        }
    } ellipse;
    const Vec2 b = ellipse.project({0.1, 0.03});
    CHECK(std::abs(ellipse.value(b)) < 1e-12);
}

TEST_CASE("classification of the N=20 grid") {
    const Grid g(20);
    const auto cls = classify(g, CircleLevelSet(0.2));
    CHECK(cls.n_inside() == 388u);
    CHECK(cls.n_ghost() == 8u);
    CHECK(cls.n_inactive() == 4u);
    CHECK(cls.n_active() == 396u);
    const Counts ref = enumerate(20, 0.2);
    CHECK(ref.inside == 388);
    CHECK(ref.ghost == 8);
}

TEST_CASE("classification without obstacle") {
    const Grid g(16);
    const auto cls = classify(g, CircleLevelSet(0.0));
    CHECK(cls.n_ghost() == 0u);
    CHECK(cls.n_inactive() == 0u);
    CHECK(cls.n_inside() == 256u);
}

TEST_CASE("classification of the N=160 grid matches enumeration") {
    const Grid g(160);
    const auto cls = classify(g, CircleLevelSet(0.2));
    const Counts ref = enumerate(160, 0.2);
    CHECK(cls.n_inside() == static_cast<std::size_t>(ref.inside));
    CHECK(cls.n_ghost() == static_cast<std::size_t>(ref.ghost));
    CHECK(cls.n_inactive() == static_cast<std::size_t>(ref.inactive));
    CHECK(cls.n_inside() + cls.n_ghost() + cls.n_inactive() == 25600u);
    CHECK(cls.n_ghost() == 88u);
    CHECK(cls.n_inactive() == 724u);
    for (const auto gh : cls.ghosts()) {
        bool has_inside = false;
        for (const GridIndex d : {GridIndex{1, 0}, GridIndex{-1, 0}, GridIndex{0, 1}, GridIndex{0, -1}}) {
            const GridIndex nb{gh.i + d.i, gh.j + d.j};
            if (g.contains(nb) && cls.at(nb) == PointClass::Inside) has_inside = true;
        }
        CHECK(has_inside);
    }
}

TEST_CASE("active ordering is row-major with j outer") {
    const Grid g(20);
    const auto cls = classify(g, CircleLevelSet(0.2));
    const auto& pts = cls.active_points();
    for (std::size_t k = 1; k < pts.size(); ++k) {
        CHECK(g.flat(pts[k - 1]) < g.flat(pts[k]));
    }
    CHECK(cls.active_index(pts.back()) == static_cast<int>(pts.size()) - 1);
}

TEST_CASE("ghost geometry of the ghost at (0.15, 0.05)") {
    const Grid g(20);
    const CircleLevelSet ls(0.2);
    const auto cls = classify(g, ls);
    const GridIndex gi = index_of(g, {0.15, 0.05});
    REQUIRE(cls.at(gi) == PointClass::Ghost);
    const auto geo = ghost_geometry(g, cls, ls, gi);
    CHECK(geo.boundary.x == doctest::Approx(0.18973665961010275));
    CHECK(geo.boundary.y == doctest::Approx(0.063245553203367583));
    CHECK(geo.sx == 1);
    CHECK(geo.sy == 1);
    CHECK(geo.theta_x == doctest::Approx((0.18973665961010275 - 0.15) / 0.1));
    CHECK(geo.theta_y == doctest::Approx((0.063245553203367583 - 0.05) / 0.1));
    // Normal points from B into the obstacle.
    CHECK(geo.normal.x == doctest::Approx(-0.15 / std::hypot(0.15, 0.05)));
    CHECK(geo.stencil[0] == gi);
    CHECK(geo.stencil[1 + 3 * 2] == GridIndex{gi.i + 1, gi.j + 2});

    const GridIndex mirror = index_of(g, {0.15, -0.05});
    const auto m = ghost_geometry(g, cls, ls, mirror);
    CHECK(m.sx == 1);
    CHECK(m.sy == -1);
    CHECK(m.theta_x == doctest::Approx(geo.theta_x));
    CHECK(m.theta_y == doctest::Approx(geo.theta_y));
}

TEST_CASE("every ghost projects onto the circle with an orthonormal frame") {
    for (int n : {20, 40, 80, 160}) {
        const Grid g(n);
        const CircleLevelSet ls(0.2);
        const auto cls = classify(g, ls);
        for (const auto& geo : all_ghost_geometry(g, cls, ls)) {
            CHECK(std::abs(norm(geo.boundary) - 0.2) < 1e-12);
            CHECK(std::abs(dot(geo.normal, geo.tangent)) < 1e-15);
            CHECK(std::abs(norm(geo.normal) - 1.0) < 1e-14);
            CHECK(geo.theta_x >= 0.0);
            CHECK(geo.theta_x < 1.0);
            CHECK(geo.theta_y >= 0.0);
            CHECK(geo.theta_y < 1.0);
            for (const auto s : geo.stencil) CHECK(cls.is_active(s));
        }
    }
}

TEST_CASE("centered stencil layout") {
    const Grid g(80);
    const CircleLevelSet ls(0.2);
    const auto cls = classify(g, ls);
    int centered = 0;
    for (const GridIndex gi : cls.ghosts()) {
        const auto one = ghost_geometry(g, cls, ls, gi, GhostStencil::one_sided);
        const auto geo = ghost_geometry(g, cls, ls, gi, GhostStencil::centered);
        CHECK(geo.theta_x == one.theta_x);
        CHECK(geo.theta_y == one.theta_y);
        CHECK((geo.ox == 0 || geo.theta_x < 0.5));
        CHECK((geo.oy == 0 || geo.theta_y < 0.5));
        for (int my = 0; my < 3; ++my) {
            for (int mx = 0; mx < 3; ++mx) {
                const GridIndex s = geo.stencil[mx + 3 * my];
                CHECK(s == GridIndex{gi.i + geo.sx * (mx + geo.ox), gi.j + geo.sy * (my + geo.oy)});
                CHECK(cls.is_active(s));
            }
        }
        if (geo.ox != 0 || geo.oy != 0) {
            ++centered;
            CHECK(geo.stencil[-geo.ox - 3 * geo.oy] == gi);
        } else {
            CHECK(geo.stencil == one.stencil);
        }
    }
    CHECK(centered > 0);
}

TEST_CASE("ghost geometry rejects non-ghost points and bad stencils") {
    const Grid g(20);
    const CircleLevelSet ls(0.2);
    const auto cls = classify(g, ls);
    CHECK_THROWS_AS(ghost_geometry(g, cls, ls, {0, 0}), ConfigurationError);
    // A circle touching the outer ring cannot be discretized.
    CHECK_THROWS_AS(classify(g, CircleLevelSet(0.3, {0.8, 0.0})), ConfigurationError);
    // Close to the wall the outward stencil of a ghost leaves the grid.
    const CircleLevelSet near_wall(0.2, {0.72, 0.0});
    CHECK_THROWS_AS(classify(g, near_wall), ConfigurationError);
}
