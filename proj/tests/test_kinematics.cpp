#include <doctest.h>

#include <cmath>

#include "pmf/kinematics.hpp"
#include "pmf/stochgeom.hpp"

using namespace pmf;

namespace {

// Static edge along the time axis whose faces leave it in spatial directions at angle theta.
Wedge static_wedge(double theta) { return Wedge{{1, 0, 0}, {0, 1, 0}, {0, std::cos(theta), std::sin(theta)}}; }

double unstable_fraction(const Vec3& dir, const Vec2& sa, const Vec2& sb, const EdgeMotion& e1, const EdgeMotion& e2,
                         int n, std::uint64_t seed, double& se) {
    RngStream r(seed_key(seed));
    int bad = 0;
    for (int i = 0; i < n; ++i) {
        Vec3 nn = sample_line_normal(dir, r);
        auto ec = section_of(plane_through(Vec3{}, nn), 0);
        bad += !stable_ie(e1, sa, e2, sb, EdgeMotion{ec.normal, ec.velocity});
    }
    double p = static_cast<double>(bad) / n;
    se = std::sqrt(p * (1 - p) / n);
    return p;
}

}  // namespace

TEST_CASE("face velocity") {
    // Plane {y = t}: the section moves in +y at unit speed.
    Plane moving = plane_through(Vec3{}, Vec3{-1, 1, 0});
    Vec2 v = face_velocity(moving);
    CHECK(v.x == doctest::Approx(1));
    CHECK(v.y == doctest::Approx(0).epsilon(1e-15));
    double h = 1e-6;
    auto a = section_of(moving, 0.3), b = section_of(moving, 0.3 + h);
    Vec2 fd = (b.point() - a.point()) / h;
    CHECK(norm(fd - v) < 1e-6);

    Vec2 s = face_velocity(plane_through(Vec3{}, Vec3{0, 1, 0}));
    CHECK(norm(s) == 0);
    CHECK_THROWS_AS(face_velocity(plane_through(Vec3{}, Vec3{1, 0, 0})), DegeneracyError);
}

TEST_CASE("face velocity is a first-order model of the section motion") {
    RngStream r(seed_key(3));
    for (int i = 0; i < 1000; ++i) {
        Vec3 u = uniform_sphere(r);
        if (std::abs(u.x) > 0.9) continue;
        Plane p = plane_through(Vec3{r.uniform(), r.uniform(), r.uniform()}, u);
        for (double h : {1e-2, 1e-3}) {
            auto a = section_of(p, 0.5), b = section_of(p, 0.5 + h);
            // Distance between the advected line and the true section line.
            double gap = std::abs(dot(a.point() + face_velocity(p) * h - b.point(), b.normal));
            CHECK(gap <= 1e-9 + h * h);
        }
    }
}

TEST_CASE("vertex velocity examples") {
    Vec2 w = vertex_velocity({1, 0}, {1, 0}, {0, 1}, {0, 2});
    CHECK(w.x == doctest::Approx(1));
    CHECK(w.y == doctest::Approx(2));
    Vec2 g = vertex_velocity_gram({1, 0}, {0, 2});
    CHECK(g.x == doctest::Approx(1));
    CHECK(g.y == doctest::Approx(2));

    Vec2 z = vertex_velocity({1, 0}, {0, 0}, {0, 1}, {0, 0});
    CHECK(norm(z) == 0);
    Vec2 one = vertex_velocity({1, 0}, {1, 0}, {0, 1}, {0, 0});
    CHECK(one.x == doctest::Approx(1));
    CHECK(one.y == doctest::Approx(0));
    CHECK_THROWS_AS(vertex_velocity_gram({1, 0}, {0, 0}), DegeneracyError);
    CHECK_THROWS_AS(vertex_velocity({1, 0}, {1, 0}, {-1, 0}, {0, 0}), DegeneracyError);
}

TEST_CASE("Gram and normal forms agree") {
    RngStream r(seed_key(4));
    double worst = 0;
    int n = 0;
    while (n < 100000) {
        Vec3 a = uniform_sphere(r), b = uniform_sphere(r);
        Vec2 m1 = normalized(Vec2{a.x, a.y}), m2 = normalized(Vec2{b.x, b.y});
        if (std::abs(cross(m1, m2)) < 0.05) continue;
        double s1 = r.uniform(-10, 10), s2 = r.uniform(-10, 10);
        if (std::abs(s1) < 0.1 || std::abs(s2) < 0.1) continue;
        Vec2 w = vertex_velocity(m1, m1 * s1, m2, m2 * s2);
        Vec2 g = vertex_velocity_gram(m1 * s1, m2 * s2);
        worst = std::max(worst, norm(w - g) / std::max(1.0, norm(w)));
        ++n;
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("infinitesimal triangle stability") {
    std::array<Vec2, 3> n;
    for (int i = 0; i < 3; ++i) n[i] = Vec2{std::cos(2 * kPi * i / 3 + 0.2), std::sin(2 * kPi * i / 3 + 0.2)};
    std::array<EdgeMotion, 3> out, in, still;
    for (int i = 0; i < 3; ++i) {
        out[i] = {n[i], n[i]};
        in[i] = {n[i], -n[i]};
        still[i] = {n[i], {0, 0}};
    }
    Vec2 w = vertex_velocity(n[1], n[1], n[2], n[2]);
    CHECK(dot(w, n[0]) == doctest::Approx(-2));
    CHECK(stable_it(out));
    CHECK_FALSE(stable_it(in));
    CHECK_FALSE(stable_it(still));
    CHECK(stable_ia(out));
    CHECK_FALSE(stable_ia(in));
}

TEST_CASE("exactly one stable octant per frame") {
    RngStream r(seed_key(5));
    for (int ia = 0; ia < 2; ++ia)
        for (int i = 0; i < 10000; ++i) {
            VertexFrame f = ia ? sample_vertex_frame_given(uniform_sphere(r), r) : sample_vertex_frame(r);
            std::array<Vec3, 3> nv{f.n1, f.n2, f.n3};
            int stable = 0;
            for (int s = 0; s < 8; ++s) {
                std::array<EdgeMotion, 3> em;
                for (int k = 0; k < 3; ++k) {
                    auto me = section_of(plane_through(Vec3{}, nv[k]), 0);
                    em[k] = {me.normal * ((s >> k) & 1 ? -1.0 : 1.0), me.velocity};
                }
                stable += ia ? stable_ia(em) : stable_it(em);
            }
            CHECK(stable == 1);
        }
}

TEST_CASE("wedge angle for static edges") {
    CHECK(wedge_angle(static_wedge(kPi / 2)) == doctest::Approx(kPi / 2).epsilon(1e-12));
    // Operational angle of a static edge is pi minus the dihedral angle.
    for (double th : {kPi / 3, kPi / 2, 2 * kPi / 3}) {
        CHECK(wedge_angle(static_wedge(th)) == doctest::Approx(kPi - th).epsilon(1e-12));
        CHECK(sector_angle(static_wedge(th)) == doctest::Approx(th).epsilon(1e-12));
        Wedge w = static_wedge(th);
        Vec2 sa{w.a.y, w.a.z}, sb{w.b.y, w.b.z};
        EdgeMotion e1{perp(sa), {0, 0}}, e2{perp(sb), {0, 0}};
        double se = 0;
        double p = unstable_fraction({1, 0, 0}, sa, sb, e1, e2, 1000000, 100 + static_cast<int>(th * 10), se);
        CHECK(std::abs(2 * kPi * p - wedge_angle(w)) <= 3 * 2 * kPi * se);
    }
}

TEST_CASE("wedge angle is continuous toward coplanar faces") {
    double prev = wedge_angle(static_wedge(3.0));
    for (double th = 3.0; th < kPi - 1e-6; th += 0.01) {
        double a = wedge_angle(static_wedge(th));
        CHECK(a <= prev + 1e-12);
        CHECK(std::abs(a - prev) < 0.011);
        prev = a;
    }
}

TEST_CASE("stable IE fraction on moving edges") {
    RngStream r(seed_key(6));
    for (int pair = 0; pair < 3; ++pair) {
        Plane a, b;
        Vec3 dir;
        do {
            a = plane_through(Vec3{}, uniform_sphere(r));
            b = plane_through(Vec3{}, uniform_sphere(r));
            dir = cross(a.u, b.u);
        } while (norm(dir) < 0.2 || std::abs(normalized(dir).x) < 0.2 || std::abs(a.u.x) > 0.95 ||
                 std::abs(b.u.x) > 0.95);
        dir = normalized(dir);
        if (dir.x < 0) dir = -dir;
        auto ea = section_of(a, 0), eb = section_of(b, 0);
        Vec2 sa = ea.direction * (r.uniform() < 0.5 ? -1.0 : 1.0);
        Vec2 sb = eb.direction * (r.uniform() < 0.5 ? -1.0 : 1.0);
        double ang = wedge_angle_sections(dir, {0, sa.x, sa.y}, {0, sb.x, sb.y});
        CHECK(ang > 0);
        CHECK(ang < 2 * kPi);
        double se = 0;
        double p = unstable_fraction(dir, sa, sb, {ea.normal, ea.velocity}, {eb.normal, eb.velocity}, 1000000,
                                     200 + pair, se);
        double stable = 1 - p;
        CHECK(std::abs(stable - (2 * kPi - ang) / (2 * kPi)) <= 3 * se);
    }
}
