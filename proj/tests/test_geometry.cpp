#include <doctest.h>

#include <cmath>
#include <set>

#include "pmf/geometry.hpp"
#include "pmf/rng.hpp"
#include "pmf/stochgeom.hpp"

using namespace pmf;

namespace {

std::vector<Halfspace> cube_halfspaces() {
    return {{{1, 0, 0}, 1}, {{-1, 0, 0}, 0}, {{0, 1, 0}, 1}, {{0, -1, 0}, 0}, {{0, 0, 1}, 1}, {{0, 0, -1}, 0}};
}

Domain regular_tetrahedron() {
    std::vector<Halfspace> hs;
    for (Vec3 v : {Vec3{1, 1, 1}, Vec3{1, -1, -1}, Vec3{-1, 1, -1}, Vec3{-1, -1, 1}}) hs.push_back({normalized(v), 0.5});
    return build_domain(hs);
}

// Volume by signed tetrahedra from an interior point over each facet fan.
double volume_oracle(const Domain& d) {
    double v = 0;
    for (const auto& f : d.facets)
        for (size_t k = 1; k + 1 < f.cycle.size(); ++k) {
            Vec3 a = d.vertices[f.cycle[0]] - d.center, b = d.vertices[f.cycle[k]] - d.center,
                 c = d.vertices[f.cycle[k + 1]] - d.center;
            v += std::abs(det3(a, b, c)) / 6;
        }
    return v;
}

}  // namespace

TEST_CASE("plane chart") {
    Plane p = plane_from_chart({0, 0, 1}, 2);
    CHECK(p.eval({5, -3, 2}) == doctest::Approx(0));
    CHECK(p.eval({0, 0, 3}) == doctest::Approx(1));

    Plane z = plane_from_chart({0, 0, -1}, 0);
    CHECK(z.u == Vec3{0, 0, 1});
    CHECK(z.rho == 0);

    CHECK_THROWS_AS(plane_from_chart({0, 0, 2}, 1), InputError);
    CHECK_THROWS_AS(plane_from_chart({0, 0, 1}, -1), InputError);
}

TEST_CASE("chart round trip on random planes") {
    RngStream r(seed_key(11));
    double worst = 0;
    for (int i = 0; i < 100000; ++i) {
        Vec3 u = uniform_sphere(r);
        double rho = 3 * r.uniform();
        Plane p = plane_from_chart(u, rho);
        Plane q = plane_through(u * p.rho, p.u);
        worst = std::max({worst, norm(q.u - u), std::abs(q.rho - rho)});
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("cube domain") {
    Domain d = build_domain(cube_halfspaces());
    CHECK(d.vertices.size() == 8);
    CHECK(d.edges.size() == 12);
    CHECK(d.facets.size() == 6);
    CHECK(d.volume == doctest::Approx(1).epsilon(1e-12));
    for (const auto& e : d.edges) {
        CHECK(e.dihedral == doctest::Approx(kPi / 2).epsilon(1e-12));
        CHECK(e.length == doctest::Approx(1));
    }
    CHECK(d.tmin() == doctest::Approx(0));
    CHECK(d.tmax() == doctest::Approx(1));
}

TEST_CASE("tetrahedron dihedral angles") {
    Domain d = regular_tetrahedron();
    CHECK(d.vertices.size() == 4);
    REQUIRE(d.edges.size() == 6);
    // Dihedral from the two facet normals directly.
    for (const auto& e : d.edges) {
        double brute = kPi - std::acos(dot(d.facets[e.f0].hs.n, d.facets[e.f1].hs.n));
        CHECK(e.dihedral == doctest::Approx(brute).epsilon(1e-12));
        CHECK(e.dihedral == doctest::Approx(std::acos(1.0 / 3)).epsilon(1e-12));
    }
}

TEST_CASE("unbounded halfspaces rejected") {
    CHECK_THROWS_AS(build_domain({{{1, 0, 0}, 1}, {{-1, 0, 0}, 1}}), InputError);
}

TEST_CASE("random polytopes satisfy Euler and the volume oracle") {
    RngStream r(seed_key(5));
    for (int trial = 0; trial < 200; ++trial) {
        int k = 4 + static_cast<int>(r.below(17));
        std::vector<Halfspace> hs;
        for (int i = 0; i < k; ++i) hs.push_back({uniform_sphere(r), 0.5 + r.uniform()});
        for (Vec3 v : {Vec3{1, 1, 1}, Vec3{1, -1, -1}, Vec3{-1, 1, -1}, Vec3{-1, -1, 1}})
            hs.push_back({normalized(v), 3});
        Domain d = build_domain(hs);
        int V = static_cast<int>(d.vertices.size()), E = static_cast<int>(d.edges.size()),
            F = static_cast<int>(d.facets.size());
        CHECK(V - E + F == 2);
        CHECK(std::abs(d.volume - volume_oracle(d)) <= 1e-10 * d.volume);
    }
}

TEST_CASE("plane sections of the unit cube") {
    Domain d = build_domain(cube_halfspaces());
    auto s = intersect_plane_domain(plane_from_chart({0, 0, 1}, 0.5), d);
    REQUIRE(s);
    CHECK(s->poly.area() == doctest::Approx(1));
    CHECK(s->vertices.size() == 4);
    for (const auto& v : s->vertices) CHECK(v.z == doctest::Approx(0.5));
    CHECK_FALSE(intersect_plane_domain(plane_from_chart({0, 0, 1}, 2), d));
    CHECK_FALSE(intersect_plane_domain(plane_from_chart({0, 0, 1}, 1), d));
}

TEST_CASE("section vertices satisfy the plane and every halfspace") {
    Domain d = build_domain(cube_halfspaces());
    RngStream r(seed_key(8));
    int hits = 0;
    for (int i = 0; i < 2000; ++i) {
        Plane p = plane_through(Vec3{r.uniform(), r.uniform(), r.uniform()}, uniform_sphere(r));
        auto s = intersect_plane_domain(p, d);
        if (!s) continue;
        ++hits;
        for (const auto& v : s->vertices) {
            CHECK(std::abs(p.eval(v)) <= kEpsGeom);
            for (const auto& h : d.halfspaces) CHECK(dot(h.n, v) - h.b <= kEpsGeom);
        }
    }
    CHECK(hits > 1900);
}

TEST_CASE("triple points and lines") {
    Plane x0 = plane_from_chart({1, 0, 0}, 0), y0 = plane_from_chart({0, 1, 0}, 0), z0 = plane_from_chart({0, 0, 1}, 0);
    Vec3 p = triple_point(x0, y0, z0);
    CHECK(norm(p) < 1e-15);

    Line3 l = line_of(plane_from_chart({1, 0, 0}, 1), plane_from_chart({0, 1, 0}, 2));
    CHECK(std::abs(std::abs(l.direction.z) - 1) < 1e-12);
    CHECK(l.point.x == doctest::Approx(1));
    CHECK(l.point.y == doctest::Approx(2));

    CHECK_THROWS_AS(line_of(x0, plane_from_chart({1, 0, 0}, 1)), DegeneracyError);
    CHECK_THROWS_AS(triple_point(x0, plane_from_chart({1, 0, 0}, 1), y0), DegeneracyError);
}

TEST_CASE("rigid motion preserves the domain measures") {
    Domain d = regular_tetrahedron();
    double a = 0.4, b = 1.1;
    Vec3 r0{std::cos(a) * std::cos(b), std::sin(a) * std::cos(b), std::sin(b)};
    Vec3 r1 = normalized(cross(r0, Vec3{0, 0, 1}));
    Domain t = transform_domain(d, {r0, r1, cross(r0, r1)}, {0.3, -0.2, 0.7});
    CHECK(t.volume == doctest::Approx(d.volume).epsilon(1e-12));
    CHECK(kappa(t) == doctest::Approx(kappa(d)).epsilon(1e-12));
}
