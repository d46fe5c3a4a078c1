#include <doctest.h>

#include <cmath>

#include "cone_oracle.hpp"
#include "pmf/fieldmodel.hpp"
#include "pmf/verify.hpp"

using namespace pmf;

namespace {

// Surface of a tetrahedron with every vertex interior to D.
PolyConfig closed_tetrahedron() {
    std::array<Vec3, 4> p{Vec3{0.2, 0.3, 0.3}, Vec3{0.7, 0.6, 0.3}, Vec3{0.5, 0.2, 0.7}, Vec3{0.6, 0.7, 0.75}};
    PolyConfig c;
    for (const auto& v : p) c.vertices.push_back({v, false, false});
    const int tri[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
    for (const auto& t : tri) {
        Face f;
        Vec3 n = cross(p[t[1]] - p[t[0]], p[t[2]] - p[t[0]]);
        f.poly = make_polygon_frame(plane_through(p[t[0]], n));
        for (int k : t) {
            f.outerIds.push_back(k);
            f.poly.outer.push_back(f.poly.to2d(p[k]));
        }
        if (signed_area(f.poly.outer) < 0) {
            std::reverse(f.outerIds.begin(), f.outerIds.end());
            std::reverse(f.poly.outer.begin(), f.poly.outer.end());
        }
        c.faces.push_back(f);
    }
    return c;
}

}  // namespace

TEST_CASE("empty configuration") {
    Domain d = make_box({0, 0, 0}, {1, 1, 1});
    PolyConfig c;
    CHECK(validate(c, d).ok());
    CHECK(energy(c, d) == doctest::Approx(kPi * kPi * kPi * kPi / 6));
    CHECK(energy(c, d) == doctest::Approx(16.234848).epsilon(1e-6));
    Stats s = stats(c);
    CHECK(s.faceCount == 0);
    CHECK(s.internalEdgeCount == 0);
    CHECK(s.boundaryEdgeCount == 0);
    CHECK(s.vertexCount == 0);
    CHECK(s.totalArea == 0);
    CHECK(s.totalEdgeLength == 0);
    CHECK(entry_events(c, d).empty());
}

TEST_CASE("cone energy from the clipping oracle") {
    ConeOracle o;
    PolyConfig c = o.resolve();
    CHECK(energy(c, o.d) == doctest::Approx(o.energy()).epsilon(1e-9));
    Domain big = make_box({-1, -1, -1}, {2, 2, 2});
    CHECK(energy(c, o.d) - energy(PolyConfig{}, o.d) == doctest::Approx(energy(c, big) - energy(PolyConfig{}, big)));
    for (const auto& e : c.internalEdges) {
        CHECK(2 * kPi - e.wedge >= 0);
        CHECK(2 * kPi - e.wedge <= 2 * kPi);
        CHECK(edge_wedge_angle(c, e) == doctest::Approx(e.wedge).epsilon(1e-9));
    }
    Stats s = stats(c);
    CHECK(s.faceCount == 3);
    CHECK(s.internalEdgeCount == 3);
    CHECK(s.internalVertexCount == 1);
    CHECK(entry_events(c, o.d).empty());
}

TEST_CASE("energy rejects bad input") {
    ConeOracle o;
    PolyConfig c = o.resolve();
    c.internalEdges[0].wedge = 7;
    CHECK_THROWS_AS(energy(c, o.d), InputError);
    c = o.resolve();
    c.internalEdges[0].v1 = 1000;
    CHECK_THROWS_AS(energy(c, o.d), InputError);
}

TEST_CASE("coplanar faces are a P6 violation naming both faces") {
    ConeOracle o;
    PolyConfig c = o.resolve();
    c.faces.push_back(c.faces[0]);
    auto rep = validate(c, o.d);
    CHECK_FALSE(rep.ok());
    bool found = false;
    for (const auto& v : rep.violations) found = found || (v.condition == "P6" && v.detail.find("faces 0 and 3") != std::string::npos);
    CHECK(found);
}

TEST_CASE("corrupted configurations fail validation") {
    ConeOracle o;
    PolyConfig c = o.resolve();
    c.internalEdges.pop_back();
    CHECK_FALSE(validate(c, o.d).ok());
    c = o.resolve();
    c.boundaryEdges.pop_back();
    CHECK_FALSE(validate(c, o.d).ok());
}

TEST_CASE("closed polyhedron has no entries") {
    Domain d = make_box({0, 0, 0}, {1, 1, 1});
    CHECK(entry_events(closed_tetrahedron(), d).empty());
}

TEST_CASE("single IA entry is recovered") {
    const double s = 0.3;
    Domain d = make_box({0, 0, 0}, {s, s, s});
    EntrySet e{find_stable_entry(d, EntryKind::IA, s, 3)};
    auto fs = simulate_field(d, e, RngStream(seed_key(77)));
    auto back = entry_events(fs.cfg, d);
    REQUIRE(back.size() == 1);
    CHECK(back[0].kind == EntryKind::IA);
    CHECK(std::abs(back[0].time - e[0].time) <= kEpsGeom);
    CHECK(norm(back[0].location - e[0].location) <= kEpsGeom);
}

TEST_CASE("stats are invariant under spatial rigid motion") {
    ConeOracle a;
    ConeOracle b;
    double th = 0.9;
    Vec3 r1{0, std::cos(th), std::sin(th)}, r2{0, -std::sin(th), std::cos(th)};
    Vec3 shift{0.1, -0.3, 0.25};
    b.d = transform_domain(a.d, {Vec3{1, 0, 0}, r1, r2}, shift);
    auto move = [&](const Vec3& v) { return Vec3{v.x, dot(r1, v), dot(r2, v)}; };
    b.apex = move(a.apex) + shift;
    for (int i = 0; i < 3; ++i) b.g[i] = move(a.g[i]);
    REQUIRE(b.d.contains(b.apex));
    Stats sa = stats(a.resolve()), sb = stats(b.resolve());
    CHECK(sa.faceCount == sb.faceCount);
    CHECK(sa.internalEdgeCount == sb.internalEdgeCount);
    CHECK(sa.boundaryEdgeCount == sb.boundaryEdgeCount);
    CHECK(sa.totalArea == doctest::Approx(sb.totalArea).epsilon(1e-9));
    CHECK(sa.totalEdgeLength == doctest::Approx(sb.totalEdgeLength).epsilon(1e-9));
}

TEST_CASE("serialization round trip") {
    Domain d = make_box({0, 0, 0}, {0.6, 0.6, 0.6});
    for (int i = 0; i < 40; ++i) {
        auto fs = simulate_field(d, {}, RngStream(split_key(seed_key(5), i)));
        std::string text = serialize(fs.cfg);
        CHECK(text.rfind("pmf-config 1\n", 0) == 0);
        PolyConfig back = deserialize(text);
        CHECK(back == fs.cfg);
        CHECK(deserialize("# provenance line\n" + text) == fs.cfg);
        CHECK(serialize(back) == text);
    }
    CHECK_THROWS_AS(deserialize("pmf-config 2\n"), InputError);
    CHECK_THROWS_AS(deserialize("pmf-config 1\nvertices x\n"), InputError);
}

TEST_CASE("entry serialization round trip") {
    const double s = 0.3;
    Domain d = make_box({0, 0, 0}, {s, s, s});
    EntrySet e{find_stable_entry(d, EntryKind::IE, s, 4), find_stable_entry(d, EntryKind::IA, s, 4)};
    EntrySet back = deserialize_entries(serialize_entries(e));
    REQUIRE(back.size() == 2);
    for (size_t i = 0; i < 2; ++i) {
        CHECK(back[i].kind == e[i].kind);
        CHECK(back[i].time == e[i].time);
        CHECK(back[i].location == e[i].location);
        CHECK(back[i].planes == e[i].planes);
    }
}
