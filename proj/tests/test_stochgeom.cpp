#include <doctest.h>

#include <cmath>

#include "pmf/stochgeom.hpp"

using namespace pmf;

namespace {

Domain unit_tetrahedron() {
    // Regular tetrahedron of edge 1: circumradius sqrt(3/8), inradius a third of it.
    std::vector<Halfspace> hs;
    double in = std::sqrt(3.0 / 8.0) / 3.0;
    for (Vec3 v : {Vec3{1, 1, 1}, Vec3{1, -1, -1}, Vec3{-1, 1, -1}, Vec3{-1, -1, 1}}) hs.push_back({-normalized(v), in});
    return build_domain(hs);
}

Domain random_polytope(RngStream& r) {
    std::vector<Halfspace> hs;
    int k = 5 + static_cast<int>(r.below(12));
    for (int i = 0; i < k; ++i) hs.push_back({uniform_sphere(r), 0.2 + r.uniform()});
    for (Vec3 v : {Vec3{1, 1, 1}, Vec3{1, -1, -1}, Vec3{-1, 1, -1}, Vec3{-1, -1, 1}}) hs.push_back({normalized(v), 1.5});
    return build_domain(hs);
}

}  // namespace

TEST_CASE("kappa closed forms") {
    CHECK(kappa(make_box({0, 0, 0}, {1, 1, 1})) == doctest::Approx(3 * kPi).epsilon(1e-12));
    CHECK(kappa(make_box({0, 0, 0}, {0.5, 0.5, 0.5})) == doctest::Approx(1.5 * kPi).epsilon(1e-12));
    Domain t = unit_tetrahedron();
    for (const auto& e : t.edges) CHECK(e.length == doctest::Approx(1).epsilon(1e-12));
    CHECK(kappa(t) == doctest::Approx(0.5 * 6 * (kPi - std::acos(1.0 / 3))).epsilon(1e-12));
}

TEST_CASE("kappa matches the Monte Carlo hit measure") {
    RngStream r(seed_key(21));
    std::vector<Domain> ds{make_box({0, 0, 0}, {1, 1, 1})};
    for (int i = 0; i < 5; ++i) ds.push_back(random_polytope(r));
    for (const auto& d : ds) {
        RngStream m(split_key(seed_key(22), ds.size()));
        auto est = monte_carlo_hit_measure(d, 10000000, m);
        CHECK(std::abs(est.value - kappa(d)) / kappa(d) < 0.01);
        CHECK(std::abs(est.value - kappa(d)) < 4 * est.se);
    }
}

TEST_CASE("hitting-plane counts are Poisson with mean kappa") {
    Domain d = make_box({0, 0, 0}, {1, 1, 1});
    const int n = 10000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        RngStream r(split_key(seed_key(31), i));
        auto planes = sample_hitting_planes(d, r);
        for (const auto& p : planes) CHECK(intersect_plane_domain(p, d).has_value());
        double c = static_cast<double>(planes.size());
        s += c;
        s2 += c * c;
    }
    double mean = s / n, var = (s2 - n * mean * mean) / (n - 1);
    CHECK(std::abs(mean - 3 * kPi) <= 3 * std::sqrt(var / n));
    CHECK(var / mean >= 0.95);
    CHECK(var / mean <= 1.05);
}

TEST_CASE("hitting planes are deterministic and vanish on tiny domains") {
    Domain d = make_box({0, 0, 0}, {1, 1, 1});
    RngStream a(seed_key(7)), b(seed_key(7));
    auto pa = sample_hitting_planes(d, a), pb = sample_hitting_planes(d, b);
    CHECK(pa == pb);
    Domain tiny = make_box({0, 0, 0}, {2e-4, 2e-4, 2e-4});
    int nonEmpty = 0;
    for (int i = 0; i < 1000; ++i) {
        RngStream r(split_key(seed_key(8), i));
        nonEmpty += !sample_hitting_planes(tiny, r).empty();
    }
    CHECK(nonEmpty <= 8);
}

TEST_CASE("vertex frame law") {
    // Under uniform normals E det^2 = 2/9, so frames drawn with density |det| have
    // E|det| = (2/9) / E_uniform|det|; the denominator is the plain Monte Carlo acceptance rate.
    RngStream r(seed_key(41));
    const int n = 400000;
    double plain = 0, plain2 = 0;
    for (int i = 0; i < n; ++i) {
        double v = std::abs(det3(uniform_sphere(r), uniform_sphere(r), uniform_sphere(r)));
        plain += v;
        plain2 += v * v;
    }
    plain /= n;
    CHECK(plain2 / n == doctest::Approx(2.0 / 9).epsilon(0.01));
    double framed = 0, framed2 = 0;
    for (int i = 0; i < n; ++i) {
        auto f = sample_vertex_frame(r);
        double v = std::abs(det3(f.n1, f.n2, f.n3));
        framed += v;
        framed2 += v * v;
    }
    framed /= n;
    double se = std::sqrt((framed2 / n - framed * framed) / n);
    CHECK(std::abs(framed - (2.0 / 9) / plain) < 3 * se + 0.005);

    VertexFrame g = sample_vertex_frame_given({0, 0, 1}, r);
    CHECK(g.n1 == Vec3{0, 0, 1});
    CHECK(std::abs(det3({1, 0, 0}, {0, 1, 0}, {0, 0, 1})) == 1.0);
}

TEST_CASE("line-normal law has density proportional to |cos|") {
    RngStream r(seed_key(51));
    const int bins = 20, n = 200000;
    std::vector<int> h(bins);
    for (int i = 0; i < n; ++i) {
        Vec3 v = sample_line_normal({0, 0, 1}, r);
        CHECK(std::abs(norm(v) - 1) < 1e-12);
        int b = std::min(bins - 1, static_cast<int>((v.z + 1) / 2 * bins));
        ++h[b];
    }
    double chi2 = 0;
    for (int b = 0; b < bins; ++b) {
        double c0 = -1 + 2.0 * b / bins, c1 = c0 + 2.0 / bins;
        auto F = [](double c) { return c < 0 ? (1 - c * c) / 2 : (1 + c * c) / 2; };
        double expct = n * (F(c1) - F(c0));
        chi2 += (h[b] - expct) * (h[b] - expct) / expct;
    }
    CHECK(chi2 < 36.19);
}

TEST_CASE("planes hitting a line cross the segment") {
    RngStream r(seed_key(61));
    Line3 l{{0.1, 0.2, 0.3}, normalized(Vec3{1, 2, -1})};
    for (int i = 0; i < 1000; ++i) {
        Plane p = sample_plane_hitting_line(l, 2.0, r);
        double a = p.eval(l.point), b = p.eval(l.point + l.direction * 2.0);
        CHECK(a * b <= 1e-15);
    }
}
