#include "pmf/stochgeom.hpp"

#include <algorithm>

namespace pmf {

double kappa(const Domain& d) {
    double k = 0;
    for (const auto& e : d.edges) k += (kPi - e.dihedral) * e.length;
    return 0.5 * k;
}

Vec3 uniform_sphere(RngStream& rng) {
    for (;;) {
        double a = 2.0 * rng.uniform() - 1.0;
        double b = 2.0 * rng.uniform() - 1.0;
        double s = a * a + b * b;
        if (s >= 1.0) continue;
        double r = 2.0 * std::sqrt(1.0 - s);
        return Vec3{a * r, b * r, 1.0 - 2.0 * s};
    }
}

std::vector<Plane> sample_hitting_planes(const Domain& d, RngStream& rng) {
    double radius = 0;
    for (const auto& v : d.vertices) radius = std::max(radius, norm(v - d.center));
    auto h = [&](const Vec3& u) { return d.support(u) - dot(d.center, u); };
    return sample_hitting_planes_support(d.center, radius, h, rng);
}

std::vector<Plane> sample_hitting_planes_ball(const Vec3& center, double radius, RngStream& rng) {
    auto h = [&](const Vec3&) { return radius; };
    return sample_hitting_planes_support(center, radius, h, rng);
}

VertexFrame sample_vertex_frame(RngStream& rng) {
    for (;;) {
        VertexFrame f{uniform_sphere(rng), uniform_sphere(rng), uniform_sphere(rng)};
        if (rng.uniform() < std::abs(det3(f.n1, f.n2, f.n3))) return f;
    }
}

VertexFrame sample_vertex_frame_given(const Vec3& n1, RngStream& rng) {
    for (;;) {
        VertexFrame f{n1, uniform_sphere(rng), uniform_sphere(rng)};
        if (rng.uniform() < std::abs(det3(f.n1, f.n2, f.n3))) return f;
    }
}

Vec3 sample_line_normal(const Vec3& dir, RngStream& rng) {
    for (;;) {
        Vec3 n = uniform_sphere(rng);
        if (rng.uniform() < std::abs(dot(n, dir))) return n;
    }
}

Plane sample_plane_hitting_line(const Line3& line, double lineLength, RngStream& rng) {
    Vec3 n = sample_line_normal(line.direction, rng);
    Vec3 p = line.point + line.direction * (lineLength * rng.uniform());
    return plane_through(p, n);
}

HitMeasureEstimate monte_carlo_hit_measure(const Domain& d, std::uint64_t samples, RngStream& rng) {
    double radius = 0;
    for (const auto& v : d.vertices) radius = std::max(radius, norm(v - d.center));
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        Vec3 u = uniform_sphere(rng);
        double r = radius * rng.uniform();
        if (r < d.support(u) - dot(d.center, u)) ++hits;
    }
    double p = static_cast<double>(hits) / static_cast<double>(samples);
    double w = 4.0 * kPi * radius;
    return {w * p, w * std::sqrt(p * (1 - p) / static_cast<double>(samples))};
}

}  // namespace pmf
