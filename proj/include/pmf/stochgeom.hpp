#pragma once

#include <vector>

#include "pmf/geometry.hpp"
#include "pmf/rng.hpp"

namespace pmf {

inline constexpr double kIntensityLine = kPi;                              // per unit length
inline constexpr double kIntensityPair = kPi * kPi * kPi / 4.0;            // per unit area
inline constexpr double kIntensityTriple = kPi * kPi * kPi * kPi / 6.0;    // per unit volume

double kappa(const Domain& d);

Vec3 uniform_sphere(RngStream& rng);

// Planes of the process hitting the convex body with the given support function
// about `center` (h(u) <= radius for all u).
template <class Support>
std::vector<Plane> sample_hitting_planes_support(const Vec3& center, double radius, Support&& h, RngStream& rng) {
    std::vector<Plane> out;
    std::uint64_t n = rng.poisson(4.0 * kPi * radius);
    for (std::uint64_t i = 0; i < n; ++i) {
        Vec3 u = uniform_sphere(rng);
        double r = radius * rng.uniform();
        if (r >= h(u)) continue;
        out.push_back(plane_through(center + u * r, u));
    }
    return out;
}

std::vector<Plane> sample_hitting_planes(const Domain& d, RngStream& rng);
std::vector<Plane> sample_hitting_planes_ball(const Vec3& center, double radius, RngStream& rng);

struct VertexFrame {
    Vec3 n1, n2, n3;
};

VertexFrame sample_vertex_frame(RngStream& rng);
VertexFrame sample_vertex_frame_given(const Vec3& n1, RngStream& rng);
// Unit normal with density proportional to |<n, dir>|.
Vec3 sample_line_normal(const Vec3& dir, RngStream& rng);
Plane sample_plane_hitting_line(const Line3& line, double lineLength, RngStream& rng);

struct HitMeasureEstimate {
    double value = 0;
    double se = 0;
};

HitMeasureEstimate monte_carlo_hit_measure(const Domain& d, std::uint64_t samples, RngStream& rng);

}  // namespace pmf
