#pragma once

#include <algorithm>
#include <array>
#include <vector>

#include "pmf/evolution.hpp"
#include "pmf/stochgeom.hpp"

// A single IT cone in the unit cube: apex and three future generator directions, with the
// truncated faces recomputed by polygon clipping.
struct ConeOracle {
    pmf::Domain d = pmf::make_box({0, 0, 0}, {1, 1, 1});
    pmf::Vec3 apex{0.2, 0.5, 0.45};
    std::array<pmf::Vec3, 3> g{pmf::Vec3{1, 1, 0.1}, pmf::Vec3{1, -0.5, 0.8}, pmf::Vec3{1, -0.4, -0.85}};

    pmf::Plane plane(int i) const {
        return pmf::plane_through(apex, pmf::cross(g[(i + 1) % 3], g[(i + 2) % 3]));
    }
    pmf::ForcedBirth birth() const { return {apex, {plane(0), plane(1), plane(2)}}; }

    // Face on plane(i) spanned by the other two generators, clipped to the cube.
    std::vector<pmf::Vec3> face(int i) const {
        std::vector<pmf::Vec3> poly{apex, apex + g[(i + 1) % 3] * 10.0, apex + g[(i + 2) % 3] * 10.0};
        for (const auto& h : d.halfspaces) {
            std::vector<pmf::Vec3> out;
            for (size_t k = 0; k < poly.size(); ++k) {
                pmf::Vec3 a = poly[k], b = poly[(k + 1) % poly.size()];
                double sa = pmf::dot(h.n, a) - h.b, sb = pmf::dot(h.n, b) - h.b;
                if (sa <= 0) out.push_back(a);
                if ((sa < 0 && sb > 0) || (sa > 0 && sb < 0)) out.push_back(a + (b - a) * (sa / (sa - sb)));
            }
            poly = out;
        }
        return poly;
    }
    double face_area(int i) const {
        auto p = face(i);
        pmf::Vec3 s;
        for (size_t k = 1; k + 1 < p.size(); ++k) s = s + pmf::cross(p[k] - p[0], p[k + 1] - p[0]);
        return 0.5 * pmf::norm(s);
    }
    double ray_length(int i) const {
        double s = 1e300;
        for (const auto& h : d.halfspaces) {
            double rate = pmf::dot(h.n, g[i]);
            if (rate > 0) s = std::min(s, (h.b - pmf::dot(h.n, apex)) / rate);
        }
        return s * pmf::norm(g[i]);
    }
    int boundary_edges() const {
        int n = 0;
        for (int i = 0; i < 3; ++i) n += static_cast<int>(face(i).size()) - 2;
        return n;
    }
    double wedge(int i) const {
        pmf::Vec3 e = pmf::normalized(g[i]);
        auto off = [&](const pmf::Vec3& v) { return v - e * pmf::dot(v, e); };
        return pmf::wedge_angle(pmf::Wedge{e, off(g[(i + 1) % 3]), off(g[(i + 2) % 3])});
    }
    double energy() const {
        double e = 0, area = 0;
        for (int i = 0; i < 3; ++i) {
            e += 0.5 * (2 * pmf::kPi - wedge(i)) * ray_length(i);
            area += face_area(i);
        }
        return e + pmf::kIntensityPair * area + pmf::kIntensityTriple * d.volume;
    }
    pmf::PolyConfig resolve() const {
        pmf::ResolveOptions o;
        o.spontaneousBirths = false;
        return pmf::resolve_forced(d, {birth()}, o);
    }
};
