#pragma once

#include <array>
#include <vector>

#include "pmf/geometry.hpp"

namespace pmf {

// Section of a plane by the spatial slice at r-time t: {p : <p, normal> = offset},
// moving with velocity `velocity` (a multiple of normal).
struct MultiEdge {
    Plane plane;
    double time = 0;
    Vec2 normal;
    Vec2 direction;
    double offset = 0;
    Vec2 velocity;
    std::vector<std::array<double, 2>> segments;
    bool boundary = false;

    Vec2 point() const { return normal * offset; }
};

Vec2 face_velocity(const Plane& p);
MultiEdge section_of(const Plane& p, double t);

Vec2 vertex_velocity(const Vec2& m1, const Vec2& v1, const Vec2& m2, const Vec2& v2);
Vec2 vertex_velocity(const MultiEdge& e1, const MultiEdge& e2);
// Form a*v_j + b*v_k from the 2x2 Gram system; singular for zero velocities.
Vec2 vertex_velocity_gram(const Vec2& vj, const Vec2& vk);

struct EdgeMotion {
    Vec2 normal;    // unit normal of the section line, oriented as required by the predicate
    Vec2 velocity;  // section velocity
};

// n_i outward normals of the infinitesimal triangle; checked for i = 0.
bool stable_it(const std::array<EdgeMotion, 3>& e);
// e[0] the pre-existing edge (normal opposite to where the angle is born), e[1], e[2] new
// edges (normals outward the newborn convex angle).
bool stable_ia(const std::array<EdgeMotion, 3>& e);
// Existing edges meet at a node; sa, sb are the directions of their segments leaving the
// node. e3 passes through the node at birth.
bool stable_ie(const EdgeMotion& e1, const Vec2& sa, const EdgeMotion& e2, const Vec2& sb, const EdgeMotion& e3);

// Face half-planes along an edge line: `dir` is the edge direction, a and b point from the
// line into each face (orthogonal to dir).
struct Wedge {
    Vec3 dir;
    Vec3 a, b;
};

// 2*pi times the |cos|-law probability that a plane through the edge gives an unstable
// IE birth, in closed form.
double wedge_angle(const Wedge& w);
// Same, but from the future edge direction and the horizontal section directions of the
// two half-planes.
double wedge_angle_sections(const Vec3& futureDir, const Vec3& sa, const Vec3& sb);
double sector_angle(const Wedge& w);

}  // namespace pmf
