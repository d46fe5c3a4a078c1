#include "pmf/kinematics.hpp"

#include "pmf/detmath.hpp"

namespace pmf {

Vec2 face_velocity(const Plane& p) {
    Vec2 ns{p.u.y, p.u.z};
    double s2 = dot(ns, ns);
    if (s2 < kEpsGeom * kEpsGeom) throw DegeneracyError("face_velocity: plane parallel to the spatial slice");
    return ns * (-p.u.x / s2);
}

MultiEdge section_of(const Plane& p, double t) {
    Vec2 ns{p.u.y, p.u.z};
    double s = norm(ns);
    if (s < kEpsGeom) throw DegeneracyError("section_of: plane parallel to the spatial slice");
    MultiEdge e;
    e.plane = p;
    e.time = t;
    e.normal = ns / s;
    e.direction = perp(e.normal);
    e.offset = (p.rho - t * p.u.x) / s;
    e.velocity = face_velocity(p);
    return e;
}

Vec2 vertex_velocity(const Vec2& m1, const Vec2& v1, const Vec2& m2, const Vec2& v2) {
    double det = cross(m1, m2);
    if (std::abs(det) < kEpsGeom) throw DegeneracyError("vertex_velocity: parallel lines");
    double r1 = dot(v1, m1), r2 = dot(v2, m2);
    return Vec2{(r1 * m2.y - r2 * m1.y) / det, (m1.x * r2 - m2.x * r1) / det};
}

Vec2 vertex_velocity(const MultiEdge& e1, const MultiEdge& e2) {
    return vertex_velocity(e1.normal, e1.velocity, e2.normal, e2.velocity);
}

Vec2 vertex_velocity_gram(const Vec2& vj, const Vec2& vk) {
    double g11 = dot(vj, vj), g12 = dot(vj, vk), g22 = dot(vk, vk);
    double det = g11 * g22 - g12 * g12;
    if (std::abs(det) < kEpsGeom * (g11 * g22 + 1e-300)) throw DegeneracyError("vertex_velocity_gram: singular");
    double a = (g11 * g22 - g12 * g22) / det;
    double b = (g11 * g22 - g12 * g11) / det;
    return vj * a + vk * b;
}

namespace {

bool positively_spanning(const std::array<EdgeMotion, 3>& e) {
    double c0 = cross(e[0].normal, e[1].normal);
    double c1 = cross(e[1].normal, e[2].normal);
    double c2 = cross(e[2].normal, e[0].normal);
    return (c0 > 0 && c1 > 0 && c2 > 0) || (c0 < 0 && c1 < 0 && c2 < 0);
}

bool predicate(const std::array<EdgeMotion, 3>& e, int i) {
    const auto& a = e[(i + 1) % 3];
    const auto& b = e[(i + 2) % 3];
    Vec2 w = vertex_velocity(a.normal, a.velocity, b.normal, b.velocity);
    return dot(e[i].velocity, e[i].normal) > dot(w, e[i].normal);
}

}  // namespace

bool stable_it(const std::array<EdgeMotion, 3>& e) { return positively_spanning(e) && predicate(e, 0); }

bool stable_ia(const std::array<EdgeMotion, 3>& e) {
    return positively_spanning(e) && predicate(e, 0) && predicate(e, 1) && predicate(e, 2);
}

bool stable_ie(const EdgeMotion& e1, const Vec2& sa, const EdgeMotion& e2, const Vec2& sb, const EdgeMotion& e3) {
    Vec2 w = vertex_velocity(e1.normal, e1.velocity, e2.normal, e2.velocity);
    double delta = dot(e3.velocity - w, e3.normal);
    return delta * dot(sa, e3.normal) > 0 || delta * dot(sb, e3.normal) > 0;
}

double wedge_angle_sections(const Vec3& futureDir, const Vec3& sa, const Vec3& sb) {
    std::array<Vec3, 3> n{normalized(futureDir), normalized(sa), normalized(sb)};
    if (std::abs(det3(n[0], n[1], n[2])) < 1e-13) throw DegeneracyError("wedge_angle: coplanar faces");
    double total = 0;
    for (int i = 0; i < 3; ++i) {
        std::array<Vec3, 2> v;
        for (int k = 0; k < 2; ++k) {
            int j = (i + 1 + k) % 3;
            int other = (i + 2 - k) % 3;
            Vec3 c = normalized(cross(n[i], n[j]));
            if (dot(c, n[other]) < 0) c = -c;
            v[k] = c;
        }
        double theta = detmath::atan2(norm(cross(v[0], v[1])), dot(v[0], v[1]));
        total += theta * dot(n[i], n[0]);
    }
    return total;
}

double wedge_angle(const Wedge& w) {
    Vec3 d = normalized(w.dir);
    if (std::abs(d.x) < kEpsGeom) throw DegeneracyError("wedge_angle: edge parallel to the spatial slice");
    if (d.x < 0) d = -d;
    Vec3 sa = w.a * d.x - d * w.a.x;
    Vec3 sb = w.b * d.x - d * w.b.x;
    return wedge_angle_sections(d, sa, sb);
}

double sector_angle(const Wedge& w) { return detmath::acos(dot(normalized(w.a), normalized(w.b))); }

}  // namespace pmf
