#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmf {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kEpsGeom = 1e-9;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegeneracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Components x, y, z; in time-space x is the r-time t.
struct Vec3 {
    double x = 0, y = 0, z = 0;

    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    bool operator==(const Vec3&) const = default;
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) { return a / norm(a); }
inline double det3(const Vec3& a, const Vec3& b, const Vec3& c) { return dot(a, cross(b, c)); }

struct Vec2 {
    double x = 0, y = 0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    bool operator==(const Vec2&) const = default;
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::sqrt(dot(a, a)); }
inline Vec2 normalized(const Vec2& a) { return a / norm(a); }
inline Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }

inline Vec2 spatial(const Vec3& v) { return {v.y, v.z}; }

bool lex_greater(const Vec3& a, const Vec3& b);

struct Plane {
    Vec3 u;
    double rho = 0;

    double eval(const Vec3& p) const { return dot(p, u) - rho; }
    bool operator==(const Plane&) const = default;
};

Plane plane_from_chart(const Vec3& u, double rho);
Plane plane_through(const Vec3& point, const Vec3& normal);

struct Line3 {
    Vec3 point;
    Vec3 direction;
};

Line3 line_of(const Plane& a, const Plane& b);
Vec3 triple_point(const Plane& a, const Plane& b, const Plane& c);

// Orthonormal basis (e1, e2) of the plane orthogonal to n with e1 x e2 = n.
void plane_basis(const Vec3& n, Vec3& e1, Vec3& e2);

struct Halfspace {
    Vec3 n;
    double b = 0;
};

struct DomainEdge {
    int v0 = 0, v1 = 0;
    int f0 = 0, f1 = 0;
    double length = 0;
    double dihedral = 0;
};

struct Facet {
    Halfspace hs;
    std::vector<int> cycle;
};

struct Domain {
    std::vector<Halfspace> halfspaces;
    std::vector<Vec3> vertices;
    std::vector<DomainEdge> edges;
    std::vector<Facet> facets;
    double volume = 0;
    Vec3 center;
    double diameter = 0;

    bool contains(const Vec3& p, double tol = 0) const;
    double slack(const Vec3& p) const;
    double support(const Vec3& u) const;
    double tmin() const;
    double tmax() const;
};

Domain build_domain(const std::vector<Halfspace>& hs);
Domain make_box(const Vec3& lo, const Vec3& hi);
Domain transform_domain(const Domain& d, const std::array<Vec3, 3>& rot, const Vec3& shift);

struct Polygon2 {
    Plane plane;
    Vec3 origin, e1, e2;
    std::vector<Vec2> outer;
    std::vector<std::vector<Vec2>> holes;

    Vec3 to3d(const Vec2& p) const { return origin + e1 * p.x + e2 * p.y; }
    Vec2 to2d(const Vec3& p) const { return {dot(p - origin, e1), dot(p - origin, e2)}; }
    double area() const;
};

Polygon2 make_polygon_frame(const Plane& p);
double signed_area(const std::vector<Vec2>& cycle);
bool point_in_cycle(const std::vector<Vec2>& cycle, const Vec2& q);

struct Section {
    Polygon2 poly;
    std::vector<Vec3> vertices;
};

std::optional<Section> intersect_plane_domain(const Plane& p, const Domain& d);

}  // namespace pmf
