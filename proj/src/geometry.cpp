#include "pmf/geometry.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "pmf/detmath.hpp"

namespace pmf {

bool lex_greater(const Vec3& a, const Vec3& b) {
    if (a.x != b.x) return a.x > b.x;
    if (a.y != b.y) return a.y > b.y;
    return a.z > b.z;
}

Plane plane_from_chart(const Vec3& u, double rho) {
    if (!std::isfinite(u.x) || !std::isfinite(u.y) || !std::isfinite(u.z) || !std::isfinite(rho))
        throw InputError("plane chart: non-finite value");
    if (std::abs(norm(u) - 1.0) > kEpsGeom) throw InputError("plane chart: normal is not a unit vector");
    if (rho < -kEpsGeom) throw InputError("plane chart: negative rho");
    Plane p{u, std::max(rho, 0.0)};
    if (p.rho == 0 && lex_greater(-p.u, p.u)) p.u = -p.u;
    return p;
}

Plane plane_through(const Vec3& point, const Vec3& normal) {
    double len = norm(normal);
    if (!(len > 0)) throw DegeneracyError("plane_through: zero normal");
    Vec3 n = normal / len;
    double rho = dot(point, n);
    if (rho < 0) {
        n = -n;
        rho = -rho;
    }
    if (rho == 0 && lex_greater(-n, n)) n = -n;
    return Plane{n, rho};
}

Line3 line_of(const Plane& a, const Plane& b) {
    Vec3 d = cross(a.u, b.u);
    double dd = dot(d, d);
    if (dd < kEpsGeom * kEpsGeom) throw DegeneracyError("line_of: parallel planes");
    Vec3 p = (cross(b.u, d) * a.rho + cross(d, a.u) * b.rho) / dd;
    Vec3 dir = d / std::sqrt(dd);
    if (lex_greater(-dir, dir)) dir = -dir;
    return Line3{p, dir};
}

Vec3 triple_point(const Plane& a, const Plane& b, const Plane& c) {
    double det = det3(a.u, b.u, c.u);
    if (std::abs(det) < kEpsGeom) throw DegeneracyError("triple_point: dependent normals");
    Vec3 x = (cross(b.u, c.u) * a.rho + cross(c.u, a.u) * b.rho + cross(a.u, b.u) * c.rho) / det;
    double scale = 1.0 + std::abs(a.rho) + std::abs(b.rho) + std::abs(c.rho);
    double res = std::max({std::abs(a.eval(x)), std::abs(b.eval(x)), std::abs(c.eval(x))});
    if (res > kEpsGeom * scale) throw DegeneracyError("triple_point: ill-conditioned");
    return x;
}

void plane_basis(const Vec3& n, Vec3& e1, Vec3& e2) {
    Vec3 a = std::abs(n.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    e1 = normalized(a - n * dot(n, a));
    e2 = cross(n, e1);
}

bool Domain::contains(const Vec3& p, double tol) const {
    for (const auto& h : halfspaces)
        if (dot(h.n, p) - h.b > tol) return false;
    return true;
}

double Domain::slack(const Vec3& p) const {
    double s = -1e300;
    for (const auto& h : halfspaces) s = std::max(s, dot(h.n, p) - h.b);
    return s;
}

double Domain::support(const Vec3& u) const {
    double s = -1e300;
    for (const auto& v : vertices) s = std::max(s, dot(v, u));
    return s;
}

double Domain::tmin() const {
    double t = 1e300;
    for (const auto& v : vertices) t = std::min(t, v.x);
    return t;
}

double Domain::tmax() const {
    double t = -1e300;
    for (const auto& v : vertices) t = std::max(t, v.x);
    return t;
}

namespace {

std::vector<int> order_cycle(const std::vector<Vec3>& pts, const std::vector<int>& ids, const Vec3& n) {
    Vec3 c;
    for (int i : ids) c += pts[i];
    c = c / static_cast<double>(ids.size());
    Vec3 e1, e2;
    plane_basis(n, e1, e2);
    std::vector<std::pair<double, int>> ang;
    for (int i : ids) {
        Vec3 r = pts[i] - c;
        ang.push_back({detmath::atan2(dot(r, e2), dot(r, e1)), i});
    }
    std::sort(ang.begin(), ang.end());
    std::vector<int> out;
    for (auto& a : ang) out.push_back(a.second);
    return out;
}

double cycle_area3(const std::vector<Vec3>& pts, const std::vector<int>& cyc, const Vec3& n) {
    Vec3 s;
    for (size_t i = 0; i < cyc.size(); ++i) s += cross(pts[cyc[i]], pts[cyc[(i + 1) % cyc.size()]]);
    return 0.5 * dot(s, n);
}

}  // namespace

Domain build_domain(const std::vector<Halfspace>& input) {
    if (input.size() < 4) throw InputError("domain: at least 4 halfspaces are required");
    std::vector<Halfspace> hs;
    double scale = 1.0;
    for (const auto& h : input) {
        double len = norm(h.n);
        if (!(len > 0) || !std::isfinite(len) || !std::isfinite(h.b)) throw InputError("domain: invalid halfspace");
        hs.push_back({h.n / len, h.b / len});
        scale = std::max(scale, std::abs(h.b / len));
    }
    const double tol = 1e-9 * scale;
    const double big = 1e6 * scale;
    std::vector<Halfspace> all = hs;
    for (int k = 0; k < 3; ++k) {
        Vec3 e;
        e[k] = 1;
        all.push_back({e, big});
        all.push_back({-e, big});
    }
    const int nh = static_cast<int>(hs.size());
    const int na = static_cast<int>(all.size());
    std::vector<Vec3> verts;
    for (int i = 0; i < na; ++i)
        for (int j = i + 1; j < na; ++j)
            for (int k = j + 1; k < na; ++k) {
                double det = det3(all[i].n, all[j].n, all[k].n);
                if (std::abs(det) < 1e-12) continue;
                Vec3 x = (cross(all[j].n, all[k].n) * all[i].b + cross(all[k].n, all[i].n) * all[j].b +
                          cross(all[i].n, all[j].n) * all[k].b) /
                         det;
                bool ok = true;
                for (int m = 0; m < na && ok; ++m)
                    if (dot(all[m].n, x) - all[m].b > tol * (m >= nh ? 1e6 : 1.0)) ok = false;
                if (!ok) continue;
                bool dup = false;
                for (const auto& v : verts)
                    if (norm(v - x) < 10 * tol) dup = true;
                if (!dup) verts.push_back(x);
            }
    for (const auto& v : verts)
        for (int m = nh; m < na; ++m)
            if (std::abs(dot(all[m].n, v) - all[m].b) < 1e-6 * big)
                throw InputError("domain: halfspace intersection is unbounded");
    if (verts.size() < 4) throw InputError("domain: empty interior");

    Domain d;
    d.vertices = verts;
    std::vector<std::vector<int>> seen;
    for (int i = 0; i < nh; ++i) {
        std::vector<int> on;
        for (int v = 0; v < static_cast<int>(verts.size()); ++v)
            if (std::abs(dot(hs[i].n, verts[v]) - hs[i].b) <= 10 * tol) on.push_back(v);
        if (on.size() < 3) continue;
        auto cyc = order_cycle(verts, on, hs[i].n);
        if (std::abs(cycle_area3(verts, cyc, hs[i].n)) < tol * scale) continue;
        auto key = on;
        std::sort(key.begin(), key.end());
        if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
        seen.push_back(key);
        d.facets.push_back({hs[i], cyc});
        d.halfspaces.push_back(hs[i]);
    }
    std::map<std::pair<int, int>, std::vector<int>> edgeFacets;
    for (int f = 0; f < static_cast<int>(d.facets.size()); ++f) {
        const auto& c = d.facets[f].cycle;
        for (size_t i = 0; i < c.size(); ++i) {
            int a = c[i], b = c[(i + 1) % c.size()];
            edgeFacets[{std::min(a, b), std::max(a, b)}].push_back(f);
        }
    }
    for (const auto& [key, fs] : edgeFacets) {
        if (fs.size() != 2) throw InputError("domain: inconsistent boundary complex");
        DomainEdge e;
        e.v0 = key.first;
        e.v1 = key.second;
        e.f0 = fs[0];
        e.f1 = fs[1];
        e.length = norm(verts[e.v1] - verts[e.v0]);
        double c = std::clamp(dot(d.facets[e.f0].hs.n, d.facets[e.f1].hs.n), -1.0, 1.0);
        e.dihedral = kPi - detmath::acos(c);
        d.edges.push_back(e);
    }
    Vec3 c;
    for (const auto& v : verts) c += v;
    c = c / static_cast<double>(verts.size());
    d.center = c;
    double vol = 0;
    for (const auto& f : d.facets) vol += cycle_area3(verts, f.cycle, f.hs.n) * (f.hs.b - dot(f.hs.n, c)) / 3.0;
    if (!(vol > 1e-12 * scale * scale * scale)) throw InputError("domain: empty interior");
    d.volume = vol;
    if (static_cast<int>(verts.size()) - static_cast<int>(d.edges.size()) + static_cast<int>(d.facets.size()) != 2)
        throw InputError("domain: Euler relation violated");
    for (size_t i = 0; i < verts.size(); ++i)
        for (size_t j = i + 1; j < verts.size(); ++j) d.diameter = std::max(d.diameter, norm(verts[i] - verts[j]));
    return d;
}

Domain make_box(const Vec3& lo, const Vec3& hi) {
    std::vector<Halfspace> hs;
    for (int k = 0; k < 3; ++k) {
        Vec3 e;
        e[k] = 1;
        hs.push_back({e, hi[k]});
        hs.push_back({-e, -lo[k]});
    }
    return build_domain(hs);
}

Domain transform_domain(const Domain& d, const std::array<Vec3, 3>& rot, const Vec3& shift) {
    std::vector<Halfspace> hs;
    for (const auto& h : d.halfspaces) {
        Vec3 n{dot(rot[0], h.n), dot(rot[1], h.n), dot(rot[2], h.n)};
        hs.push_back({n, h.b + dot(n, shift)});
    }
    return build_domain(hs);
}

double signed_area(const std::vector<Vec2>& cycle) {
    double s = 0;
    for (size_t i = 0; i < cycle.size(); ++i) s += cross(cycle[i], cycle[(i + 1) % cycle.size()]);
    return 0.5 * s;
}

bool point_in_cycle(const std::vector<Vec2>& c, const Vec2& q) {
    bool in = false;
    for (size_t i = 0, j = c.size() - 1; i < c.size(); j = i++) {
        if ((c[i].y > q.y) != (c[j].y > q.y)) {
            double x = c[j].x + (q.y - c[j].y) * (c[i].x - c[j].x) / (c[i].y - c[j].y);
            if (q.x < x) in = !in;
        }
    }
    return in;
}

double Polygon2::area() const {
    double a = std::abs(signed_area(outer));
    for (const auto& h : holes) a -= std::abs(signed_area(h));
    return a;
}

Polygon2 make_polygon_frame(const Plane& p) {
    Polygon2 poly;
    poly.plane = p;
    poly.origin = p.u * p.rho;
    plane_basis(p.u, poly.e1, poly.e2);
    return poly;
}

std::optional<Section> intersect_plane_domain(const Plane& p, const Domain& d) {
    const double tol = kEpsGeom * (1.0 + std::abs(p.rho) + d.diameter);
    std::vector<double> s;
    bool pos = false, neg = false;
    for (const auto& v : d.vertices) {
        s.push_back(p.eval(v));
        pos = pos || s.back() > tol;
        neg = neg || s.back() < -tol;
    }
    if (!pos || !neg) return std::nullopt;
    std::vector<Vec3> pts;
    auto add = [&](const Vec3& x) {
        for (const auto& q : pts)
            if (norm(q - x) < 10 * tol) return;
        pts.push_back(x);
    };
    for (size_t i = 0; i < d.vertices.size(); ++i)
        if (std::abs(s[i]) <= tol) add(d.vertices[i]);
    for (const auto& e : d.edges) {
        double a = s[e.v0], b = s[e.v1];
        if ((a < -tol && b > tol) || (a > tol && b < -tol))
            add(d.vertices[e.v0] + (d.vertices[e.v1] - d.vertices[e.v0]) * (a / (a - b)));
    }
    if (pts.size() < 3) return std::nullopt;
    Section sec;
    sec.poly = make_polygon_frame(p);
    std::vector<int> ids(pts.size());
    std::iota(ids.begin(), ids.end(), 0);
    auto cyc = order_cycle(pts, ids, p.u);
    for (int i : cyc) {
        sec.vertices.push_back(pts[i]);
        sec.poly.outer.push_back(sec.poly.to2d(pts[i]));
    }
    if (signed_area(sec.poly.outer) <= tol * tol) return std::nullopt;
    return sec;
}

}  // namespace pmf
