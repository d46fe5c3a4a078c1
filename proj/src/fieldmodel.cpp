#include "pmf/fieldmodel.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "pmf/kinematics.hpp"
#include "pmf/stochgeom.hpp"

namespace pmf {

bool operator==(const Face& a, const Face& b) {
    return a.poly.plane == b.poly.plane && a.poly.outer == b.poly.outer && a.poly.holes == b.poly.holes &&
           a.outerIds == b.outerIds && a.holeIds == b.holeIds && a.tag == b.tag;
}

bool operator==(const PolyConfig& a, const PolyConfig& b) {
    return a.vertices == b.vertices && a.faces == b.faces && a.internalEdges == b.internalEdges &&
           a.boundaryEdges == b.boundaryEdges;
}

std::string ValidationReport::summary() const {
    if (ok()) return "ok";
    std::ostringstream os;
    for (const auto& v : violations) os << v.condition << ": " << v.detail << "\n";
    return os.str();
}

namespace {

using EdgeKey = std::pair<int, int>;
EdgeKey ekey(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

template <class F>
void for_each_cycle(const Face& f, F&& fn) {
    fn(f.outerIds);
    for (const auto& h : f.holeIds) fn(h);
}

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d, double tol) {
    double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
    double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
    return ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)) && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol));
}

// Closed parameter intervals of the line p0 + s*dir inside the face polygon.
std::vector<std::array<double, 2>> line_in_face(const Face& f, const Vec3& p0, const Vec3& dir) {
    Vec2 q0 = f.poly.to2d(p0);
    Vec2 q1 = f.poly.to2d(p0 + dir);
    Vec2 dd = q1 - q0;
    std::vector<double> ts;
    auto scan = [&](const std::vector<Vec2>& c) {
        for (size_t i = 0; i < c.size(); ++i) {
            Vec2 a = c[i], b = c[(i + 1) % c.size()];
            Vec2 e = b - a;
            double den = cross(dd, e);
            if (std::abs(den) < 1e-14) continue;
            double s = cross(a - q0, e) / den;
            double r = cross(a - q0, dd) / den;
            if (r >= -1e-12 && r <= 1 + 1e-12) ts.push_back(s);
        }
    };
    scan(f.poly.outer);
    for (const auto& h : f.poly.holes) scan(h);
    std::sort(ts.begin(), ts.end());
    std::vector<std::array<double, 2>> out;
    for (size_t i = 0; i + 1 < ts.size(); ++i) {
        double m = 0.5 * (ts[i] + ts[i + 1]);
        if (ts[i + 1] - ts[i] < 1e-14) continue;
        Vec2 q = q0 + dd * m;
        bool in = point_in_cycle(f.poly.outer, q);
        for (const auto& h : f.poly.holes) in = in && !point_in_cycle(h, q);
        if (in) out.push_back({ts[i], ts[i + 1]});
    }
    return out;
}

}  // namespace

ValidationReport validate(const PolyConfig& cfg, const Domain& d) {
    ValidationReport rep;
    const double tol = 1e-7 * (1.0 + d.diameter);
    auto add = [&](const std::string& c, const std::string& detail) { rep.violations.push_back({c, detail}); };
    const int nv = static_cast<int>(cfg.vertices.size());
    const int nf = static_cast<int>(cfg.faces.size());

    for (int i = 0; i < nv; ++i)
        if (d.slack(cfg.vertices[i].p) > tol) add("domain", "vertex " + std::to_string(i) + " outside the domain");

    for (int i = 0; i < nf; ++i)
        for (int j = i + 1; j < nf; ++j) {
            const Plane& a = cfg.faces[i].poly.plane;
            const Plane& b = cfg.faces[j].poly.plane;
            bool same = (norm(a.u - b.u) < kEpsGeom && std::abs(a.rho - b.rho) < tol) ||
                        (norm(a.u + b.u) < kEpsGeom && std::abs(a.rho + b.rho) < tol);
            if (same) add("P6", "faces " + std::to_string(i) + " and " + std::to_string(j) + " are coplanar");
        }

    std::map<EdgeKey, std::vector<int>> cycleFaces;
    std::vector<std::set<int>> vertexFaces(nv);
    for (int i = 0; i < nf; ++i) {
        const Face& f = cfg.faces[i];
        bool idsOk = true;
        for_each_cycle(f, [&](const std::vector<int>& c) {
            for (int id : c) idsOk = idsOk && id >= 0 && id < nv;
        });
        if (!idsOk) {
            add("face", "face " + std::to_string(i) + " references a missing vertex");
            continue;
        }
        if (!(f.poly.area() > 0)) add("face", "face " + std::to_string(i) + " has non-positive area");
        if (signed_area(f.poly.outer) <= 0) add("face", "face " + std::to_string(i) + " outer cycle not positive");
        for (const auto& h : f.poly.holes) {
            if (signed_area(h) >= 0) add("face", "face " + std::to_string(i) + " hole cycle not negative");
            if (!h.empty() && !point_in_cycle(f.poly.outer, h[0]))
                add("face", "face " + std::to_string(i) + " hole outside outer cycle");
        }
        std::vector<std::pair<Vec2, Vec2>> segs;
        for_each_cycle(f, [&](const std::vector<int>& c) {
            for (size_t k = 0; k < c.size(); ++k) {
                int a = c[k], b = c[(k + 1) % c.size()];
                cycleFaces[ekey(a, b)].push_back(i);
                vertexFaces[a].insert(i);
                if (std::abs(f.poly.plane.eval(cfg.vertices[a].p)) > tol)
                    add("face", "vertex " + std::to_string(a) + " off the plane of face " + std::to_string(i));
                segs.push_back({f.poly.to2d(cfg.vertices[a].p), f.poly.to2d(cfg.vertices[b].p)});
            }
        });
        for (size_t a = 0; a < segs.size(); ++a)
            for (size_t b = a + 1; b < segs.size(); ++b)
                if (segments_cross(segs[a].first, segs[a].second, segs[b].first, segs[b].second, 1e-12))
                    add("face", "face " + std::to_string(i) + " boundary self-intersects");
    }

    std::vector<int> nInternal(nv, 0), nBoundary(nv, 0);
    std::set<EdgeKey> listed;
    for (size_t k = 0; k < cfg.internalEdges.size(); ++k) {
        const auto& e = cfg.internalEdges[k];
        auto key = ekey(e.v0, e.v1);
        listed.insert(key);
        ++nInternal[e.v0];
        ++nInternal[e.v1];
        auto it = cycleFaces.find(key);
        std::vector<int> fs = it == cycleFaces.end() ? std::vector<int>{} : it->second;
        std::sort(fs.begin(), fs.end());
        std::vector<int> want{std::min(e.f0, e.f1), std::max(e.f0, e.f1)};
        if (fs != want) add("P2", "internal edge " + std::to_string(k) + " is not shared by exactly its two faces");
    }
    for (size_t k = 0; k < cfg.boundaryEdges.size(); ++k) {
        const auto& e = cfg.boundaryEdges[k];
        auto key = ekey(e.v0, e.v1);
        listed.insert(key);
        ++nBoundary[e.v0];
        ++nBoundary[e.v1];
        auto it = cycleFaces.find(key);
        if (it == cycleFaces.end() || it->second.size() != 1 || it->second[0] != e.face)
            add("P3", "boundary edge " + std::to_string(k) + " is not on exactly one face");
        if (e.facet < 0 || e.facet >= static_cast<int>(d.facets.size())) {
            add("P3", "boundary edge " + std::to_string(k) + " has no facet");
        } else {
            const auto& h = d.facets[e.facet].hs;
            for (int v : {e.v0, e.v1})
                if (std::abs(dot(h.n, cfg.vertices[v].p) - h.b) > tol)
                    add("P3", "boundary edge " + std::to_string(k) + " leaves its facet");
        }
    }
    for (const auto& [key, fs] : cycleFaces)
        if (!listed.count(key))
            add("P2", "face side " + std::to_string(key.first) + "-" + std::to_string(key.second) + " is not an edge");

    for (int i = 0; i < nv; ++i) {
        const auto& v = cfg.vertices[i];
        int faces = static_cast<int>(vertexFaces[i].size());
        if (!v.boundary) {
            if (faces != 3 || nInternal[i] != 3 || nBoundary[i] != 0)
                add("P4", "internal vertex " + std::to_string(i) + " has " + std::to_string(faces) + " faces and " +
                              std::to_string(nInternal[i] + nBoundary[i]) + " edges");
        } else {
            if (std::abs(d.slack(v.p)) > tol) add("P5", "boundary vertex " + std::to_string(i) + " not on the boundary");
            if (!v.corner && (faces != 2 || nInternal[i] != 1 || nBoundary[i] != 2))
                add("P5", "boundary vertex " + std::to_string(i) + " has " + std::to_string(faces) + " faces, " +
                              std::to_string(nInternal[i]) + " internal and " + std::to_string(nBoundary[i]) +
                              " boundary edges");
        }
    }

    std::map<EdgeKey, std::vector<int>> sharedEdges;
    for (size_t k = 0; k < cfg.internalEdges.size(); ++k) {
        const auto& e = cfg.internalEdges[k];
        sharedEdges[ekey(e.f0, e.f1)].push_back(static_cast<int>(k));
    }
    if (rep.ok()) {
        for (int i = 0; i < nf; ++i)
            for (int j = i + 1; j < nf; ++j) {
                const Plane& a = cfg.faces[i].poly.plane;
                const Plane& b = cfg.faces[j].poly.plane;
                if (norm(cross(a.u, b.u)) < kEpsGeom) continue;
                Line3 l = line_of(a, b);
                auto ia = line_in_face(cfg.faces[i], l.point, l.direction);
                auto ib = line_in_face(cfg.faces[j], l.point, l.direction);
                for (const auto& x : ia)
                    for (const auto& y : ib) {
                        double lo = std::max(x[0], y[0]), hi = std::min(x[1], y[1]);
                        if (hi - lo <= tol) continue;
                        Vec3 mid = l.point + l.direction * (0.5 * (lo + hi));
                        bool onShared = false;
                        for (int k : sharedEdges[ekey(i, j)]) {
                            const auto& e = cfg.internalEdges[k];
                            Vec3 p0 = cfg.vertices[e.v0].p, p1 = cfg.vertices[e.v1].p;
                            Vec3 dd = p1 - p0;
                            double s = std::clamp(dot(mid - p0, dd) / dot(dd, dd), 0.0, 1.0);
                            if (norm(p0 + dd * s - mid) < tol) onShared = true;
                        }
                        if (!onShared)
                            add("P1", "faces " + std::to_string(i) + " and " + std::to_string(j) + " intersect");
                    }
            }
    }
    return rep;
}

double edge_wedge_angle(const PolyConfig& cfg, const InternalEdge& e) {
    Vec3 p0 = cfg.vertices[e.v0].p, p1 = cfg.vertices[e.v1].p;
    auto inward = [&](int fi) {
        const Face& f = cfg.faces[fi];
        std::optional<Vec3> r;
        for_each_cycle(f, [&](const std::vector<int>& c) {
            for (size_t k = 0; k < c.size(); ++k) {
                int a = c[k], b = c[(k + 1) % c.size()];
                if (ekey(a, b) == ekey(e.v0, e.v1))
                    r = cross(f.poly.plane.u, cfg.vertices[b].p - cfg.vertices[a].p);
            }
        });
        if (!r) throw InputError("edge_wedge_angle: edge is not on its face");
        return *r;
    };
    Vec3 a = inward(e.f0), b = inward(e.f1);
    Vec3 dir = p1 - p0;
    a = a - dir * (dot(a, dir) / dot(dir, dir));
    b = b - dir * (dot(b, dir) / dot(dir, dir));
    return wedge_angle(Wedge{dir, a, b});
}

double energy(const PolyConfig& cfg, const Domain& d) {
    const int nf = static_cast<int>(cfg.faces.size());
    const int nv = static_cast<int>(cfg.vertices.size());
    double edgeTerm = 0, area = 0;
    for (const auto& e : cfg.internalEdges) {
        if (e.v0 < 0 || e.v0 >= nv || e.v1 < 0 || e.v1 >= nv || e.f0 < 0 || e.f0 >= nf || e.f1 < 0 || e.f1 >= nf)
            throw InputError("energy: edge references out of range");
        if (!(e.wedge > 0 && e.wedge < 2 * kPi)) throw InputError("energy: wedge angle out of range");
        edgeTerm += 0.5 * (2 * kPi - e.wedge) * norm(cfg.vertices[e.v1].p - cfg.vertices[e.v0].p);
    }
    for (const auto& f : cfg.faces) {
        double a = f.poly.area();
        if (!(a > 0)) throw InputError("energy: face with non-positive area");
        area += a;
    }
    return edgeTerm + kIntensityPair * area + kIntensityTriple * d.volume;
}

EntrySet entry_events(const PolyConfig& cfg, const Domain& d) {
    (void)d;
    std::map<int, std::vector<int>> byVertex;
    for (int i = 0; i < static_cast<int>(cfg.faces.size()); ++i) {
        const Face& f = cfg.faces[i];
        if (f.outerIds.empty()) throw InputError("entry_events: face without boundary");
        int best = f.outerIds[0];
        for (int id : f.outerIds)
            if (cfg.vertices[id].p.x < cfg.vertices[best].p.x) best = id;
        if (cfg.vertices[best].boundary) byVertex[best].push_back(i);
    }
    EntrySet out;
    for (const auto& [v, faces] : byVertex) {
        const auto& cv = cfg.vertices[v];
        EntryEvent e;
        e.time = cv.p.x;
        e.location = cv.p;
        if (cv.corner) {
            if (faces.size() != 1) throw InputError("entry_events: ambiguous edge entry");
            e.kind = EntryKind::IE;
        } else {
            if (faces.size() != 2) throw InputError("entry_events: ambiguous facet entry");
            e.kind = EntryKind::IA;
        }
        for (int fi : faces) e.planes.push_back(cfg.faces[fi].poly.plane);
        out.push_back(e);
    }
    std::stable_sort(out.begin(), out.end(), [](const EntryEvent& a, const EntryEvent& b) { return a.time < b.time; });
    return out;
}

Stats stats(const PolyConfig& cfg) {
    Stats s;
    s.faceCount = static_cast<int>(cfg.faces.size());
    s.internalEdgeCount = static_cast<int>(cfg.internalEdges.size());
    s.boundaryEdgeCount = static_cast<int>(cfg.boundaryEdges.size());
    s.vertexCount = static_cast<int>(cfg.vertices.size());
    for (const auto& v : cfg.vertices) s.internalVertexCount += !v.boundary;
    for (const auto& f : cfg.faces) {
        double a = f.poly.area();
        s.faceAreas.push_back(a);
        s.totalArea += a;
    }
    for (const auto& e : cfg.internalEdges) s.totalEdgeLength += e.length;
    return s;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string key_str(const Key& k) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%016" PRIx64 "%016" PRIx64, k.hi, k.lo);
    return buf;
}

Key parse_key(const std::string& s) {
    if (s.size() != 32) throw InputError("deserialize: bad key");
    return Key{std::stoull(s.substr(0, 16), nullptr, 16), std::stoull(s.substr(16), nullptr, 16)};
}

std::string strip_comments(const std::string& t) {
    std::istringstream in(t);
    std::string line, out;
    while (std::getline(in, line))
        if (line.empty() || line[0] != '#') out += line + "\n";
    return out;
}

class Reader {
public:
    explicit Reader(const std::string& t) : in_(strip_comments(t)) {}
    std::string word() {
        std::string w;
        if (!(in_ >> w)) throw InputError("deserialize: unexpected end of input");
        return w;
    }
    void expect(const std::string& w) {
        if (word() != w) throw InputError("deserialize: expected '" + w + "'");
    }
    double real() {
        std::string w = word();
        char* end = nullptr;
        double v = std::strtod(w.c_str(), &end);
        if (end == w.c_str() || *end) throw InputError("deserialize: bad number '" + w + "'");
        return v;
    }
    long integer() {
        std::string w = word();
        size_t pos = 0;
        long v = 0;
        try {
            v = std::stol(w, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != w.size() || w.empty()) throw InputError("deserialize: bad integer '" + w + "'");
        return v;
    }
    size_t count() {
        long n = integer();
        if (n < 0) throw InputError("deserialize: negative count");
        return static_cast<size_t>(n);
    }

private:
    std::istringstream in_;
};

std::string plane_str(const Plane& p) { return fmt(p.u.x) + " " + fmt(p.u.y) + " " + fmt(p.u.z) + " " + fmt(p.rho); }
Plane read_plane(Reader& r) {
    Plane p;
    p.u.x = r.real();
    p.u.y = r.real();
    p.u.z = r.real();
    p.rho = r.real();
    return p;
}

}  // namespace

std::string serialize(const PolyConfig& cfg) {
    std::ostringstream os;
    os << "pmf-config " << kSerializationVersion << "\n";
    os << "vertices " << cfg.vertices.size() << "\n";
    for (const auto& v : cfg.vertices)
        os << fmt(v.p.x) << " " << fmt(v.p.y) << " " << fmt(v.p.z) << " " << v.boundary << " " << v.corner << "\n";
    os << "faces " << cfg.faces.size() << "\n";
    for (const auto& f : cfg.faces) {
        os << static_cast<int>(f.tag.kind) << " " << key_str(f.tag.key) << " " << plane_str(f.poly.plane) << " "
           << f.outerIds.size();
        for (int id : f.outerIds) os << " " << id;
        os << " " << f.holeIds.size();
        for (const auto& h : f.holeIds) {
            os << " " << h.size();
            for (int id : h) os << " " << id;
        }
        os << "\n";
    }
    os << "internal_edges " << cfg.internalEdges.size() << "\n";
    for (const auto& e : cfg.internalEdges)
        os << e.v0 << " " << e.v1 << " " << e.f0 << " " << e.f1 << " " << fmt(e.wedge) << " " << fmt(e.length) << "\n";
    os << "boundary_edges " << cfg.boundaryEdges.size() << "\n";
    for (const auto& e : cfg.boundaryEdges) os << e.v0 << " " << e.v1 << " " << e.face << " " << e.facet << "\n";
    return os.str();
}

PolyConfig deserialize(const std::string& text) {
    Reader r(text);
    r.expect("pmf-config");
    if (r.integer() != kSerializationVersion) throw InputError("deserialize: unsupported version");
    PolyConfig cfg;
    r.expect("vertices");
    size_t nv = r.count();
    for (size_t i = 0; i < nv; ++i) {
        CfgVertex v;
        v.p.x = r.real();
        v.p.y = r.real();
        v.p.z = r.real();
        v.boundary = r.integer() != 0;
        v.corner = r.integer() != 0;
        cfg.vertices.push_back(v);
    }
    auto vid = [&](long id) {
        if (id < 0 || id >= static_cast<long>(nv)) throw InputError("deserialize: vertex index out of range");
        return static_cast<int>(id);
    };
    r.expect("faces");
    size_t nf = r.count();
    for (size_t i = 0; i < nf; ++i) {
        Face f;
        long kind = r.integer();
        if (kind < 0 || kind > 4) throw InputError("deserialize: bad face kind");
        f.tag.kind = static_cast<BirthKind>(kind);
        f.tag.key = parse_key(r.word());
        Plane p = read_plane(r);
        f.poly = make_polygon_frame(p);
        size_t no = r.count();
        for (size_t k = 0; k < no; ++k) f.outerIds.push_back(vid(r.integer()));
        size_t nh = r.count();
        for (size_t h = 0; h < nh; ++h) {
            size_t n = r.count();
            std::vector<int> c;
            for (size_t k = 0; k < n; ++k) c.push_back(vid(r.integer()));
            f.holeIds.push_back(c);
        }
        for (int id : f.outerIds) f.poly.outer.push_back(f.poly.to2d(cfg.vertices[id].p));
        for (const auto& h : f.holeIds) {
            std::vector<Vec2> c;
            for (int id : h) c.push_back(f.poly.to2d(cfg.vertices[id].p));
            f.poly.holes.push_back(c);
        }
        cfg.faces.push_back(std::move(f));
    }
    auto fid = [&](long id) {
        if (id < 0 || id >= static_cast<long>(nf)) throw InputError("deserialize: face index out of range");
        return static_cast<int>(id);
    };
    r.expect("internal_edges");
    size_t ni = r.count();
    for (size_t i = 0; i < ni; ++i) {
        InternalEdge e;
        e.v0 = vid(r.integer());
        e.v1 = vid(r.integer());
        e.f0 = fid(r.integer());
        e.f1 = fid(r.integer());
        e.wedge = r.real();
        e.length = r.real();
        cfg.internalEdges.push_back(e);
    }
    r.expect("boundary_edges");
    size_t nb = r.count();
    for (size_t i = 0; i < nb; ++i) {
        BoundaryEdge e;
        e.v0 = vid(r.integer());
        e.v1 = vid(r.integer());
        e.face = fid(r.integer());
        e.facet = static_cast<int>(r.integer());
        cfg.boundaryEdges.push_back(e);
    }
    return cfg;
}

std::string serialize_entries(const EntrySet& es) {
    std::ostringstream os;
    os << "pmf-entries " << kSerializationVersion << "\n" << es.size() << "\n";
    for (const auto& e : es) {
        os << (e.kind == EntryKind::IA ? "IA" : "IE") << " " << fmt(e.time) << " " << fmt(e.location.x) << " "
           << fmt(e.location.y) << " " << fmt(e.location.z) << " " << e.planes.size();
        for (const auto& p : e.planes) os << " " << plane_str(p);
        os << "\n";
    }
    return os.str();
}

EntrySet deserialize_entries(const std::string& text) {
    Reader r(text);
    r.expect("pmf-entries");
    if (r.integer() != kSerializationVersion) throw InputError("deserialize_entries: unsupported version");
    size_t n = r.count();
    EntrySet out;
    for (size_t i = 0; i < n; ++i) {
        EntryEvent e;
        std::string k = r.word();
        if (k == "IA")
            e.kind = EntryKind::IA;
        else if (k == "IE")
            e.kind = EntryKind::IE;
        else
            throw InputError("deserialize_entries: bad kind '" + k + "'");
        e.time = r.real();
        e.location.x = r.real();
        e.location.y = r.real();
        e.location.z = r.real();
        size_t np = r.count();
        for (size_t j = 0; j < np; ++j) e.planes.push_back(read_plane(r));
        out.push_back(e);
    }
    return out;
}

}  // namespace pmf
