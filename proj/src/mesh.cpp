#include "pmf/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

namespace pmf {

namespace {

double orient(const Vec2& a, const Vec2& b, const Vec2& c) { return cross(b - a, c - a); }

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    double o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
    return ((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0));
}

bool strictly_inside(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
    return orient(a, b, p) > 0 && orient(b, c, p) > 0 && orient(c, a, p) > 0;
}

// Whether q lies in the interior angle at b of a counter-clockwise chain a -> b -> c.
bool in_cone(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& q) {
    if (orient(a, b, c) >= 0) return orient(b, c, q) > 0 && orient(a, b, q) > 0;
    return !(orient(b, c, q) <= 0 && orient(a, b, q) <= 0);
}

}  // namespace

std::vector<std::array<int, 3>> triangulate(const std::vector<Vec2>& outer, const std::vector<std::vector<Vec2>>& holes) {
    std::vector<Vec2> pts = outer;
    std::vector<int> poly(outer.size());
    std::iota(poly.begin(), poly.end(), 0);
    if (signed_area(outer) < 0) std::reverse(poly.begin(), poly.end());
    std::vector<std::vector<int>> hs;
    for (const auto& h : holes) {
        std::vector<int> ids;
        for (const auto& p : h) {
            ids.push_back(static_cast<int>(pts.size()));
            pts.push_back(p);
        }
        if (signed_area(h) > 0) std::reverse(ids.begin(), ids.end());
        if (ids.size() >= 3) hs.push_back(ids);
    }
    auto max_x = [&](const std::vector<int>& h) {
        return std::max_element(h.begin(), h.end(), [&](int a, int b) { return pts[a].x < pts[b].x; }) - h.begin();
    };
    std::sort(hs.begin(), hs.end(), [&](const auto& a, const auto& b) { return pts[a[max_x(a)]].x > pts[b[max_x(b)]].x; });

    for (std::size_t hi = 0; hi < hs.size(); ++hi) {
        const auto& h = hs[hi];
        std::size_t m = static_cast<std::size_t>(max_x(h));
        const Vec2 M = pts[h[m]];
        std::vector<std::size_t> order(poly.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return norm(pts[poly[a]] - M) < norm(pts[poly[b]] - M); });
        auto blocked = [&](const std::vector<int>& ring, const Vec2& P) {
            for (std::size_t k = 0; k < ring.size(); ++k)
                if (segments_cross(M, P, pts[ring[k]], pts[ring[(k + 1) % ring.size()]])) return true;
            return false;
        };
        std::size_t bridge = order.empty() ? 0 : order[0];
        for (std::size_t j : order) {
            const Vec2 P = pts[poly[j]];
            const Vec2 prev = pts[poly[(j + poly.size() - 1) % poly.size()]];
            const Vec2 next = pts[poly[(j + 1) % poly.size()]];
            if (!in_cone(prev, P, next, M) || blocked(poly, P)) continue;
            bool clear = true;
            for (std::size_t o = hi; o < hs.size() && clear; ++o) clear = !blocked(hs[o], P);
            if (!clear) continue;
            bridge = j;
            break;
        }
        std::vector<int> merged(poly.begin(), poly.begin() + static_cast<std::ptrdiff_t>(bridge) + 1);
        for (std::size_t k = 0; k <= h.size(); ++k) merged.push_back(h[(m + k) % h.size()]);
        merged.push_back(poly[bridge]);
        merged.insert(merged.end(), poly.begin() + static_cast<std::ptrdiff_t>(bridge) + 1, poly.end());
        poly = std::move(merged);
    }

    std::vector<std::array<int, 3>> tris;
    while (poly.size() > 3) {
        const std::size_t n = poly.size();
        std::size_t ear = n, best = 0;
        double bestTurn = -1e300;
        for (std::size_t i = 0; i < n && ear == n; ++i) {
            int a = poly[(i + n - 1) % n], b = poly[i], c = poly[(i + 1) % n];
            double turn = orient(pts[a], pts[b], pts[c]);
            if (turn > bestTurn) {
                bestTurn = turn;
                best = i;
            }
            if (turn <= 0) continue;
            bool empty = true;
            for (std::size_t k = 0; k < n && empty; ++k) {
                const Vec2& q = pts[poly[k]];
                if (q == pts[a] || q == pts[b] || q == pts[c]) continue;
                empty = !strictly_inside(q, pts[a], pts[b], pts[c]);
            }
            if (empty) ear = i;
        }
        if (ear == n) ear = best;
        tris.push_back({poly[(ear + n - 1) % n], poly[ear], poly[(ear + 1) % n]});
        poly.erase(poly.begin() + static_cast<std::ptrdiff_t>(ear));
    }
    if (poly.size() == 3) tris.push_back({poly[0], poly[1], poly[2]});
    return tris;
}

Mesh build_mesh(const PolyConfig& cfg, double eps) {
    Mesh m;
    std::vector<int> remap(cfg.vertices.size(), -1);
    auto id_of = [&](int v) {
        if (remap[v] >= 0) return remap[v];
        const Vec3& p = cfg.vertices[v].p;
        for (std::size_t k = 0; k < m.vertices.size(); ++k)
            if (norm(m.vertices[k] - p) <= eps) return remap[v] = static_cast<int>(k);
        m.vertices.push_back(p);
        return remap[v] = static_cast<int>(m.vertices.size() - 1);
    };
    auto ring = [&](const std::vector<int>& ids) {
        std::vector<int> out;
        for (int v : ids) {
            int k = id_of(v);
            if (out.empty() || out.back() != k) out.push_back(k);
        }
        while (out.size() > 1 && out.front() == out.back()) out.pop_back();
        return out;
    };
    for (const auto& f : cfg.faces) {
        std::vector<int> outer = ring(f.outerIds);
        if (f.holeIds.empty()) {
            if (outer.size() >= 3) m.faces.push_back(outer);
            continue;
        }
        std::vector<int> all = outer;
        std::vector<Vec2> o2;
        for (int k : outer) o2.push_back(f.poly.to2d(m.vertices[k]));
        std::vector<std::vector<Vec2>> h2;
        for (const auto& h : f.holeIds) {
            std::vector<Vec2> hp;
            for (int k : ring(h)) {
                all.push_back(k);
                hp.push_back(f.poly.to2d(m.vertices[k]));
            }
            h2.push_back(hp);
        }
        for (const auto& t : triangulate(o2, h2)) m.faces.push_back({all[t[0]], all[t[1]], all[t[2]]});
    }
    return m;
}

std::string write_obj(const Mesh& m, const std::vector<std::string>& comments) {
    std::string out;
    for (const auto& c : comments) out += "# " + c + "\n";
    char buf[128];
    for (const auto& v : m.vertices) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
        out += buf;
    }
    for (const auto& f : m.faces) {
        out += "f";
        for (int k : f) out += " " + std::to_string(k + 1);
        out += "\n";
    }
    return out;
}

}  // namespace pmf
