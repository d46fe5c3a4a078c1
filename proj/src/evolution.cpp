#include "pmf/evolution.hpp"

#include <algorithm>
#include <sstream>

#include "pmf/stochgeom.hpp"

namespace pmf {

namespace {

enum Tag : std::uint64_t {
    kTagPackage = 0x7001,
    kTagItFrame,
    kTagItFace,
    kTagIaCand,
    kTagIaFrame,
    kTagIaFace,
    kTagNode,
    kTagNode2,
    kTagIeClock,
    kTagIePlane,
    kTagIeFace,
    kTagEntry,
    kTagFacet,
    kTagForced,
};

inline Vec2 sp2(const Vec3& x) { return {x.y, x.z}; }

std::uint64_t rotl(std::uint64_t v, int r) { return (v << r) | (v >> (64 - r)); }

}  // namespace

Sweep::Sweep(const Domain& d, const ResolveOptions& opt) : d_(d), opt_(opt) {
    tol_ = 1e-9 * (1.0 + d.diameter);
    tolT_ = 1e-12 * (1.0 + d.diameter);
    now_ = d.tmin();
    tEnd_ = d.tmax();
    for (int i = 0; i < static_cast<int>(d.facets.size()); ++i) {
        const auto& f = d.facets[i];
        Plane p = plane_through(d.vertices[f.cycle[0]], f.hs.n);
        int id = add_plane_internal(p, FaceTag{}, true, i);
        planes_[id].outward = f.hs.n;
        planes_[id].key = split_key(Key{0x66616365ull, 0x74ull}, kTagFacet, static_cast<std::uint64_t>(i));
        facetPlane_.push_back(id);
        if (planes_[id].horizontal && f.hs.n.x > 0) topFacet_ = i;
    }
    facetNeighbors_.resize(d.facets.size());
    for (const auto& e : d.edges) {
        facetNeighbors_[e.f0].push_back(e.f1);
        facetNeighbors_[e.f1].push_back(e.f0);
    }
}

int Sweep::add_plane_internal(const Plane& p, const FaceTag& tag, bool facet, int facetIndex) {
    PlaneRec r;
    r.plane = p;
    r.outward = p.u;
    r.facet = facet;
    r.facetIndex = facetIndex;
    r.tag = tag;
    r.key = tag.key;
    Vec2 ns{p.u.y, p.u.z};
    double len = norm(ns);
    if (len < kEpsGeom) {
        if (!facet) throw DegeneracyError("face plane parallel to the spatial slice");
        r.horizontal = true;
    } else {
        r.m = ns / len;
        r.dir = perp(r.m);
    }
    planes_.push_back(r);
    planeSegs_.emplace_back();
    planeNodes_.emplace_back();
    return static_cast<int>(planes_.size()) - 1;
}

int Sweep::add_face_plane(const Plane& p, const FaceTag& tag) {
    for (const auto& q : planes_) {
        if (norm(q.plane.u - p.u) < kEpsGeom && std::abs(q.plane.rho - p.rho) < tol_)
            throw DegeneracyError("coplanar faces");
    }
    return add_plane_internal(p, tag, false, -1);
}

void Sweep::log_stream(const RngStream& s) const {
    if (opt_.drawLog) opt_.drawLog->push_back({s.key(), s.counter()});
}

void Sweep::setup_face(int id) {
    auto& rec = planes_[id];
    if (!opt_.spontaneousBirths) return;
    auto sec = intersect_plane_domain(rec.plane, d_);
    if (!sec) return;
    RngStream r(split_key(rec.key, kTagIaCand));
    std::uint64_t n = r.poisson(kIntensityPair * sec->poly.area());
    Vec2 lo = sec->poly.outer[0], hi = lo;
    for (const auto& q : sec->poly.outer) {
        lo = {std::min(lo.x, q.x), std::min(lo.y, q.y)};
        hi = {std::max(hi.x, q.x), std::max(hi.y, q.y)};
    }
    std::vector<Vec3> pts;
    while (pts.size() < n) {
        Vec2 q{r.uniform(lo.x, hi.x), r.uniform(lo.y, hi.y)};
        if (point_in_cycle(sec->poly.outer, q)) pts.push_back(sec->poly.to3d(q));
    }
    log_stream(r);
    std::sort(pts.begin(), pts.end(), [](const Vec3& a, const Vec3& b) { return a.x < b.x; });
    rec.iaCand = std::move(pts);
    rec.iaNext = 0;
    while (rec.iaNext < rec.iaCand.size() && rec.iaCand[rec.iaNext].x <= now_) ++rec.iaNext;
    requeue_ia(id);
}

std::array<int, 3> Sweep::sorted3(int a, int b, int c) {
    std::array<int, 3> k{a, b, c};
    std::sort(k.begin(), k.end());
    return k;
}

std::optional<Vec3> Sweep::triple(int a, int b, int c) const {
    auto k = sorted3(a, b, c);
    auto it = tripleCache_.find(k);
    if (it != tripleCache_.end()) return it->second;
    std::optional<Vec3> r;
    try {
        r = triple_point(planes_[k[0]].plane, planes_[k[1]].plane, planes_[k[2]].plane);
    } catch (const DegeneracyError&) {
        r.reset();
    }
    tripleCache_[k] = r;
    return r;
}

Sweep::LineInfo Sweep::line_info(int a, int b) const {
    Vec3 d = cross(planes_[a].plane.u, planes_[b].plane.u);
    double len = norm(d);
    if (len < kEpsGeom || std::abs(d.x) < kEpsGeom * len) throw DegeneracyError("edge line parallel to the spatial slice");
    if (d.x < 0) d = -d;
    return LineInfo{Vec2{d.y / d.x, d.z / d.x}, d / len};
}

Vec2 Sweep::node_pos(const Node& n, double t) const { return n.pos0 + n.vel * (t - n.t0); }

void Sweep::inject_polygon(double t, const std::vector<int>& pl) {
    const int k = static_cast<int>(pl.size());
    now_ = t;
    std::vector<int> ids(k);
    for (int i = 0; i < k; ++i) {
        int a = pl[i], b = pl[(i + 1) % k];
        auto ea = section_of(planes_[a].plane, t), eb = section_of(planes_[b].plane, t);
        double det = cross(ea.normal, eb.normal);
        if (std::abs(det) < kEpsGeom) throw DegeneracyError("inject_polygon: parallel sides");
        Vec2 p{(ea.offset * eb.normal.y - eb.offset * ea.normal.y) / det,
               (ea.normal.x * eb.offset - eb.normal.x * ea.offset) / det};
        Node n;
        n.p = std::min(a, b);
        n.q = std::max(a, b);
        auto li = line_info(n.p, n.q);
        n.pos0 = p;
        n.t0 = t;
        n.vel = li.vel;
        n.dir3 = li.dir3;
        n.startVertex = static_cast<int>(verts_.size());
        verts_.push_back({Vec3{t, p.x, p.y}, 0});
        ids[i] = static_cast<int>(nodes_.size());
        pairNode_[{n.p, n.q}] = ids[i];
        planeNodes_[n.p].push_back(ids[i]);
        planeNodes_[n.q].push_back(ids[i]);
        nodes_.push_back(n);
    }
    for (int i = 0; i < k; ++i) {
        int a0 = ids[(i + k - 1) % k], a1 = ids[i];
        int plane = pl[i];
        int s = static_cast<int>(segs_.size());
        segs_.push_back({plane, a0, a1, true});
        planeSegs_[plane].push_back(s);
        double c0 = coord(plane, nodes_[a0].pos0), c1 = coord(plane, nodes_[a1].pos0);
        for (int end = 0; end < 2; ++end) {
            Node& n = nodes_[end == 0 ? a0 : a1];
            double sign = (end == 0) == (c1 > c0) ? 1.0 : -1.0;
            Vec2 dir = planes_[plane].dir * sign;
            if (n.p == plane) {
                n.segP = s;
                n.sp = dir;
            } else {
                n.segQ = s;
                n.sq = dir;
            }
        }
    }
    for (int id : ids) candidates_for_node(id);
    for (int s = static_cast<int>(segs_.size()) - k; s < static_cast<int>(segs_.size()); ++s) candidates_for_segment(s);
}

void Sweep::push_candidate(int a, int b, int c, int kind, int i, int j) {
    auto key = sorted3(a, b, c);
    if (key[0] == key[1] || key[1] == key[2]) return;
    if (processed_.count(key)) return;
    if (planes_[key[0]].facet && planes_[key[1]].facet && planes_[key[2]].facet) return;
    auto x = triple(a, b, c);
    if (!x) return;
    double t = x->x;
    if (t < now_ - tolT_ || t >= tEnd_ - tolT_) return;
    if (d_.slack(*x) > tol_) return;
    if (kind == 1) {
        const auto& sg = segs_[j];
        int r = sg.plane;
        double sx = coord(r, sp2(*x));
        double s0 = coord(r, node_pos(nodes_[sg.n0], t));
        double s1 = coord(r, node_pos(nodes_[sg.n1], t));
        if (!(sx > std::min(s0, s1) + tol_ && sx < std::max(s0, s1) - tol_)) return;
    }
    heap_.push(Cand{t, key, *x, kind, i, j});
}

bool Sweep::candidate_valid(const Cand& c) const {
    if (c.t < now_ - tolT_) return false;
    if (processed_.count(c.key)) return false;
    switch (c.kind) {
    case 0: return segs_[c.a].alive;
    case 1: return nodes_[c.a].alive && segs_[c.b].alive;
    case 2: return nodes_[c.a].alive && nodes_[c.b].alive;
    default: return nodes_[c.a].alive;
    }
}

void Sweep::candidates_for_node(int id) {
    const Node& n = nodes_[id];
    for (int pl : {n.p, n.q}) {
        for (int o : planeNodes_[pl]) {
            if (o == id) continue;
            const Node& m = nodes_[o];
            push_candidate(pl, n.p == pl ? n.q : n.p, m.p == pl ? m.q : m.p, 2, std::min(id, o), std::max(id, o));
        }
    }
    if (n.boundary) {
        int f = planes_[n.q].facetIndex;
        for (int g : facetNeighbors_[f]) {
            int gp = facetPlane_[g];
            if (!planes_[gp].horizontal) push_candidate(n.p, n.q, gp, 4, id, -1);
        }
        return;
    }
    for (int gp : facetPlane_)
        if (!planes_[gp].horizontal) push_candidate(n.p, n.q, gp, 3, id, -1);
    for (int r = 0; r < static_cast<int>(planes_.size()); ++r) {
        if (planes_[r].facet || r == n.p || r == n.q) continue;
        for (int s : planeSegs_[r]) push_candidate(n.p, n.q, r, 1, id, s);
    }
}

void Sweep::candidates_for_segment(int id) {
    const Segment& sg = segs_[id];
    auto other = [&](const Node& n) { return n.p == sg.plane ? n.q : n.p; };
    push_candidate(sg.plane, other(nodes_[sg.n0]), other(nodes_[sg.n1]), 0, id, -1);
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
        const Node& n = nodes_[i];
        if (!n.alive || n.boundary || n.p == sg.plane || n.q == sg.plane) continue;
        push_candidate(n.p, n.q, sg.plane, 1, i, id);
    }
}

void Sweep::kill_node(int id) {
    Node& n = nodes_[id];
    n.alive = false;
    pairNode_.erase({std::min(n.p, n.q), std::max(n.p, n.q)});
    for (int pl : {n.p, n.q}) {
        auto& ln = planeNodes_[pl];
        ln.erase(std::remove(ln.begin(), ln.end(), id), ln.end());
    }
    ieQueue_.erase({n.ieTime, id});
}

void Sweep::kill_segment(int id) {
    segs_[id].alive = false;
    auto& ls = planeSegs_[segs_[id].plane];
    ls.erase(std::remove(ls.begin(), ls.end(), id), ls.end());
}

void Sweep::requeue_ia(int plane) {
    const auto& r = planes_[plane];
    if (r.iaNext < r.iaCand.size()) iaQueue_.insert({r.iaCand[r.iaNext].x, plane});
}

std::optional<SweepEvent> Sweep::next_kinematic_event() const {
    while (!heap_.empty() && !candidate_valid(heap_.top())) heap_.pop();
    if (heap_.empty()) return std::nullopt;
    Cand best = heap_.top();
    heap_.pop();
    std::vector<Cand> held;
    while (!heap_.empty() && heap_.top().t - best.t <= tolT_) {
        Cand c = heap_.top();
        heap_.pop();
        if (!candidate_valid(c)) continue;
        held.push_back(c);
        if (c.key == best.key) continue;
        for (int a : best.key)
            for (int b : c.key)
                if (a == b && !planes_[a].facet) {
                    heap_.push(best);
                    for (const auto& h : held) heap_.push(h);
                    throw DegeneracyError("simultaneous events within tie tolerance");
                }
    }
    heap_.push(best);
    for (const auto& h : held) heap_.push(h);
    SweepEvent e;
    e.kind = EventKind::Kinematic;
    e.time = best.t;
    e.point = best.x;
    e.planes = best.key;
    return e;
}

void Sweep::prepare() {
    if (sorted_) return;
    std::sort(packages_.begin(), packages_.end(), [](const BirthPackage& a, const BirthPackage& b) {
        if (a.site.x != b.site.x) return a.site.x < b.site.x;
        if (a.site.y != b.site.y) return a.site.y < b.site.y;
        if (a.site.z != b.site.z) return a.site.z < b.site.z;
        return a.streamKey < b.streamKey;
    });
    std::sort(forced_.begin(), forced_.end(),
              [](const ForcedBirth& a, const ForcedBirth& b) { return a.site.x < b.site.x; });
    std::stable_sort(entries_.begin(), entries_.end(),
                     [](const EntryEvent& a, const EntryEvent& b) { return a.time < b.time; });
    sorted_ = true;
}

SweepEvent Sweep::next_event() const {
    SweepEvent best;
    best.kind = EventKind::End;
    best.time = tEnd_;
    auto offer = [&](const SweepEvent& e) {
        if (e.time < best.time) best = e;
    };
    if (auto k = next_kinematic_event()) offer(*k);
    if (nextPackage_ < packages_.size()) {
        SweepEvent e;
        e.kind = EventKind::IT;
        e.time = packages_[nextPackage_].site.x;
        e.index = static_cast<int>(nextPackage_);
        offer(e);
    }
    if (nextForced_ < forced_.size()) {
        SweepEvent e;
        e.kind = EventKind::IT;
        e.time = forced_[nextForced_].site.x;
        e.index = static_cast<int>(nextForced_);
        e.aux = 1;
        offer(e);
    }
    if (nextEntry_ < entries_.size()) {
        SweepEvent e;
        e.kind = EventKind::Entry;
        e.time = entries_[nextEntry_].time;
        e.index = static_cast<int>(nextEntry_);
        offer(e);
    }
    if (!iaQueue_.empty()) {
        SweepEvent e;
        e.kind = EventKind::IA;
        e.time = iaQueue_.begin()->first;
        e.index = iaQueue_.begin()->second;
        e.aux = static_cast<int>(planes_[e.index].iaNext);
        offer(e);
    }
    if (!ieQueue_.empty()) {
        SweepEvent e;
        e.kind = EventKind::IE;
        e.time = ieQueue_.begin()->first;
        e.index = ieQueue_.begin()->second;
        offer(e);
    }
    return best;
}

void Sweep::step(const SweepEvent& e) {
    switch (e.kind) {
    case EventKind::Kinematic:
        now_ = e.time;
        process_triple(e.planes, e.point, false);
        break;
    case EventKind::IT: {
        now_ = e.time;
        if (e.aux == 1) {
            const auto& b = forced_[e.index];
            ++nextForced_;
            std::array<Key, 3> keys;
            for (int i = 0; i < 3; ++i)
                keys[i] = split_key(Key{}, kTagForced, static_cast<std::uint64_t>(e.index), static_cast<std::uint64_t>(i));
            fire_it(b.site, b.planes, keys);
        } else {
            const auto& pk = packages_[e.index];
            ++nextPackage_;
            RngStream r(split_key(pk.streamKey, kTagItFrame));
            auto f = sample_vertex_frame(r);
            log_stream(r);
            std::array<Plane, 3> pl{plane_through(pk.site, f.n1), plane_through(pk.site, f.n2),
                                    plane_through(pk.site, f.n3)};
            std::array<Key, 3> keys;
            for (int i = 0; i < 3; ++i) keys[i] = split_key(pk.streamKey, kTagItFace, static_cast<std::uint64_t>(i));
            fire_it(pk.site, pl, keys);
        }
        break;
    }
    case EventKind::IA:
        now_ = e.time;
        fire_ia(e.index, static_cast<size_t>(e.aux));
        break;
    case EventKind::IE:
        now_ = e.time;
        fire_ie(e.index);
        break;
    case EventKind::Entry:
        now_ = e.time;
        ++nextEntry_;
        fire_entry(entries_[e.index], static_cast<size_t>(e.index));
        break;
    case EventKind::End:
        now_ = e.time;
        finish();
        break;
    }
}

void Sweep::run() {
    prepare();
    long guard = 0;
    while (!finished_) {
        if (++guard > 5000000) throw DegeneracyError("sweep did not terminate");
        step(next_event());
    }
}

int Sweep::live_segments() const {
    int c = 0;
    for (const auto& s : segs_) c += s.alive;
    return c;
}

void Sweep::process_triple(const std::array<int, 3>& tri, const Vec3& x, bool entry) {
    const double tau = x.x;
    const Vec2 xs = sp2(x);
    int nf = 0;
    for (int p : tri) nf += planes_[p].facet;
    const int v = static_cast<int>(verts_.size());
    verts_.push_back({x, nf == 0 ? 0 : (nf == 1 ? 1 : 2)});

    struct PairInfo {
        int a, b;
        bool facetPair = false;
        int past = -1;
        bool future = false;
        int newNode = -1;
    };
    std::array<PairInfo, 3> pairs{PairInfo{tri[0], tri[1]}, PairInfo{tri[0], tri[2]}, PairInfo{tri[1], tri[2]}};
    for (auto& pr : pairs) {
        if (planes_[pr.a].facet && planes_[pr.b].facet) {
            pr.facetPair = true;
            continue;
        }
        auto it = pairNode_.find({std::min(pr.a, pr.b), std::max(pr.a, pr.b)});
        if (it != pairNode_.end()) {
            const Node& n = nodes_[it->second];
            if (norm(node_pos(n, tau) - xs) > 100 * tol_) throw DegeneracyError("node not at event point");
            pr.past = it->second;
        }
        pr.future = pr.past < 0;
    }
    auto pairOf = [&](int a, int b) -> PairInfo& {
        for (auto& pr : pairs)
            if ((pr.a == a && pr.b == b) || (pr.a == b && pr.b == a)) return pr;
        throw DegeneracyError("pair lookup");
    };
    auto isPast = [&](int nid) {
        for (auto& pr : pairs)
            if (pr.past == nid) return true;
        return false;
    };
    auto fail = [&](const std::string& msg) {
        if (entry) throw InputError("entry event rejected: " + msg);
        throw DegeneracyError(msg);
    };

    struct End {
        bool isNew;
        int id;
    };
    struct Run {
        int plane;
        End left, right;
    };
    std::vector<Run> runs;
    std::vector<int> involved;

    for (int P : tri) {
        if (planes_[P].facet) continue;
        int Q = -1, R = -1;
        for (int o : tri)
            if (o != P) (Q < 0 ? Q : R) = o;
        const Vec2 dirP = planes_[P].dir;
        double dq = dot(line_info(P, Q).vel, dirP);
        double dr = dot(line_info(P, R).vel, dirP);
        if (std::abs(dq - dr) < 1e-12 * (1.0 + std::abs(dq) + std::abs(dr))) fail("coincident crossing speeds");
        int pastLow = dq > dr ? Q : R;
        int pastHigh = pastLow == Q ? R : Q;
        int futLow = pastHigh, futHigh = pastLow;
        double sx = coord(P, xs);
        bool cov[3] = {false, false, false};
        int farL = -1, farR = -1;
        auto mark = [&](int part) {
            if (cov[part]) fail("overlapping segments");
            cov[part] = true;
        };
        for (int sid : planeSegs_[P]) {
            const Segment& s = segs_[sid];
            bool atA = isPast(s.n0), atB = isPast(s.n1);
            if (atA && atB) {
                mark(1);
            } else if (atA || atB) {
                int atId = atA ? s.n0 : s.n1;
                int farId = atA ? s.n1 : s.n0;
                const Node& at = nodes_[atId];
                int X = at.p == P ? at.q : at.p;
                double ds = coord(P, node_pos(nodes_[farId], tau)) - sx;
                if (std::abs(ds) <= tol_) fail("segment of vanishing length");
                if (X == pastLow) {
                    if (ds > 0) {
                        mark(1);
                        mark(2);
                        farR = farId;
                    } else {
                        mark(0);
                        farL = farId;
                    }
                } else {
                    if (ds > 0) {
                        mark(2);
                        farR = farId;
                    } else {
                        mark(0);
                        mark(1);
                        farL = farId;
                    }
                }
            } else {
                double s0 = coord(P, node_pos(nodes_[s.n0], tau));
                double s1 = coord(P, node_pos(nodes_[s.n1], tau));
                double lo = std::min(s0, s1), hi = std::max(s0, s1);
                if (sx > lo + tol_ && sx < hi - tol_) {
                    mark(0);
                    mark(1);
                    mark(2);
                    farL = s0 < s1 ? s.n0 : s.n1;
                    farR = s0 < s1 ? s.n1 : s.n0;
                } else if (std::abs(sx - lo) <= tol_ || std::abs(sx - hi) <= tol_) {
                    fail("event point at a foreign segment end");
                } else {
                    continue;
                }
            }
            involved.push_back(sid);
        }
        bool pastLowNode = pairOf(P, pastLow).past >= 0;
        bool pastHighNode = pairOf(P, pastHigh).past >= 0;
        if (cov[1] != (cov[0] != pastLowNode) || cov[2] != (cov[1] != pastHighNode))
            fail("inconsistent occupancy before event");
        bool fut[3];
        fut[0] = cov[0];
        fut[1] = cov[0] != pairOf(P, futLow).future;
        fut[2] = cov[2];
        if (fut[2] != (fut[1] != pairOf(P, futHigh).future)) fail("inconsistent occupancy after event");
        for (int X : {Q, R}) {
            if (!planes_[X].facet) continue;
            Vec2 ns{planes_[X].outward.y, planes_[X].outward.z};
            double sg = dot(ns, dirP);
            if (std::abs(sg) < kEpsGeom) fail("face line parallel to a facet line");
            bool low = X == futLow;
            bool outsideAbove = sg > 0;
            for (int part = 0; part < 3; ++part) {
                bool above = low ? part >= 1 : part >= 2;
                if (fut[part] && above == outsideAbove) fail("face leaves the domain");
            }
        }
        int boundaryPlane[2] = {futLow, futHigh};
        for (int i = 0; i < 3; ++i) {
            if (!fut[i] || (i > 0 && fut[i - 1])) continue;
            int j = i;
            while (j < 2 && fut[j + 1]) ++j;
            Run run;
            run.plane = P;
            if (i == 0) {
                if (farL < 0) fail("missing far endpoint");
                run.left = {false, farL};
            } else {
                auto& pr = pairOf(P, boundaryPlane[i - 1]);
                if (!pr.future) fail("run ends without a node");
                run.left = {true, static_cast<int>(&pr - pairs.data())};
            }
            if (j == 2) {
                if (farR < 0) fail("missing far endpoint");
                run.right = {false, farR};
            } else {
                auto& pr = pairOf(P, boundaryPlane[j]);
                if (!pr.future) fail("run ends without a node");
                run.right = {true, static_cast<int>(&pr - pairs.data())};
            }
            runs.push_back(run);
        }
    }

    for (auto& pr : pairs) {
        if (pr.past < 0) continue;
        const Node& n = nodes_[pr.past];
        edges_.push_back({n.startVertex, v, n.p, n.q, n.boundary});
        kill_node(pr.past);
    }
    for (int sid : involved) kill_segment(sid);
    std::vector<int> created;
    for (auto& pr : pairs) {
        if (pr.facetPair || !pr.future) continue;
        Node n;
        if (planes_[pr.a].facet || planes_[pr.b].facet) {
            n.boundary = true;
            n.p = planes_[pr.a].facet ? pr.b : pr.a;
            n.q = planes_[pr.a].facet ? pr.a : pr.b;
        } else {
            n.p = std::min(pr.a, pr.b);
            n.q = std::max(pr.a, pr.b);
        }
        auto li = line_info(n.p, n.q);
        n.pos0 = xs;
        n.t0 = tau;
        n.vel = li.vel;
        n.dir3 = li.dir3;
        n.startVertex = v;
        int third = -1;
        for (int o : tri)
            if (o != n.p && o != n.q) third = o;
        const Key& ka = planes_[n.p].key;
        const Key& kb = planes_[n.q].key;
        const Key& lo = std::min(ka, kb);
        const Key& hi = std::max(ka, kb);
        Key k1 = split_key(lo, kTagNode, hi.hi, hi.lo);
        n.key = split_key(k1, kTagNode2, planes_[third].key.hi, planes_[third].key.lo);
        pr.newNode = static_cast<int>(nodes_.size());
        pairNode_[{std::min(n.p, n.q), std::max(n.p, n.q)}] = pr.newNode;
        planeNodes_[n.p].push_back(pr.newNode);
        planeNodes_[n.q].push_back(pr.newNode);
        nodes_.push_back(n);
        created.push_back(pr.newNode);
    }
    std::vector<int> newSegs;
    for (const auto& run : runs) {
        int s = static_cast<int>(segs_.size());
        newSegs.push_back(s);
        int l = run.left.isNew ? pairs[run.left.id].newNode : run.left.id;
        int r = run.right.isNew ? pairs[run.right.id].newNode : run.right.id;
        segs_.push_back({run.plane, l, r, true});
        planeSegs_[run.plane].push_back(s);
        for (int end = 0; end < 2; ++end) {
            int nid = end == 0 ? l : r;
            bool isNew = end == 0 ? run.left.isNew : run.right.isNew;
            Node& n = nodes_[nid];
            Vec2 dir = planes_[run.plane].dir * (end == 0 ? 1.0 : -1.0);
            if (n.p == run.plane) {
                if (isNew && n.segP >= 0) fail("node attached twice");
                n.segP = s;
                if (isNew) n.sp = dir;
            } else {
                if (isNew && n.segQ >= 0) fail("node attached twice");
                n.segQ = s;
                if (isNew) n.sq = dir;
            }
        }
    }
    for (int nid : created) {
        const Node& n = nodes_[nid];
        if (n.segP < 0 || (!n.boundary && n.segQ < 0)) fail("new node without segments");
    }
    processed_[tri] = true;
    for (int nid : created) candidates_for_node(nid);
    for (int sid : newSegs) candidates_for_segment(sid);
    for (int nid : created)
        if (!nodes_[nid].boundary) schedule_ie(nid);
}

void Sweep::schedule_ie(int nodeId) {
    if (!opt_.spontaneousBirths) return;
    Node& n = nodes_[nodeId];
    double ang = wedge_angle_sections(n.dir3, Vec3{0, n.sp.x, n.sp.y}, Vec3{0, n.sq.x, n.sq.y});
    double rate = opt_.ieRateFactor * 0.5 * (2.0 * kPi - ang);
    if (!(rate > 0)) return;
    RngStream r(split_key(n.key, kTagIeClock));
    double len = r.exponential() / rate;
    log_stream(r);
    n.iePoint = Vec3{n.t0, n.pos0.x, n.pos0.y} + n.dir3 * len;
    n.ieTime = n.iePoint.x;
    ieQueue_.insert({n.ieTime, nodeId});
}

void Sweep::fire_it(const Vec3& site, const std::array<Plane, 3>& pl, const std::array<Key, 3>& keys) {
    if (!d_.contains(site, -tol_)) throw InputError("birth site outside the domain");
    std::array<int, 3> ids;
    for (int i = 0; i < 3; ++i) ids[i] = add_face_plane(pl[i], FaceTag{BirthKind::IT, keys[i]});
    auto key = sorted3(ids[0], ids[1], ids[2]);
    tripleCache_[key] = site;
    process_triple(key, site, false);
    for (int id : ids) setup_face(id);
}

void Sweep::fire_ia(int plane, size_t j) {
    auto& rec = planes_[plane];
    iaQueue_.erase({rec.iaCand[j].x, plane});
    rec.iaNext = j + 1;
    requeue_ia(plane);
    Vec3 y = rec.iaCand[j];
    double sy = coord(plane, sp2(y));
    bool on = false;
    for (int sid : planeSegs_[plane]) {
        const auto& s = segs_[sid];
        double s0 = coord(plane, node_pos(nodes_[s.n0], y.x));
        double s1 = coord(plane, node_pos(nodes_[s.n1], y.x));
        if (sy > std::min(s0, s1) + tol_ && sy < std::max(s0, s1) - tol_) on = true;
    }
    if (!on) return;
    Key key = rec.key;
    Vec3 n1 = rec.plane.u;
    RngStream r(split_key(key, kTagIaFrame, j));
    auto f = sample_vertex_frame_given(n1, r);
    log_stream(r);
    int b = add_face_plane(plane_through(y, f.n2), FaceTag{BirthKind::IA, split_key(key, kTagIaFace, j, 0)});
    int c = add_face_plane(plane_through(y, f.n3), FaceTag{BirthKind::IA, split_key(key, kTagIaFace, j, 1)});
    auto tri = sorted3(plane, b, c);
    tripleCache_[tri] = y;
    process_triple(tri, y, false);
    setup_face(b);
    setup_face(c);
}

void Sweep::fire_ie(int nodeId) {
    const Node n = nodes_[nodeId];
    Vec3 x = n.iePoint;
    auto motion = [&](int p) {
        auto me = section_of(planes_[p].plane, x.x);
        return EdgeMotion{me.normal, me.velocity};
    };
    EdgeMotion e1 = motion(n.p), e2 = motion(n.q);
    RngStream r(split_key(n.key, kTagIePlane));
    Plane c;
    bool found = false;
    for (int it = 0; it < 100000 && !found; ++it) {
        Vec3 nn = sample_line_normal(n.dir3, r);
        if (std::abs(nn.y) + std::abs(nn.z) < 1e-6) continue;
        c = plane_through(x, nn);
        auto me = section_of(c, x.x);
        found = stable_ie(e1, n.sp, e2, n.sq, EdgeMotion{me.normal, me.velocity});
    }
    log_stream(r);
    if (!found) throw DegeneracyError("no stable IE direction found");
    int id = add_face_plane(c, FaceTag{BirthKind::IE, split_key(n.key, kTagIeFace)});
    auto tri = sorted3(n.p, n.q, id);
    tripleCache_[tri] = x;
    process_triple(tri, x, false);
    setup_face(id);
}

void Sweep::fire_entry(const EntryEvent& e, size_t index) {
    const Vec3& x = e.location;
    if (std::abs(x.x - e.time) > tol_) throw InputError("entry time does not match its location");
    std::vector<int> on;
    for (int f = 0; f < static_cast<int>(d_.facets.size()); ++f) {
        const auto& h = d_.facets[f].hs;
        double s = dot(h.n, x) - h.b;
        if (s > 10 * tol_) throw InputError("entry location outside the domain");
        if (std::abs(s) <= 10 * tol_) on.push_back(f);
    }
    size_t want = e.kind == EntryKind::IA ? 1 : 2;
    size_t nplanes = e.kind == EntryKind::IA ? 2 : 1;
    if (on.size() != want) throw InputError("entry location is not on the required boundary cell");
    if (e.planes.size() != nplanes) throw InputError("entry carries the wrong number of planes");
    for (int f : on)
        if (planes_[facetPlane_[f]].horizontal) throw InputError("entry on a facet parallel to the spatial slice");
    for (const auto& p : e.planes)
        if (std::abs(p.eval(x)) > 10 * tol_) throw InputError("entry plane does not pass through its location");
    Key ek = split_key(Key{0x656e747279ull, 0}, kTagEntry, double_bits(e.time),
                       double_bits(x.y) ^ rotl(double_bits(x.z), 23));
    (void)index;
    BirthKind kind = e.kind == EntryKind::IA ? BirthKind::EntryIA : BirthKind::EntryIE;
    std::vector<int> ids;
    for (size_t i = 0; i < e.planes.size(); ++i) {
        Plane p = plane_through(x, e.planes[i].u);
        try {
            ids.push_back(add_face_plane(p, FaceTag{kind, split_key(ek, i)}));
        } catch (const DegeneracyError&) {
            throw InputError("entry plane coincides with an existing face");
        }
    }
    std::array<int, 3> tri;
    if (e.kind == EntryKind::IA)
        tri = sorted3(facetPlane_[on[0]], ids[0], ids[1]);
    else
        tri = sorted3(ids[0], facetPlane_[on[0]], facetPlane_[on[1]]);
    tripleCache_[tri] = x;
    try {
        process_triple(tri, x, true);
    } catch (const DegeneracyError& err) {
        throw InputError(std::string("entry event rejected: ") + err.what());
    }
    for (int id : ids) setup_face(id);
}

void Sweep::finish() {
    finished_ = true;
    std::vector<int> vid(nodes_.size(), -1);
    if (topFacet_ < 0) {
        // Sections still alive here shrink onto a horizontal top edge or vertex of D.
        std::vector<std::pair<Vec2, int>> clusters;
        for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
            Node& n = nodes_[i];
            if (!n.alive) continue;
            Vec2 p = node_pos(n, tEnd_);
            for (const auto& [q, v] : clusters)
                if (norm(p - q) <= 100 * tol_) vid[i] = v;
            if (vid[i] < 0) {
                vid[i] = static_cast<int>(verts_.size());
                verts_.push_back({Vec3{tEnd_, p.x, p.y}, 2});
                clusters.push_back({p, vid[i]});
            }
            edges_.push_back({n.startVertex, vid[i], n.p, n.q, n.boundary});
            n.alive = false;
        }
        for (auto& s : segs_) {
            if (!s.alive) continue;
            if (vid[s.n0] != vid[s.n1]) throw DegeneracyError("sweep ended with live segments");
            s.alive = false;
        }
        return;
    }
    int topPlane = facetPlane_[topFacet_];
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
        Node& n = nodes_[i];
        if (!n.alive) continue;
        Vec2 p = node_pos(n, tEnd_);
        vid[i] = static_cast<int>(verts_.size());
        verts_.push_back({Vec3{tEnd_, p.x, p.y}, n.boundary ? 2 : 1});
        edges_.push_back({n.startVertex, vid[i], n.p, n.q, n.boundary});
        n.alive = false;
    }
    for (auto& s : segs_) {
        if (!s.alive) continue;
        edges_.push_back({vid[s.n0], vid[s.n1], s.plane, topPlane, true});
        s.alive = false;
    }
}

PolyConfig Sweep::result() const {
    PolyConfig cfg;
    std::vector<int> remap(verts_.size(), -1);
    for (const auto& e : edges_) {
        remap[e.v0] = 0;
        remap[e.v1] = 0;
    }
    for (size_t i = 0; i < verts_.size(); ++i) {
        if (remap[i] < 0) continue;
        remap[i] = static_cast<int>(cfg.vertices.size());
        cfg.vertices.push_back({verts_[i].p, verts_[i].kind >= 1, verts_[i].kind == 2});
    }
    std::vector<int> faceOf(planes_.size(), -1);
    std::vector<std::vector<int>> planeEdges(planes_.size());
    for (int i = 0; i < static_cast<int>(edges_.size()); ++i) {
        planeEdges[edges_[i].p].push_back(i);
        if (!edges_[i].boundary) planeEdges[edges_[i].q].push_back(i);
    }
    for (int p = 0; p < static_cast<int>(planes_.size()); ++p) {
        if (planes_[p].facet || planeEdges[p].empty()) continue;
        std::map<int, std::vector<int>> adj;
        for (int ei : planeEdges[p]) {
            int a = remap[edges_[ei].v0], b = remap[edges_[ei].v1];
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
        for (const auto& [vtx, nb] : adj)
            if (nb.size() != 2) throw DegeneracyError("face boundary is not a closed curve");
        std::vector<std::vector<int>> cycles;
        std::map<int, bool> used;
        for (const auto& [start, nb] : adj) {
            if (used[start]) continue;
            std::vector<int> cyc{start};
            used[start] = true;
            int prev = start, cur = nb[0];
            while (cur != start) {
                cyc.push_back(cur);
                used[cur] = true;
                const auto& cn = adj[cur];
                int next = cn[0] == prev ? cn[1] : cn[0];
                prev = cur;
                cur = next;
            }
            cycles.push_back(cyc);
        }
        Face f;
        f.poly = make_polygon_frame(planes_[p].plane);
        f.tag = planes_[p].tag;
        std::vector<std::vector<Vec2>> pts;
        std::vector<double> areas;
        for (const auto& c : cycles) {
            std::vector<Vec2> q;
            for (int id : c) q.push_back(f.poly.to2d(cfg.vertices[id].p));
            areas.push_back(signed_area(q));
            pts.push_back(q);
        }
        size_t outer = 0;
        for (size_t i = 1; i < cycles.size(); ++i)
            if (std::abs(areas[i]) > std::abs(areas[outer])) outer = i;
        for (size_t i = 0; i < cycles.size(); ++i) {
            bool wantPositive = i == outer;
            if ((areas[i] > 0) != wantPositive) {
                std::reverse(cycles[i].begin(), cycles[i].end());
                std::reverse(pts[i].begin(), pts[i].end());
            }
            if (i == outer) {
                f.outerIds = cycles[i];
                f.poly.outer = pts[i];
            } else {
                f.holeIds.push_back(cycles[i]);
                f.poly.holes.push_back(pts[i]);
            }
        }
        faceOf[p] = static_cast<int>(cfg.faces.size());
        cfg.faces.push_back(std::move(f));
    }
    for (const auto& e : edges_) {
        if (e.boundary) {
            cfg.boundaryEdges.push_back({remap[e.v0], remap[e.v1], faceOf[e.p], planes_[e.q].facetIndex});
        } else {
            InternalEdge ie;
            ie.v0 = remap[e.v0];
            ie.v1 = remap[e.v1];
            ie.f0 = faceOf[e.p];
            ie.f1 = faceOf[e.q];
            ie.length = norm(cfg.vertices[ie.v1].p - cfg.vertices[ie.v0].p);
            cfg.internalEdges.push_back(ie);
        }
    }
    for (auto& ie : cfg.internalEdges) ie.wedge = edge_wedge_angle(cfg, ie);
    return cfg;
}

PolyConfig resolve(const Domain& d, const EntrySet& entries, const std::vector<BirthPackage>& packages,
                   const ResolveOptions& opt) {
    Sweep s(d, opt);
    for (const auto& e : entries) s.add_entry(e);
    for (const auto& p : packages) {
        if (!d.contains(p.site, 0)) throw InputError("package site outside the domain");
        s.add_package(p);
    }
    s.run();
    return s.result();
}

PolyConfig resolve_forced(const Domain& d, const std::vector<ForcedBirth>& births, const ResolveOptions& opt) {
    Sweep s(d, opt);
    for (const auto& b : births) s.add_forced(b);
    s.run();
    return s.result();
}

BirthPackage make_package(const Vec3& site, const Key& seedKey) {
    return BirthPackage{site, split_key(seedKey, kTagPackage, double_bits(site.x),
                                        double_bits(site.y) ^ rotl(double_bits(site.z), 17))};
}

std::vector<BirthPackage> sample_packages(const Domain& d, RngStream& rng) {
    Vec3 lo = d.vertices[0], hi = lo;
    for (const auto& v : d.vertices)
        for (int k = 0; k < 3; ++k) {
            lo[k] = std::min(lo[k], v[k]);
            hi[k] = std::max(hi[k], v[k]);
        }
    std::uint64_t n = rng.poisson(kIntensityTriple * d.volume);
    std::vector<BirthPackage> out;
    while (out.size() < n) {
        Vec3 p{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y), rng.uniform(lo.z, hi.z)};
        if (d.contains(p, 0)) out.push_back(make_package(p, rng.key()));
    }
    return out;
}

FieldSample simulate_field(const Domain& d, const EntrySet& entries, RngStream rng, const ResolveOptions& opt) {
    for (std::uint64_t attempt = 0; attempt < 16; ++attempt) {
        RngStream r = attempt == 0 ? rng : rng.split(0xdead, attempt);
        FieldSample fs;
        fs.packages = sample_packages(d, r);
        try {
            fs.cfg = resolve(d, entries, fs.packages, opt);
            return fs;
        } catch (const DegeneracyError&) {
            continue;
        }
    }
    throw DegeneracyError("simulate_field: repeated degeneracies");
}

}  // namespace pmf
