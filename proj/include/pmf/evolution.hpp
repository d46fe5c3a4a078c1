#pragma once

#include <array>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <unordered_map>
#include <vector>

#include "pmf/fieldmodel.hpp"
#include "pmf/geometry.hpp"
#include "pmf/kinematics.hpp"
#include "pmf/rng.hpp"

namespace pmf {

struct BirthPackage {
    Vec3 site;
    Key streamKey;
    bool operator==(const BirthPackage&) const = default;
};

struct ResolveOptions {
    bool spontaneousBirths = true;
    double ieRateFactor = 1.0;
    std::vector<DrawRecord>* drawLog = nullptr;
};

// An IT birth with prescribed planes and no downstream randomness.
struct ForcedBirth {
    Vec3 site;
    std::array<Plane, 3> planes;
};

PolyConfig resolve(const Domain& d, const EntrySet& entries, const std::vector<BirthPackage>& packages,
                   const ResolveOptions& opt = {});
PolyConfig resolve_forced(const Domain& d, const std::vector<ForcedBirth>& births, const ResolveOptions& opt = {});

std::vector<BirthPackage> sample_packages(const Domain& d, RngStream& rng);
BirthPackage make_package(const Vec3& site, const Key& seedKey);

struct FieldSample {
    PolyConfig cfg;
    std::vector<BirthPackage> packages;
};

FieldSample simulate_field(const Domain& d, const EntrySet& entries, RngStream rng, const ResolveOptions& opt = {});

enum class EventKind { Kinematic, IT, IA, IE, Entry, End };

struct SweepEvent {
    EventKind kind = EventKind::End;
    double time = std::numeric_limits<double>::infinity();
    Vec3 point;
    std::array<int, 3> planes{-1, -1, -1};
    int index = -1;
    int aux = -1;
};

class Sweep {
public:
    Sweep(const Domain& d, const ResolveOptions& opt);

    int add_face_plane(const Plane& p, const FaceTag& tag);
    // Places a closed polygonal chain at r-time t whose sides lie on the given face planes
    // in cyclic order.
    void inject_polygon(double t, const std::vector<int>& planes);
    void add_package(const BirthPackage& p) { packages_.push_back(p); }
    void add_forced(const ForcedBirth& b) { forced_.push_back(b); }
    void add_entry(const EntryEvent& e) { entries_.push_back(e); }

    double now() const { return now_; }
    std::optional<SweepEvent> next_kinematic_event() const;
    SweepEvent next_event() const;
    void step(const SweepEvent& e);
    void run();
    PolyConfig result() const;
    int live_segments() const;

private:
    struct PlaneRec {
        Plane plane;
        Vec3 outward;
        bool facet = false;
        int facetIndex = -1;
        bool horizontal = false;
        Key key;
        FaceTag tag;
        Vec2 m, dir;
        std::vector<Vec3> iaCand;
        size_t iaNext = 0;
    };
    struct Node {
        int p = -1, q = -1;
        bool boundary = false;
        bool alive = true;
        int startVertex = -1;
        int segP = -1, segQ = -1;
        Vec2 pos0;
        double t0 = 0;
        Vec2 vel;
        Vec3 dir3;
        Vec2 sp, sq;
        Key key;
        double ieTime = std::numeric_limits<double>::infinity();
        Vec3 iePoint;
    };
    struct Segment {
        int plane = -1;
        int n0 = -1, n1 = -1;
        bool alive = true;
    };
    struct VertexRec {
        Vec3 p;
        int kind = 0;
    };
    struct EdgeRec {
        int v0, v1;
        int p, q;
        bool boundary;
    };
    struct LineInfo {
        Vec2 vel;
        Vec3 dir3;
    };

    struct Cand {
        double t;
        std::array<int, 3> key;
        Vec3 x;
        int kind;
        int a, b;
        bool operator>(const Cand& o) const {
            if (t != o.t) return t > o.t;
            if (key != o.key) return key > o.key;
            if (kind != o.kind) return kind > o.kind;
            if (a != o.a) return a > o.a;
            return b > o.b;
        }
    };

    const Domain& d_;
    ResolveOptions opt_;
    double tol_, tolT_;
    double now_, tEnd_;
    int topFacet_ = -1;
    std::vector<PlaneRec> planes_;
    std::vector<int> facetPlane_;
    std::vector<std::vector<int>> facetNeighbors_;
    std::vector<Node> nodes_;
    std::vector<Segment> segs_;
    std::vector<VertexRec> verts_;
    std::vector<EdgeRec> edges_;
    std::map<std::pair<int, int>, int> pairNode_;
    std::vector<std::vector<int>> planeSegs_;
    std::vector<std::vector<int>> planeNodes_;
    std::vector<BirthPackage> packages_;
    std::vector<ForcedBirth> forced_;
    std::vector<EntryEvent> entries_;
    size_t nextPackage_ = 0, nextForced_ = 0, nextEntry_ = 0;
    bool sorted_ = false;
    bool finished_ = false;
    mutable std::map<std::array<int, 3>, std::optional<Vec3>> tripleCache_;
    std::map<std::array<int, 3>, bool> processed_;
    mutable std::priority_queue<Cand, std::vector<Cand>, std::greater<Cand>> heap_;
    std::set<std::pair<double, int>> ieQueue_;
    std::set<std::pair<double, int>> iaQueue_;

    static std::array<int, 3> sorted3(int a, int b, int c);
    std::optional<Vec3> triple(int a, int b, int c) const;
    LineInfo line_info(int a, int b) const;
    Vec2 node_pos(const Node& n, double t) const;
    double coord(int plane, const Vec2& p) const { return dot(p, planes_[plane].dir); }
    int add_plane_internal(const Plane& p, const FaceTag& tag, bool facet, int facetIndex);
    void setup_face(int id);
    void log_stream(const RngStream& s) const;
    void prepare();
    void process_triple(const std::array<int, 3>& tri, const Vec3& x, bool entry);
    void schedule_ie(int nodeId);
    void push_candidate(int a, int b, int c, int kind, int i, int j);
    bool candidate_valid(const Cand& c) const;
    void candidates_for_node(int id);
    void candidates_for_segment(int id);
    void kill_node(int id);
    void kill_segment(int id);
    void requeue_ia(int plane);
    void fire_it(const Vec3& site, const std::array<Plane, 3>& planes, const std::array<Key, 3>& keys);
    void fire_ia(int plane, size_t candidate);
    void fire_ie(int nodeId);
    void fire_entry(const EntryEvent& e, size_t index);
    void finish();
};

}  // namespace pmf
