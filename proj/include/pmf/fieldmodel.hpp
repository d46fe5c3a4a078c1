#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pmf/geometry.hpp"
#include "pmf/rng.hpp"

namespace pmf {

enum class BirthKind : int { IT = 0, IA = 1, IE = 2, EntryIA = 3, EntryIE = 4 };

struct FaceTag {
    BirthKind kind = BirthKind::IT;
    Key key;
    bool operator==(const FaceTag&) const = default;
};

struct CfgVertex {
    Vec3 p;
    bool boundary = false;
    bool corner = false;
    bool operator==(const CfgVertex&) const = default;
};

struct Face {
    Polygon2 poly;
    std::vector<int> outerIds;
    std::vector<std::vector<int>> holeIds;
    FaceTag tag;
};

struct InternalEdge {
    int v0 = 0, v1 = 0;
    int f0 = 0, f1 = 0;
    double wedge = 0;
    double length = 0;
    bool operator==(const InternalEdge&) const = default;
};

struct BoundaryEdge {
    int v0 = 0, v1 = 0;
    int face = 0;
    int facet = 0;
    bool operator==(const BoundaryEdge&) const = default;
};

struct PolyConfig {
    std::vector<CfgVertex> vertices;
    std::vector<Face> faces;
    std::vector<InternalEdge> internalEdges;
    std::vector<BoundaryEdge> boundaryEdges;

    bool empty() const { return faces.empty(); }
};

bool operator==(const Face& a, const Face& b);
bool operator==(const PolyConfig& a, const PolyConfig& b);

enum class EntryKind : int { IA = 0, IE = 1 };

struct EntryEvent {
    EntryKind kind = EntryKind::IA;
    double time = 0;
    Vec3 location;
    std::vector<Plane> planes;
};

using EntrySet = std::vector<EntryEvent>;

struct Violation {
    std::string condition;
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string summary() const;
};

ValidationReport validate(const PolyConfig& cfg, const Domain& d);

// Wedge angle of an internal edge from the static geometry of its two faces.
double edge_wedge_angle(const PolyConfig& cfg, const InternalEdge& e);
double energy(const PolyConfig& cfg, const Domain& d);
EntrySet entry_events(const PolyConfig& cfg, const Domain& d);

struct Stats {
    int faceCount = 0;
    int internalEdgeCount = 0;
    int boundaryEdgeCount = 0;
    int vertexCount = 0;
    int internalVertexCount = 0;
    double totalArea = 0;
    double totalEdgeLength = 0;
    std::vector<double> faceAreas;
};

Stats stats(const PolyConfig& cfg);

inline constexpr int kSerializationVersion = 1;
std::string serialize(const PolyConfig& cfg);
// Lines starting with # are ignored.
PolyConfig deserialize(const std::string& text);

std::string serialize_entries(const EntrySet& e);
EntrySet deserialize_entries(const std::string& text);

}  // namespace pmf
