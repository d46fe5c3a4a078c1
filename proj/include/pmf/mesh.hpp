#pragma once

#include <array>
#include <string>
#include <vector>

#include "pmf/fieldmodel.hpp"

namespace pmf {

struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<std::vector<int>> faces;
};

// Triangles over the indices of outer followed by each hole in turn. Outer is taken
// counter-clockwise and holes clockwise whatever their input orientation.
std::vector<std::array<int, 3>> triangulate(const std::vector<Vec2>& outer, const std::vector<std::vector<Vec2>>& holes);

// One polygon per face without holes; faces with holes are split into triangles.
Mesh build_mesh(const PolyConfig& cfg, double eps = kEpsGeom);

std::string write_obj(const Mesh& m, const std::vector<std::string>& comments = {});

}  // namespace pmf
