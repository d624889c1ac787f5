#pragma once

#include "gala/types.hpp"

#include <cstdint>
#include <string>
#include <utility>

namespace gala {

// Triangle mesh with per-face unit normals derived from the winding.
struct TriMesh {
    MatX3  vertices;
    MatX3i triangles;
    MatX3  face_normals;

    std::int64_t vertex_count() const { return vertices.rows(); }
    std::int64_t triangle_count() const { return triangles.rows(); }
    bool empty() const { return triangles.rows() == 0; }
};

// Validates indices, computes face normals. Throws InvalidInput on an index
// out of range or an exactly zero-area face.
TriMesh make_mesh(MatX3 vertices, MatX3i triangles);

double triangle_area(const TriMesh& mesh, std::int64_t face);
double surface_area(const TriMesh& mesh);

// Positive for a watertight mesh with outward-facing winding.
double signed_volume(const TriMesh& mesh);

std::pair<Vec3, Vec3> bounding_box(const TriMesh& mesh);

// Reads OBJ or STL (ASCII or binary, chosen by sniffing) by file extension.
// Non-triangular faces are an error; faces with area <= 1e-12 are dropped.
TriMesh load_mesh(const std::string& path);

// Writes OBJ (ASCII) or STL (binary) by file extension.
void save_mesh(const TriMesh& mesh, const std::string& path);

// Shifts vertices by the bounding-box center and divides by the diagonal
// length, so the result is centered at the origin with unit-diagonal bounds
// (hence inside the closed infinity ball of radius 0.5). Idempotent.
TriMesh normalize_mesh(const TriMesh& mesh);

struct SurfaceSamples {
    MatX3 points;
    MatX3 normals;     // face normal of the source triangle
    VecXi source_face;

    std::int64_t count() const { return points.rows(); }
};

// Area-proportional surface sampling: per-triangle counts by largest-remainder
// apportionment, positions by uniform barycentric draws (square-root trick).
// Each triangle consumes an independent stream keyed by (seed, face), so the
// result is bitwise deterministic however the work is scheduled.
SurfaceSamples sample_surface(const TriMesh& mesh, std::int64_t count,
                              std::uint64_t seed);

// The fitting default of 10 samples per triangle.
inline std::int64_t default_sample_count(const TriMesh& mesh) {
    return 10 * mesh.triangle_count();
}

} // namespace gala
