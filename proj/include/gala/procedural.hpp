#pragma once

#include "gala/tri_mesh.hpp"

namespace gala {

// Closed procedural test solids. All generators return watertight meshes with
// outward-facing winding (positive signed volume).

// Subdivided icosahedron projected onto a sphere: 20 * 4^subdivisions faces.
TriMesh make_icosphere(double radius, int subdivisions);

// Torus around the y axis. major_radius is the ring radius, minor_radius the
// tube radius.
TriMesh make_torus(double major_radius, double minor_radius,
                   int major_segments = 48, int minor_segments = 24);

// Axis-aligned box [-half, half] per axis, 12 triangles.
TriMesh make_box(const Vec3& half_extents);

// Geometry of the fin attached by make_box_with_fin, for region queries.
struct FinInfo {
    Vec3 lo, hi;  // axis-aligned bounds of the fin plate (post-normalization
                  // when the mesh fed to it was normalized the same way)
};

// A box with a thin vertical plate ("fin") rising from its top face. The fin
// cross-section is welded into the top face, so the result is a single closed
// surface. thickness is the fin extent along z. subdivisions midpoint-refines
// the base 28-triangle solid (x4 faces each round).
TriMesh make_box_with_fin(const Vec3& box_half_extents, double fin_half_width,
                          double fin_height, double thickness, int subdivisions,
                          FinInfo* fin = nullptr);

// One round of global midpoint (1-to-4) subdivision. Edge midpoints are
// shared, so closed meshes stay closed.
TriMesh midpoint_subdivide(const TriMesh& mesh);

} // namespace gala
