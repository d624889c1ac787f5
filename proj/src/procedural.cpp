#include "gala/procedural.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

namespace gala {

namespace {

using IndexTri = Eigen::Vector3i;

TriMesh from_buffers(const std::vector<Vec3>& vertices,
                     const std::vector<IndexTri>& faces) {
    MatX3 v(static_cast<std::int64_t>(vertices.size()), 3);
    for (std::size_t i = 0; i < vertices.size(); ++i) v.row(i) = vertices[i];
    MatX3i t(static_cast<std::int64_t>(faces.size()), 3);
    for (std::size_t i = 0; i < faces.size(); ++i) t.row(i) = faces[i];
    return make_mesh(std::move(v), std::move(t));
}

void push_quad(std::vector<IndexTri>& faces, int a, int b, int c, int d) {
    faces.emplace_back(a, b, c);
    faces.emplace_back(a, c, d);
}

} // namespace

TriMesh midpoint_subdivide(const TriMesh& mesh) {
    std::vector<Vec3> vertices(mesh.vertex_count());
    for (std::int64_t i = 0; i < mesh.vertex_count(); ++i)
        vertices[i] = mesh.vertices.row(i);

    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
        const auto key = std::minmax(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        const int idx = static_cast<int>(vertices.size());
        vertices.push_back(0.5 * (vertices[a] + vertices[b]));
        midpoint.emplace(key, idx);
        return idx;
    };

    std::vector<IndexTri> faces;
    faces.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 4);
    for (std::int64_t f = 0; f < mesh.triangle_count(); ++f) {
        const int a = mesh.triangles(f, 0);
        const int b = mesh.triangles(f, 1);
        const int c = mesh.triangles(f, 2);
        const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
        faces.emplace_back(a, ab, ca);
        faces.emplace_back(b, bc, ab);
        faces.emplace_back(c, ca, bc);
        faces.emplace_back(ab, bc, ca);
    }
    return from_buffers(vertices, faces);
}

TriMesh make_icosphere(double radius, int subdivisions) {
    if (radius <= 0.0) throw InvalidInput("icosphere radius must be positive");
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;

    std::vector<Vec3> vertices = {
        {-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
        {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
        {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1},
    };
    std::vector<IndexTri> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
    };

    TriMesh mesh = from_buffers(vertices, faces);
    for (int s = 0; s < subdivisions; ++s) mesh = midpoint_subdivide(mesh);

    for (std::int64_t i = 0; i < mesh.vertex_count(); ++i) {
        Vec3 v = mesh.vertices.row(i);
        mesh.vertices.row(i) = v * (radius / v.norm());
    }
    return make_mesh(std::move(mesh.vertices), std::move(mesh.triangles));
}

TriMesh make_torus(double major_radius, double minor_radius, int major_segments,
                   int minor_segments) {
    if (minor_radius <= 0.0 || major_radius <= minor_radius)
        throw InvalidInput("torus radii must satisfy 0 < minor < major");
    if (major_segments < 3 || minor_segments < 3)
        throw InvalidInput("torus needs at least 3 segments per loop");

    std::vector<Vec3> vertices;
    vertices.reserve(static_cast<std::size_t>(major_segments) * minor_segments);
    for (int i = 0; i < major_segments; ++i) {
        const double u = 2.0 * M_PI * i / major_segments;
        for (int j = 0; j < minor_segments; ++j) {
            const double v = 2.0 * M_PI * j / minor_segments;
            const double ring = major_radius + minor_radius * std::cos(v);
            vertices.emplace_back(ring * std::cos(u), minor_radius * std::sin(v),
                                  ring * std::sin(u));
        }
    }

    auto at = [&](int i, int j) {
        return (i % major_segments) * minor_segments + (j % minor_segments);
    };
    std::vector<IndexTri> faces;
    for (int i = 0; i < major_segments; ++i)
        for (int j = 0; j < minor_segments; ++j)
            push_quad(faces, at(i, j), at(i, j + 1), at(i + 1, j + 1), at(i + 1, j));

    return from_buffers(vertices, faces);
}

TriMesh make_box(const Vec3& half_extents) {
    if ((half_extents.array() <= 0.0).any())
        throw InvalidInput("box half extents must be positive");
    const double x = half_extents.x(), y = half_extents.y(), z = half_extents.z();
    std::vector<Vec3> v = {
        {-x, -y, -z}, {x, -y, -z}, {x, -y, z},  {-x, -y, z},
        {-x, y, -z},  {x, y, -z},  {x, y, z},   {-x, y, z},
    };
    std::vector<IndexTri> faces;
    push_quad(faces, 0, 1, 2, 3);  // bottom (-y)
    push_quad(faces, 4, 7, 6, 5);  // top (+y)
    push_quad(faces, 0, 4, 5, 1);  // -z
    push_quad(faces, 3, 2, 6, 7);  // +z
    push_quad(faces, 0, 3, 7, 4);  // -x
    push_quad(faces, 1, 5, 6, 2);  // +x
    return from_buffers(v, faces);
}

TriMesh make_box_with_fin(const Vec3& box_half_extents, double fin_half_width,
                          double fin_height, double thickness, int subdivisions,
                          FinInfo* fin) {
    const double A = box_half_extents.x();
    const double B = box_half_extents.y();
    const double C = box_half_extents.z();
    const double a = fin_half_width;
    const double H = fin_height;
    const double h = thickness / 2.0;
    if (a <= 0.0 || a >= A || h <= 0.0 || h >= C || H <= 0.0)
        throw InvalidInput("fin must be strictly inside the top face");

    std::vector<Vec3> v = {
        {-A, -B, -C}, {A, -B, -C}, {A, -B, C}, {-A, -B, C},  // 0-3 bottom
        {-A, B, -C},  {A, B, -C},  {A, B, C},  {-A, B, C},   // 4-7 top outer
        {-a, B, -h},  {a, B, -h},  {a, B, h},  {-a, B, h},   // 8-11 fin base
        {-a, B + H, -h}, {a, B + H, -h}, {a, B + H, h}, {-a, B + H, h},  // 12-15 fin top
    };

    std::vector<IndexTri> faces;
    push_quad(faces, 0, 1, 2, 3);    // bottom
    push_quad(faces, 0, 4, 5, 1);    // -z side
    push_quad(faces, 3, 2, 6, 7);    // +z side
    push_quad(faces, 0, 3, 7, 4);    // -x side
    push_quad(faces, 1, 5, 6, 2);    // +x side
    // Top face is an annulus around the fin base: one quad per outer edge,
    // bridged to the matching fin-base corners.
    push_quad(faces, 4, 7, 11, 8);   // between x=-A edge and x=-a
    push_quad(faces, 7, 6, 10, 11);  // between z=+C edge and z=+h
    push_quad(faces, 6, 5, 9, 10);   // between x=+A edge and x=+a
    push_quad(faces, 5, 4, 8, 9);    // between z=-C edge and z=-h
    // Fin walls and cap.
    push_quad(faces, 8, 12, 13, 9);   // -z wall
    push_quad(faces, 11, 10, 14, 15); // +z wall
    push_quad(faces, 8, 11, 15, 12);  // -x wall
    push_quad(faces, 9, 13, 14, 10);  // +x wall
    push_quad(faces, 12, 15, 14, 13); // cap

    TriMesh mesh = from_buffers(v, faces);
    for (int s = 0; s < subdivisions; ++s) mesh = midpoint_subdivide(mesh);

    if (fin) {
        fin->lo = Vec3(-a, B, -h);
        fin->hi = Vec3(a, B + H, h);
    }
    return mesh;
}

} // namespace gala
