#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gala/procedural.hpp"
#include "gala/tri_mesh.hpp"
#include "helpers.hpp"

#include <cmath>
#include <fstream>

using namespace gala;
using namespace gala::testing;

TEST_CASE("load_mesh: single-triangle OBJ") {
    const std::string path = temp_path("single_triangle.obj");
    {
        std::ofstream out(path);
        out << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";
    }
    const TriMesh mesh = load_mesh(path);
    CHECK(mesh.triangle_count() == 1);
    CHECK(mesh.vertex_count() == 3);
    CHECK(Vec3(mesh.face_normals.row(0)).isApprox(Vec3(0, 0, 1), 1e-12));
}

TEST_CASE("load_mesh: icosphere face counts and round trips") {
    for (int k : {0, 1, 2}) {
        const TriMesh sphere = make_icosphere(1.0, k);
        CHECK(sphere.triangle_count() == 20 * (1 << (2 * k)) * (1 << (2 * k)) / (1 << (2 * k)));
        CHECK(sphere.triangle_count() == 20 * std::pow(4, k));

        const std::string obj = temp_path("icosphere.obj");
        save_mesh(sphere, obj);
        const TriMesh back = load_mesh(obj);
        CHECK(back.triangle_count() == sphere.triangle_count());
        CHECK(back.vertex_count() == sphere.vertex_count());
        CHECK(watertight(back));
    }
}

TEST_CASE("load_mesh: STL binary and ASCII") {
    const TriMesh sphere = make_icosphere(0.4, 2);
    const std::string stl = temp_path("sphere.stl");
    save_mesh(sphere, stl);
    const TriMesh back = load_mesh(stl);
    CHECK(back.triangle_count() == sphere.triangle_count());
    CHECK(watertight(back));  // duplicate corners welded back together

    const std::string ascii = temp_path("tetra_ascii.stl");
    {
        std::ofstream out(ascii);
        out << "solid tetra\n";
        auto facet = [&out](const Vec3& a, const Vec3& b, const Vec3& c) {
            out << " facet normal 0 0 0\n  outer loop\n";
            for (const Vec3& v : {a, b, c})
                out << "   vertex " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
            out << "  endloop\n endfacet\n";
        };
        const Vec3 p0(0, 0, 0), p1(1, 0, 0), p2(0, 1, 0), p3(0, 0, 1);
        facet(p0, p2, p1);
        facet(p0, p1, p3);
        facet(p0, p3, p2);
        facet(p1, p2, p3);
        out << "endsolid tetra\n";
    }
    const TriMesh tetra = load_mesh(ascii);
    CHECK(tetra.triangle_count() == 4);
    CHECK(tetra.vertex_count() == 4);
    CHECK(watertight(tetra));
}

TEST_CASE("load_mesh: error paths") {
    const std::string quad = temp_path("quad.obj");
    {
        std::ofstream out(quad);
        out << "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
    }
    CHECK_THROWS_AS(load_mesh(quad), InvalidInput);
    CHECK_THROWS_AS(load_mesh(temp_path("missing_file.obj")), IoError);
    CHECK_THROWS_AS(load_mesh(temp_path("unsupported.ply")), InvalidInput);

    const std::string degen = temp_path("degenerate.obj");
    {
        std::ofstream out(degen);
        out << "v 0 0 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\n";  // collinear
    }
    CHECK_THROWS_AS(load_mesh(degen), InvalidInput);
}

TEST_CASE("normalize_mesh: unit cube lands on the origin with diagonal 1") {
    const TriMesh cube = make_box(Vec3(0.5, 0.5, 0.5));  // [-0.5, 0.5]^3
    TriMesh shifted = cube;
    shifted.vertices.rowwise() += Eigen::RowVector3d(3.0, -1.0, 7.0);  // off-center

    const TriMesh normalized = normalize_mesh(shifted);
    const auto [lo, hi] = bounding_box(normalized);
    CHECK((hi - lo).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((0.5 * (lo + hi)).norm() < 1e-12);
    const double half = 1.0 / (2.0 * std::sqrt(3.0));
    CHECK(hi.x() == doctest::Approx(half).epsilon(1e-12));
    CHECK(normalized.vertices.cwiseAbs().maxCoeff() <= 0.5 + 1e-12);
}

TEST_CASE("normalize_mesh: idempotence") {
    const TriMesh mesh = normalize_mesh(make_torus(0.3, 0.1));
    const TriMesh twice = normalize_mesh(mesh);
    CHECK((twice.vertices - mesh.vertices).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("normalize_mesh: degenerate extents") {
    // All x equal: the diagonal still uses the other two extents.
    MatX3 v(3, 3);
    v << 0, 0, 0, 0, 1, 0, 0, 0, 2;
    MatX3i t(1, 3);
    t << 0, 1, 2;
    const TriMesh flat = make_mesh(v, t);
    const TriMesh normalized = normalize_mesh(flat);
    // bbox extents (0, 1, 2), diagonal sqrt(5), center (0, 0.5, 1)
    const double d = std::sqrt(5.0);
    CHECK(normalized.vertices(0, 1) == doctest::Approx(-0.5 / d).epsilon(1e-12));
    CHECK(normalized.vertices(2, 2) == doctest::Approx(1.0 / d).epsilon(1e-12));

    MatX3 point = MatX3::Zero(3, 3);
    CHECK_THROWS_AS(normalize_mesh(make_mesh(point, t)), InvalidInput);
}

TEST_CASE("sample_surface: exact area apportionment") {
    // Two right triangles with areas 1 and 3.
    MatX3 v(6, 3);
    v << 0, 0, 0, 2, 0, 0, 0, 2, 0,   // area 2 ... scaled below
        5, 0, 0, 5 + 2, 0, 0, 5, 6, 0;  // area 6
    MatX3i t(2, 3);
    t << 0, 1, 2, 3, 4, 5;
    const TriMesh mesh = make_mesh(v, t);
    // areas 2 and 6 -> ratio 1:3
    const SurfaceSamples samples = sample_surface(mesh, 4, 7);
    std::int64_t counts[2] = {0, 0};
    for (std::int64_t i = 0; i < samples.count(); ++i) ++counts[samples.source_face[i]];
    CHECK(counts[0] == 1);
    CHECK(counts[1] == 3);
}

TEST_CASE("sample_surface: default count and determinism") {
    const TriMesh mesh = make_icosphere(0.3, 2);
    const std::int64_t count = default_sample_count(mesh);
    CHECK(count == 10 * mesh.triangle_count());

    const SurfaceSamples a = sample_surface(mesh, count, 42);
    const SurfaceSamples b = sample_surface(mesh, count, 42);
    CHECK(a.points == b.points);  // bitwise
    CHECK(a.source_face == b.source_face);

    const SurfaceSamples c = sample_surface(mesh, count, 43);
    CHECK(a.points != c.points);
}

TEST_CASE("sample_surface: points lie on their source triangles") {
    const TriMesh mesh = make_torus(0.3, 0.1, 16, 8);
    const SurfaceSamples samples = sample_surface(mesh, 2000, 5);
    for (std::int64_t i = 0; i < samples.count(); ++i) {
        const int f = samples.source_face[i];
        const Vec3 a = mesh.vertices.row(mesh.triangles(f, 0));
        const Vec3 n = mesh.face_normals.row(f);
        const double off_plane = std::abs(n.dot(Vec3(samples.points.row(i)) - a));
        CHECK(off_plane < 1e-9);
        CHECK(std::abs(Vec3(samples.normals.row(i)).norm() - 1.0) < 1e-9);
    }
}

TEST_CASE("sample_surface: empirical mean matches the quadrature centroid") {
    MatX3 v(3, 3);
    v << 0.1, 0.2, 0.0, 1.3, 0.1, 0.4, 0.2, 1.1, -0.3;
    MatX3i t(1, 3);
    t << 0, 1, 2;
    const TriMesh tri = make_mesh(v, t);

    Vec3 mean, variance;
    triangle_moments(v.row(0), v.row(1), v.row(2), &mean, &variance);

    const std::int64_t n = 20000;
    const SurfaceSamples samples = sample_surface(tri, n, 11);
    const Vec3 empirical = samples.points.colwise().mean().transpose();
    for (int axis = 0; axis < 3; ++axis) {
        const double sigma = std::sqrt(variance[axis] / double(n));
        CHECK(std::abs(empirical[axis] - mean[axis]) < 3.0 * sigma + 1e-12);
    }
}

TEST_CASE("sample_surface: long-run area proportionality") {
    MatX3 v(6, 3);
    v << 0, 0, 0, 1, 0, 0, 0, 1, 0,       // area 0.5
        3, 0, 0, 3, 0, 3.5, 0, 0, 3.5;    // area ~6.125... ratio r
    MatX3i t(2, 3);
    t << 0, 1, 2, 3, 4, 5;
    const TriMesh mesh = make_mesh(v, t);
    const double r = triangle_area(mesh, 1) / triangle_area(mesh, 0);

    const SurfaceSamples samples = sample_surface(mesh, 100000, 3);
    std::int64_t counts[2] = {0, 0};
    for (std::int64_t i = 0; i < samples.count(); ++i) ++counts[samples.source_face[i]];
    const double ratio = double(counts[1]) / double(counts[0]);
    CHECK(ratio > 0.95 * r);
    CHECK(ratio < 1.05 * r);
}

TEST_CASE("procedural solids are watertight with outward winding") {
    for (const TriMesh& mesh :
         {make_icosphere(0.3, 3), make_torus(0.25, 0.08), make_box(Vec3(0.2, 0.3, 0.1)),
          make_box_with_fin(Vec3(0.22, 0.22, 0.22), 0.12, 0.16, 0.004, 2)}) {
        CHECK(watertight(mesh));
        CHECK(signed_volume(mesh) > 0.0);
    }
    // torus volume approaches 2 pi^2 R r^2
    const TriMesh torus = make_torus(0.25, 0.08, 96, 48);
    CHECK(signed_volume(torus) ==
          doctest::Approx(2 * M_PI * M_PI * 0.25 * 0.08 * 0.08).epsilon(0.01));
}
