#pragma once

#include "gala/gala_rep.hpp"
#include "gala/tri_mesh.hpp"
#include "gala/types.hpp"

#include <cstdint>
#include <vector>

namespace gala {

// Dense SDF samples over [-0.5, 0.5]^3; axis sample j sits at
// -0.5 + j / (resolution - 1). Stored x-fastest, then y, then z.
struct SdfVolume {
    int resolution = 0;
    std::vector<float> values;

    double coord(int j) const {
        return -0.5 + static_cast<double>(j) / (resolution - 1);
    }
    float& at(int i, int j, int k) {
        return values[(static_cast<std::size_t>(k) * resolution + j) * resolution + i];
    }
    float at(int i, int j, int k) const {
        return values[(static_cast<std::size_t>(k) * resolution + j) * resolution + i];
    }
};

// Evaluates the blended query on the full lattice, parallel over y slices.
SdfVolume sample_volume(const GalaRep& rep, int resolution, int threads = 0);

// Flood-fill pass on one 2D slice (row-major, nx fastest): 4-connected
// components of cells within eps of the outside default are negated when the
// component touches no slice border and no other non-negative value.
void flip_slice(float* slice, int nx, int ny, double eps);

// Applies flip_slice to every y slice (the default), or a single 6-connected
// 3D pass over the whole volume when three_dimensional is set.
void flip_interior_signs(SdfVolume& volume, bool three_dimensional = false,
                         double eps = 1e-6, int threads = 0);

// Standard 256-case marching cubes at the given iso level. Output vertices
// are welded on lattice edges, so a sign-consistent closed field yields a
// watertight mesh with outward normals where the field increases.
TriMesh marching_cubes(const SdfVolume& volume, double iso = 0.0);

struct ReconstructOptions {
    int resolution = 256;
    bool flip_signs = true;
    bool flip_3d = false;
    int threads = 0;
};

// sample_volume + flip_interior_signs + marching_cubes.
TriMesh reconstruct_mesh(const GalaRep& rep, const ReconstructOptions& = {});

} // namespace gala
