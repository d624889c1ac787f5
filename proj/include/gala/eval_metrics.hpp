#pragma once

#include "gala/tri_mesh.hpp"
#include "gala/types.hpp"

#include <cstdint>

namespace gala {

// Symmetric Chamfer distance between point sets: mean squared nearest-
// neighbor distance in both directions, summed.
double chamfer_points(const MatX3& a, const MatX3& b, int threads = 0);

// Symmetric Hausdorff distance between point sets (unsquared max-min).
double hausdorff_points(const MatX3& a, const MatX3& b, int threads = 0);

// Mesh metrics: both meshes are normalized, then sampled with n_samples
// area-proportional points each (same seed on both sides, which makes the
// metric symmetric in its arguments). Squared-distance convention for the
// Chamfer distance.
double chamfer(const TriMesh& a, const TriMesh& b, std::int64_t n_samples = 100000,
               std::uint64_t seed = 0, int threads = 0);
double hausdorff(const TriMesh& a, const TriMesh& b,
                 std::int64_t n_samples = 100000, std::uint64_t seed = 0,
                 int threads = 0);

} // namespace gala
