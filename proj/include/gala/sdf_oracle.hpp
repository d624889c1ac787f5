#pragma once

#include "gala/tri_mesh.hpp"
#include "gala/types.hpp"

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace gala {

// Closest surface feature of a triangle, from barycentric classification.
enum class Feature : std::uint8_t {
    kFace = 0,
    kEdgeAB,
    kEdgeBC,
    kEdgeCA,
    kVertexA,
    kVertexB,
    kVertexC,
};

// Closest point to p on triangle (a, b, c); feature receives the region the
// closest point lies on.
Vec3 closest_point_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                            const Vec3& c, Feature* feature);

struct BvhNode {
    Vec3 box_min, box_max;
    std::int32_t left = -1;   // internal nodes: children; leaves: -1
    std::int32_t right = -1;
    std::int32_t first = 0;   // leaves: triangle range in Bvh::order
    std::int32_t count = 0;

    bool is_leaf() const { return count > 0; }
};

// Binary AABB hierarchy over triangles, built top-down by median split on the
// longest centroid axis.
struct Bvh {
    std::vector<BvhNode> nodes;
    std::vector<std::int32_t> order;  // triangle ids, contiguous per leaf
};

Bvh build_bvh(const TriMesh& mesh, int leaf_size = 4);

// Result of a closest-feature search. Ties on distance resolve to the lowest
// triangle id, so tree and exhaustive searches agree exactly.
struct ClosestHit {
    double dist_sq = 0.0;
    std::int32_t triangle = -1;
    Vec3 point = Vec3::Zero();
    Feature feature = Feature::kFace;
};

// Signed-distance oracle over a watertight mesh. Immutable after build;
// concurrent queries need no locking. Sign comes from the angle-weighted
// pseudonormal of the closest feature.
struct SdfOracle {
    TriMesh mesh;
    Bvh bvh;
    MatX3 vertex_pseudonormals;
    std::unordered_map<std::uint64_t, Vec3> edge_pseudonormals;
    double truncation = kSdfBound;

    // Triangle corners flattened in BVH leaf order for cache-friendly scans.
    std::vector<double> packed_triangles;  // 9 doubles per entry
    std::vector<std::int32_t> packed_ids;
};

// Throws InvalidInput when the winding is inconsistent (signed volume <= 0).
SdfOracle build_oracle(const TriMesh& normalized_mesh);

ClosestHit closest_point(const SdfOracle& oracle, const Vec3& x);
ClosestHit closest_point_brute(const SdfOracle& oracle, const Vec3& x);

// Unbounded signed distance, negative inside.
double signed_distance(const SdfOracle& oracle, const Vec3& x);
double signed_distance_brute(const SdfOracle& oracle, const Vec3& x);

// signed_distance clamped to [-truncation, truncation].
double truncated_sdf(const SdfOracle& oracle, const Vec3& x);

} // namespace gala
