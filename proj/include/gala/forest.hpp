#pragma once

#include "gala/tri_mesh.hpp"
#include "gala/types.hpp"

#include <cstdint>
#include <vector>

namespace gala {

// Placeholder index values for level-0 nodes: the all-ones bit pattern of the
// stored field width.
inline constexpr std::uint32_t kNoParent = 0xffffffffu;
inline constexpr std::uint8_t kNoSibling = 0xffu;

// Tree root voxel: the closed infinity ball (center, half_extent) covering
// one sample cluster.
struct RootVoxel {
    Vec3 center = Vec3::Zero();
    double half_extent = 0.0;
};

struct TreeNode {
    Vec3 center = Vec3::Zero();
    double half_extent = 0.0;
    std::uint32_t parent_index = kNoParent;  // dense index into the level above
    std::uint8_t sibling_index = kNoSibling; // octant bits: 0 -> x, 1 -> y, 2 -> z;
                                             // a set bit is the positive side
    bool non_empty = false;                  // meaningful on the leaf level
};

// Octree forest: dense per-level node arrays. Level l holds roots*8^l nodes
// in (parent, sibling) order, so a node's dense index is parent*8 + sibling.
struct Forest {
    std::vector<RootVoxel> roots;
    std::vector<std::vector<TreeNode>> levels;
    double alpha = 0.0;
    int depth = 0;

    const std::vector<TreeNode>& leaves() const { return levels.back(); }
    std::vector<TreeNode>& leaves() { return levels.back(); }
    std::int64_t leaf_count() const {
        return static_cast<std::int64_t>(levels.back().size());
    }
    std::int64_t nonempty_leaf_count() const;
};

// Greedy max-min selection over Euclidean distance, starting from
// initial_index. Returns n point indices; ties take the lowest index.
std::vector<std::int64_t> farthest_point_sampling(const MatX3& points,
                                                  std::int64_t n,
                                                  std::int64_t initial_index);

// Root voxels: FPS centroids plus the infinity-norm radius of each nearest-
// centroid cluster. By construction the returned balls cover every sample.
// Centers and scales are rounded through single precision (scales upward) so
// that serialization cannot break the coverage guarantee.
std::vector<RootVoxel> init_roots(const SurfaceSamples& samples,
                                  std::int64_t root_count,
                                  std::int64_t initial_index);

// Emits 8 children per node for `depth` levels. Child half-extent is
// parent*(1+alpha)/2; centers sit at parent_center +/- parent_half/2.
Forest subdivide(const std::vector<RootVoxel>& roots, double alpha, int depth);

// Marks a leaf non-empty iff at least one sample lies inside its closed
// infinity ball.
void classify_nonempty(Forest& forest, const SurfaceSamples& samples);

// Infinity-norm reach of any depth-d descendant voxel from its root center,
// as a multiple of the root half-extent.
double descendant_reach_factor(double alpha, int depth);

// Sample indices within `reach` (infinity norm) of each root center. Used to
// restrict per-leaf scans to the root's neighborhood.
std::vector<std::vector<std::int64_t>> bucket_samples_by_root(
    const Forest& forest, const SurfaceSamples& samples);

} // namespace gala
