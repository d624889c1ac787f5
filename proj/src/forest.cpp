#include "gala/forest.hpp"

#include <cmath>
#include <limits>

namespace gala {

std::int64_t Forest::nonempty_leaf_count() const {
    std::int64_t n = 0;
    for (const TreeNode& leaf : levels.back())
        if (leaf.non_empty) ++n;
    return n;
}

std::vector<std::int64_t> farthest_point_sampling(const MatX3& points,
                                                  std::int64_t n,
                                                  std::int64_t initial_index) {
    const std::int64_t count = points.rows();
    if (n < 1 || n > count)
        throw InvalidInput("farthest_point_sampling: n out of range");
    if (initial_index < 0 || initial_index >= count)
        throw InvalidInput("farthest_point_sampling: initial index out of range");

    std::vector<std::int64_t> selected;
    selected.reserve(n);
    std::vector<double> min_dist_sq(count, std::numeric_limits<double>::infinity());
    std::vector<char> taken(count, 0);

    std::int64_t current = initial_index;
    for (std::int64_t k = 0; k < n; ++k) {
        selected.push_back(current);
        taken[current] = 1;
        const Vec3 p = points.row(current);
        std::int64_t next = -1;
        double best = -1.0;
        for (std::int64_t i = 0; i < count; ++i) {
            const double d = (Vec3(points.row(i)) - p).squaredNorm();
            if (d < min_dist_sq[i]) min_dist_sq[i] = d;
            if (!taken[i] && min_dist_sq[i] > best) {
                best = min_dist_sq[i];
                next = i;
            }
        }
        if (next < 0) break;  // every point selected already
        current = next;
    }
    return selected;
}

std::vector<RootVoxel> init_roots(const SurfaceSamples& samples,
                                  std::int64_t root_count,
                                  std::int64_t initial_index) {
    if (root_count < 1) throw InvalidInput("init_roots: need at least one root");
    const auto picked =
        farthest_point_sampling(samples.points, root_count, initial_index);

    std::vector<RootVoxel> roots(root_count);
    for (std::int64_t r = 0; r < root_count; ++r) {
        Vec3 c = samples.points.row(picked[r]);
        for (int k = 0; k < 3; ++k) c[k] = static_cast<float>(c[k]);
        roots[r].center = c;
    }

    // Nearest-centroid assignment; the cluster radius is the max infinity-norm
    // offset, rounded up to the next float so the cover survives narrowing.
    for (std::int64_t i = 0; i < samples.count(); ++i) {
        const Vec3 x = samples.points.row(i);
        std::int64_t owner = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::int64_t r = 0; r < root_count; ++r) {
            const double d = (x - roots[r].center).squaredNorm();
            if (d < best) {
                best = d;
                owner = r;
            }
        }
        const double radius = (x - roots[owner].center).lpNorm<Eigen::Infinity>();
        if (radius > roots[owner].half_extent) roots[owner].half_extent = radius;
    }

    for (RootVoxel& root : roots) {
        root.half_extent = std::max(root.half_extent, kMinScale);
        float s = static_cast<float>(root.half_extent);
        if (static_cast<double>(s) < root.half_extent)
            s = std::nextafter(s, std::numeric_limits<float>::infinity());
        root.half_extent = s;
    }
    return roots;
}

Forest subdivide(const std::vector<RootVoxel>& roots, double alpha, int depth) {
    if (alpha < 0.0) throw InvalidInput("subdivide: alpha must be >= 0");
    if (depth < 1) throw InvalidInput("subdivide: depth must be >= 1");
    if (roots.empty()) throw InvalidInput("subdivide: no roots");

    Forest forest;
    forest.roots = roots;
    forest.alpha = alpha;
    forest.depth = depth;
    forest.levels.resize(depth + 1);

    auto& level0 = forest.levels[0];
    level0.resize(roots.size());
    for (std::size_t r = 0; r < roots.size(); ++r) {
        level0[r].center = roots[r].center;
        level0[r].half_extent = roots[r].half_extent;
    }

    const double shrink = (1.0 + alpha) / 2.0;
    for (int l = 1; l <= depth; ++l) {
        const auto& parents = forest.levels[l - 1];
        auto& children = forest.levels[l];
        children.resize(parents.size() * 8);
        for (std::size_t p = 0; p < parents.size(); ++p) {
            const double offset = parents[p].half_extent / 2.0;
            for (int octant = 0; octant < 8; ++octant) {
                TreeNode& child = children[p * 8 + octant];
                child.parent_index = static_cast<std::uint32_t>(p);
                child.sibling_index = static_cast<std::uint8_t>(octant);
                child.half_extent = parents[p].half_extent * shrink;
                child.center = parents[p].center;
                child.center.x() += (octant & 1) ? offset : -offset;
                child.center.y() += (octant & 2) ? offset : -offset;
                child.center.z() += (octant & 4) ? offset : -offset;
            }
        }
    }
    return forest;
}

double descendant_reach_factor(double alpha, int depth) {
    const double shrink = (1.0 + alpha) / 2.0;
    double reach = 0.0;
    double parent_half = 1.0;
    for (int l = 0; l < depth; ++l) {
        reach += parent_half / 2.0;
        parent_half *= shrink;
    }
    return reach + parent_half;  // center offsets plus the leaf half-extent
}

std::vector<std::vector<std::int64_t>> bucket_samples_by_root(
    const Forest& forest, const SurfaceSamples& samples) {
    const double factor = descendant_reach_factor(forest.alpha, forest.depth);
    std::vector<std::vector<std::int64_t>> buckets(forest.roots.size());
    for (std::int64_t i = 0; i < samples.count(); ++i) {
        const Vec3 x = samples.points.row(i);
        for (std::size_t r = 0; r < forest.roots.size(); ++r) {
            const double reach = factor * forest.roots[r].half_extent;
            if ((x - forest.roots[r].center).lpNorm<Eigen::Infinity>() <= reach)
                buckets[r].push_back(i);
        }
    }
    return buckets;
}

void classify_nonempty(Forest& forest, const SurfaceSamples& samples) {
    const auto buckets = bucket_samples_by_root(forest, samples);
    auto& leaves = forest.leaves();
    const std::int64_t per_root = forest.leaf_count() /
                                  static_cast<std::int64_t>(forest.roots.size());
    for (std::int64_t leaf = 0; leaf < forest.leaf_count(); ++leaf) {
        const TreeNode& node = leaves[leaf];
        const auto& candidates = buckets[leaf / per_root];
        bool hit = false;
        for (std::int64_t i : candidates) {
            const Vec3 x = samples.points.row(i);
            if ((x - node.center).lpNorm<Eigen::Infinity>() <= node.half_extent) {
                hit = true;
                break;
            }
        }
        leaves[leaf].non_empty = hit;
    }
}

} // namespace gala
