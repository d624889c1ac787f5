#include "gala/eval_metrics.hpp"

#include "gala/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace gala {

namespace {

// Median-split kd-tree over a fixed point set; nearest-neighbor queries only.
class KdTree {
public:
    explicit KdTree(const MatX3& points) : points_(points) {
        indices_.resize(points.rows());
        std::iota(indices_.begin(), indices_.end(), 0);
        nodes_.reserve(static_cast<std::size_t>(points.rows()) / kLeafSize * 2 + 2);
        if (points.rows() > 0)
            build(0, static_cast<std::int32_t>(points.rows()));
    }

    double nearest_sq(const Vec3& q) const {
        double best = std::numeric_limits<double>::infinity();
        search(0, q, best);
        return best;
    }

private:
    static constexpr std::int32_t kLeafSize = 16;

    struct Node {
        double split = 0.0;
        std::int32_t axis = -1;  // -1 marks a leaf
        std::int32_t left = -1, right = -1;
        std::int32_t first = 0, count = 0;
    };

    std::int32_t build(std::int32_t first, std::int32_t count) {
        const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
        nodes_.emplace_back();
        if (count <= kLeafSize) {
            nodes_[id].first = first;
            nodes_[id].count = count;
            return id;
        }

        Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
        Vec3 hi = -lo;
        for (std::int32_t i = first; i < first + count; ++i) {
            const Vec3 p = points_.row(indices_[i]);
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        int axis = 0;
        (hi - lo).maxCoeff(&axis);

        const std::int32_t half = count / 2;
        std::nth_element(indices_.begin() + first, indices_.begin() + first + half,
                         indices_.begin() + first + count,
                         [&](std::int32_t a, std::int32_t b) {
                             return points_(a, axis) < points_(b, axis);
                         });
        const double split = points_(indices_[first + half], axis);

        nodes_[id].axis = axis;
        nodes_[id].split = split;
        const std::int32_t left = build(first, half);
        const std::int32_t right = build(first + half, count - half);
        nodes_[id].left = left;
        nodes_[id].right = right;
        return id;
    }

    void search(std::int32_t id, const Vec3& q, double& best) const {
        const Node& node = nodes_[id];
        if (node.axis < 0) {
            for (std::int32_t i = node.first; i < node.first + node.count; ++i) {
                const double d = (Vec3(points_.row(indices_[i])) - q).squaredNorm();
                if (d < best) best = d;
            }
            return;
        }
        const double delta = q[node.axis] - node.split;
        const std::int32_t near = delta < 0.0 ? node.left : node.right;
        const std::int32_t far = delta < 0.0 ? node.right : node.left;
        search(near, q, best);
        if (delta * delta < best) search(far, q, best);
    }

    const MatX3& points_;
    std::vector<std::int32_t> indices_;
    std::vector<Node> nodes_;
};

// Mean squared and max nearest-neighbor distance from each row of `from`
// into `to`.
std::pair<double, double> directed_stats(const MatX3& from, const KdTree& to,
                                         int threads) {
    const std::int64_t n = from.rows();
    const std::int64_t blocks = 64;
    const std::int64_t block_size = std::max<std::int64_t>(1, (n + blocks - 1) / blocks);
    std::vector<double> sums((n + block_size - 1) / block_size, 0.0);
    std::vector<double> maxes(sums.size(), 0.0);

    parallel_for_blocks(
        n, block_size,
        [&](std::int64_t begin, std::int64_t end) {
            double sum = 0.0, mx = 0.0;
            for (std::int64_t i = begin; i < end; ++i) {
                const double d = to.nearest_sq(from.row(i));
                sum += d;
                mx = std::max(mx, d);
            }
            sums[begin / block_size] = sum;
            maxes[begin / block_size] = mx;
        },
        threads);

    double sum = 0.0, mx = 0.0;
    for (double s : sums) sum += s;
    for (double m : maxes) mx = std::max(mx, m);
    return {sum / static_cast<double>(n), mx};
}

} // namespace

double chamfer_points(const MatX3& a, const MatX3& b, int threads) {
    if (a.rows() == 0 || b.rows() == 0)
        throw InvalidInput("chamfer: empty point set");
    const KdTree tree_a(a), tree_b(b);
    return directed_stats(a, tree_b, threads).first +
           directed_stats(b, tree_a, threads).first;
}

double hausdorff_points(const MatX3& a, const MatX3& b, int threads) {
    if (a.rows() == 0 || b.rows() == 0)
        throw InvalidInput("hausdorff: empty point set");
    const KdTree tree_a(a), tree_b(b);
    const double ab = directed_stats(a, tree_b, threads).second;
    const double ba = directed_stats(b, tree_a, threads).second;
    return std::sqrt(std::max(ab, ba));
}

namespace {

MatX3 normalized_samples(const TriMesh& mesh, std::int64_t n, std::uint64_t seed) {
    if (mesh.empty()) throw InvalidInput("metric input mesh is empty");
    return sample_surface(normalize_mesh(mesh), n, seed).points;
}

} // namespace

double chamfer(const TriMesh& a, const TriMesh& b, std::int64_t n_samples,
               std::uint64_t seed, int threads) {
    return chamfer_points(normalized_samples(a, n_samples, seed),
                          normalized_samples(b, n_samples, seed), threads);
}

double hausdorff(const TriMesh& a, const TriMesh& b, std::int64_t n_samples,
                 std::uint64_t seed, int threads) {
    return hausdorff_points(normalized_samples(a, n_samples, seed),
                            normalized_samples(b, n_samples, seed), threads);
}

} // namespace gala
