#include "gala/sdf_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gala {

Vec3 closest_point_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                            const Vec3& c, Feature* feature) {
    const Vec3 ab = b - a;
    const Vec3 ac = c - a;
    const Vec3 ap = p - a;

    const double d1 = ab.dot(ap);
    const double d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) {
        *feature = Feature::kVertexA;
        return a;
    }

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp);
    const double d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) {
        *feature = Feature::kVertexB;
        return b;
    }

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        *feature = Feature::kEdgeAB;
        return a + (d1 / (d1 - d3)) * ab;
    }

    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp);
    const double d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) {
        *feature = Feature::kVertexC;
        return c;
    }

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        *feature = Feature::kEdgeCA;
        return a + (d2 / (d2 - d6)) * ac;
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0) {
        *feature = Feature::kEdgeBC;
        return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
    }

    *feature = Feature::kFace;
    const double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

namespace {

struct BuildItem {
    Vec3 centroid, box_min, box_max;
    std::int32_t triangle;
};

std::int32_t build_node(std::vector<BvhNode>& nodes, std::vector<BuildItem>& items,
                        std::int32_t first, std::int32_t count, int leaf_size) {
    BvhNode node;
    node.box_min = Vec3::Constant(std::numeric_limits<double>::infinity());
    node.box_max = -node.box_min;
    for (std::int32_t i = first; i < first + count; ++i) {
        node.box_min = node.box_min.cwiseMin(items[i].box_min);
        node.box_max = node.box_max.cwiseMax(items[i].box_max);
    }

    const std::int32_t index = static_cast<std::int32_t>(nodes.size());
    nodes.push_back(node);

    if (count <= leaf_size) {
        nodes[index].first = first;
        nodes[index].count = count;
        return index;
    }

    Vec3 clo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 chi = -clo;
    for (std::int32_t i = first; i < first + count; ++i) {
        clo = clo.cwiseMin(items[i].centroid);
        chi = chi.cwiseMax(items[i].centroid);
    }
    int axis = 0;
    (chi - clo).maxCoeff(&axis);

    const std::int32_t half = count / 2;
    std::nth_element(items.begin() + first, items.begin() + first + half,
                     items.begin() + first + count,
                     [axis](const BuildItem& a, const BuildItem& b) {
                         if (a.centroid[axis] != b.centroid[axis])
                             return a.centroid[axis] < b.centroid[axis];
                         return a.triangle < b.triangle;
                     });

    const std::int32_t left = build_node(nodes, items, first, half, leaf_size);
    const std::int32_t right =
        build_node(nodes, items, first + half, count - half, leaf_size);
    nodes[index].left = left;
    nodes[index].right = right;
    return index;
}

double box_dist_sq(const BvhNode& node, const Vec3& p) {
    double d = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double lo = node.box_min[k] - p[k];
        const double hi = p[k] - node.box_max[k];
        const double gap = std::max({lo, hi, 0.0});
        d += gap * gap;
    }
    return d;
}

// Updates best with (d2, tri); ties go to the lowest triangle id so that the
// answer is independent of visit order.
inline void consider(ClosestHit& best, double d2, std::int32_t tri, const Vec3& pt,
                     Feature feature) {
    if (d2 < best.dist_sq || (d2 == best.dist_sq && tri < best.triangle)) {
        best.dist_sq = d2;
        best.triangle = tri;
        best.point = pt;
        best.feature = feature;
    }
}

std::uint64_t edge_key(std::int64_t a, std::int64_t b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

} // namespace

Bvh build_bvh(const TriMesh& mesh, int leaf_size) {
    if (mesh.empty()) throw InvalidInput("cannot build a BVH over an empty mesh");

    std::vector<BuildItem> items(mesh.triangle_count());
    for (std::int64_t f = 0; f < mesh.triangle_count(); ++f) {
        const Vec3 a = mesh.vertices.row(mesh.triangles(f, 0));
        const Vec3 b = mesh.vertices.row(mesh.triangles(f, 1));
        const Vec3 c = mesh.vertices.row(mesh.triangles(f, 2));
        items[f] = {(a + b + c) / 3.0, a.cwiseMin(b).cwiseMin(c),
                    a.cwiseMax(b).cwiseMax(c), static_cast<std::int32_t>(f)};
    }

    Bvh bvh;
    bvh.nodes.reserve(items.size() * 2);
    build_node(bvh.nodes, items, 0, static_cast<std::int32_t>(items.size()),
               leaf_size);
    bvh.order.resize(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) bvh.order[i] = items[i].triangle;
    return bvh;
}

SdfOracle build_oracle(const TriMesh& mesh) {
    if (mesh.empty()) throw InvalidInput("cannot build an oracle over an empty mesh");
    if (signed_volume(mesh) <= 0.0)
        throw InvalidInput("inconsistent winding: signed volume is not positive");

    SdfOracle oracle;
    oracle.mesh = mesh;
    oracle.bvh = build_bvh(mesh);

    // Pack triangle corners in BVH leaf order.
    oracle.packed_triangles.resize(static_cast<std::size_t>(mesh.triangle_count()) * 9);
    oracle.packed_ids.resize(mesh.triangle_count());
    for (std::int64_t i = 0; i < mesh.triangle_count(); ++i) {
        const std::int32_t f = oracle.bvh.order[i];
        oracle.packed_ids[i] = f;
        double* dst = oracle.packed_triangles.data() + 9 * i;
        for (int v = 0; v < 3; ++v)
            for (int k = 0; k < 3; ++k)
                dst[3 * v + k] = mesh.vertices(mesh.triangles(f, v), k);
    }

    // Angle-weighted vertex pseudonormals and edge pseudonormals (sum of the
    // two incident face normals).
    oracle.vertex_pseudonormals = MatX3::Zero(mesh.vertex_count(), 3);
    for (std::int64_t f = 0; f < mesh.triangle_count(); ++f) {
        const Vec3 n = mesh.face_normals.row(f);
        const int i0 = mesh.triangles(f, 0);
        const int i1 = mesh.triangles(f, 1);
        const int i2 = mesh.triangles(f, 2);
        const Vec3 p0 = mesh.vertices.row(i0);
        const Vec3 p1 = mesh.vertices.row(i1);
        const Vec3 p2 = mesh.vertices.row(i2);

        auto corner_angle = [](const Vec3& u, const Vec3& v) {
            return std::atan2(u.cross(v).norm(), u.dot(v));
        };
        oracle.vertex_pseudonormals.row(i0) += corner_angle(p1 - p0, p2 - p0) * n;
        oracle.vertex_pseudonormals.row(i1) += corner_angle(p2 - p1, p0 - p1) * n;
        oracle.vertex_pseudonormals.row(i2) += corner_angle(p0 - p2, p1 - p2) * n;

        for (const std::uint64_t key :
             {edge_key(i0, i1), edge_key(i1, i2), edge_key(i2, i0)}) {
            // try_emplace: the default-constructed Vec3 is uninitialized.
            auto [it, inserted] =
                oracle.edge_pseudonormals.try_emplace(key, Vec3::Zero());
            it->second += n;
        }
    }
    return oracle;
}

namespace {

// Shared hit evaluation over a packed-triangle range.
void scan_range(const SdfOracle& oracle, const Vec3& x, std::int32_t first,
                std::int32_t count, ClosestHit& best) {
    for (std::int32_t i = first; i < first + count; ++i) {
        const double* t = oracle.packed_triangles.data() + 9 * i;
        const Vec3 a(t[0], t[1], t[2]);
        const Vec3 b(t[3], t[4], t[5]);
        const Vec3 c(t[6], t[7], t[8]);
        Feature feature;
        const Vec3 pt = closest_point_triangle(x, a, b, c, &feature);
        consider(best, (x - pt).squaredNorm(), oracle.packed_ids[i], pt, feature);
    }
}

double sign_from_feature(const SdfOracle& oracle, const Vec3& x,
                         const ClosestHit& hit) {
    const std::int32_t f = hit.triangle;
    Vec3 normal;
    switch (hit.feature) {
        case Feature::kFace:
            normal = oracle.mesh.face_normals.row(f);
            break;
        case Feature::kVertexA:
            normal = oracle.vertex_pseudonormals.row(oracle.mesh.triangles(f, 0));
            break;
        case Feature::kVertexB:
            normal = oracle.vertex_pseudonormals.row(oracle.mesh.triangles(f, 1));
            break;
        case Feature::kVertexC:
            normal = oracle.vertex_pseudonormals.row(oracle.mesh.triangles(f, 2));
            break;
        case Feature::kEdgeAB:
            normal = oracle.edge_pseudonormals.at(
                edge_key(oracle.mesh.triangles(f, 0), oracle.mesh.triangles(f, 1)));
            break;
        case Feature::kEdgeBC:
            normal = oracle.edge_pseudonormals.at(
                edge_key(oracle.mesh.triangles(f, 1), oracle.mesh.triangles(f, 2)));
            break;
        case Feature::kEdgeCA:
            normal = oracle.edge_pseudonormals.at(
                edge_key(oracle.mesh.triangles(f, 2), oracle.mesh.triangles(f, 0)));
            break;
    }
    return normal.dot(x - hit.point) < 0.0 ? -1.0 : 1.0;
}

} // namespace

ClosestHit closest_point(const SdfOracle& oracle, const Vec3& x) {
    ClosestHit best;
    best.dist_sq = std::numeric_limits<double>::infinity();

    std::int32_t stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const BvhNode& node = oracle.bvh.nodes[stack[--top]];
        // Equal distances are not pruned, so ties resolve identically to the
        // exhaustive scan.
        if (box_dist_sq(node, x) > best.dist_sq) continue;
        if (node.is_leaf()) {
            scan_range(oracle, x, node.first, node.count, best);
            continue;
        }
        const double dl = box_dist_sq(oracle.bvh.nodes[node.left], x);
        const double dr = box_dist_sq(oracle.bvh.nodes[node.right], x);
        // Push the farther child first so the nearer one is visited next.
        if (dl <= dr) {
            if (dr <= best.dist_sq) stack[top++] = node.right;
            if (dl <= best.dist_sq) stack[top++] = node.left;
        } else {
            if (dl <= best.dist_sq) stack[top++] = node.left;
            if (dr <= best.dist_sq) stack[top++] = node.right;
        }
    }
    return best;
}

ClosestHit closest_point_brute(const SdfOracle& oracle, const Vec3& x) {
    ClosestHit best;
    best.dist_sq = std::numeric_limits<double>::infinity();
    scan_range(oracle, x, 0, static_cast<std::int32_t>(oracle.packed_ids.size()),
               best);
    return best;
}

double signed_distance(const SdfOracle& oracle, const Vec3& x) {
    const ClosestHit hit = closest_point(oracle, x);
    return sign_from_feature(oracle, x, hit) * std::sqrt(hit.dist_sq);
}

double signed_distance_brute(const SdfOracle& oracle, const Vec3& x) {
    const ClosestHit hit = closest_point_brute(oracle, x);
    return sign_from_feature(oracle, x, hit) * std::sqrt(hit.dist_sq);
}

double truncated_sdf(const SdfOracle& oracle, const Vec3& x) {
    return std::clamp(signed_distance(oracle, x), -oracle.truncation,
                      oracle.truncation);
}

} // namespace gala
