#pragma once

// Test-only oracles and fixtures. Reference implementations here stay
// independent of the library code paths they check.

#include "gala/gala_rep.hpp"
#include "gala/rng.hpp"
#include "gala/tri_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace gala::testing {

inline std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

// Every undirected edge referenced by exactly two triangles.
inline bool watertight(const TriMesh& mesh) {
    std::map<std::pair<int, int>, int> edges;
    for (std::int64_t f = 0; f < mesh.triangle_count(); ++f)
        for (int k = 0; k < 3; ++k) {
            const int a = mesh.triangles(f, k);
            const int b = mesh.triangles(f, (k + 1) % 3);
            ++edges[std::minmax(a, b)];
        }
    for (const auto& [edge, count] : edges)
        if (count != 2) return false;
    return !edges.empty();
}

// Exhaustive greedy max-min selection, the reference for FPS.
inline std::vector<std::int64_t> brute_force_fps(const MatX3& points,
                                                 std::int64_t n,
                                                 std::int64_t initial) {
    std::vector<std::int64_t> picked{initial};
    std::vector<char> taken(points.rows(), 0);
    taken[initial] = 1;
    while (static_cast<std::int64_t>(picked.size()) < n) {
        std::int64_t best = -1;
        double best_dist = -1.0;
        for (std::int64_t i = 0; i < points.rows(); ++i) {
            if (taken[i]) continue;
            double nearest = std::numeric_limits<double>::infinity();
            for (std::int64_t s : picked)
                nearest = std::min(nearest,
                                   (Vec3(points.row(i)) - Vec3(points.row(s))).squaredNorm());
            if (nearest > best_dist) {
                best_dist = nearest;
                best = i;
            }
        }
        picked.push_back(best);
        taken[best] = 1;
    }
    return picked;
}

// Plain-array reimplementation of the blended query (duplicate-path oracle).
inline double scalar_query(const GalaRep& rep, const Vec3& x) {
    const int m = rep.params.grid_res;
    double weight_sum = 0.0, value_sum = 0.0;
    for (const LocalGrid& grid : rep.grids) {
        double r[3][3];
        {
            const Mat3 rot = grid.rotation();
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) r[i][j] = rot(i, j);
        }
        const double dx = x[0] - grid.center[0];
        const double dy = x[1] - grid.center[1];
        const double dz = x[2] - grid.center[2];
        double local[3];
        for (int a = 0; a < 3; ++a)
            local[a] = (r[0][a] * dx + r[1][a] * dy + r[2][a] * dz) /
                       grid.half_scales[a];
        const double reach = std::max(
            {std::abs(local[0]), std::abs(local[1]), std::abs(local[2])});
        const double w = 1.0 - reach;
        if (w <= 0.0) continue;

        int cell[3];
        double frac[3];
        for (int a = 0; a < 3; ++a) {
            double t = (local[a] + 1.0) * 0.5 * (m - 1);
            t = std::min(std::max(t, 0.0), double(m - 1));
            cell[a] = std::min(static_cast<int>(t), m - 2);
            frac[a] = t - cell[a];
        }
        double value = 0.0;
        for (int dzc = 0; dzc < 2; ++dzc)
            for (int dyc = 0; dyc < 2; ++dyc)
                for (int dxc = 0; dxc < 2; ++dxc) {
                    const double beta = (dxc ? frac[0] : 1 - frac[0]) *
                                        (dyc ? frac[1] : 1 - frac[1]) *
                                        (dzc ? frac[2] : 1 - frac[2]);
                    const std::int64_t node =
                        (static_cast<std::int64_t>(cell[2] + dzc) * m + cell[1] + dyc) * m +
                        cell[0] + dxc;
                    value += beta * grid.values[node];
                }
        weight_sum += w;
        value_sum += w * value;
    }
    return weight_sum > 0.0 ? value_sum / weight_sum : kOutsideValue;
}

// Union-find connected-component labeling; the independent oracle for the
// per-slice sign flip.
inline void flip_slice_oracle(float* slice, int nx, int ny, double eps) {
    const auto idx = [nx](int x, int y) { return y * nx + x; };
    const auto is_island = [&](int x, int y) {
        return std::abs(double(slice[idx(x, y)]) - 0.1) < eps;
    };

    std::vector<int> parent(static_cast<std::size_t>(nx) * ny);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    auto unite = [&](int a, int b) { parent[find(a)] = find(b); };

    for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) {
            if (!is_island(x, y)) continue;
            if (x + 1 < nx && is_island(x + 1, y)) unite(idx(x, y), idx(x + 1, y));
            if (y + 1 < ny && is_island(x, y + 1)) unite(idx(x, y), idx(x, y + 1));
        }

    std::map<int, bool> surrounded;
    for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) {
            if (!is_island(x, y)) continue;
            const int root = find(idx(x, y));
            auto [it, inserted] = surrounded.try_emplace(root, true);
            if (x == 0 || x == nx - 1 || y == 0 || y == ny - 1) it->second = false;
            const int dirs[4][2] = {{0, 1}, {0, -1}, {1, 0}, {-1, 0}};
            for (const auto& d : dirs) {
                const int ax = x + d[0], ay = y + d[1];
                if (ax < 0 || ax >= nx || ay < 0 || ay >= ny) continue;
                const double v = slice[idx(ax, ay)];
                if (!is_island(ax, ay) && v >= 0.0) it->second = false;
            }
        }

    for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x)
            if (is_island(x, y) && surrounded[find(idx(x, y))])
                slice[idx(x, y)] = -slice[idx(x, y)];
}

// Moeller-Trumbore ray/triangle intersection; returns hit parameter t.
inline bool ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                         const Vec3& b, const Vec3& c, double* t_out) {
    const Vec3 e1 = b - a, e2 = c - a;
    const Vec3 p = dir.cross(e2);
    const double det = e1.dot(p);
    if (std::abs(det) < 1e-14) return false;
    const double inv = 1.0 / det;
    const Vec3 s = origin - a;
    const double u = s.dot(p) * inv;
    if (u < 0.0 || u > 1.0) return false;
    const Vec3 q = s.cross(e1);
    const double v = dir.dot(q) * inv;
    if (v < 0.0 || u + v > 1.0) return false;
    const double t = e2.dot(q) * inv;
    if (t <= 0.0) return false;
    *t_out = t;
    return true;
}

// Mean and per-axis variance of the uniform distribution over a triangle,
// via dense barycentric quadrature (the independent oracle for sampling
// statistics).
inline void triangle_moments(const Vec3& a, const Vec3& b, const Vec3& c,
                             Vec3* mean, Vec3* variance, int resolution = 200) {
    Vec3 sum = Vec3::Zero(), sum_sq = Vec3::Zero();
    double count = 0.0;
    for (int i = 0; i < resolution; ++i)
        for (int j = 0; j < resolution - i; ++j) {
            const double u = (i + 1.0 / 3.0) / resolution;
            const double v = (j + 1.0 / 3.0) / resolution;
            const Vec3 p = a + u * (b - a) + v * (c - a);
            sum += p;
            sum_sq += p.cwiseProduct(p);
            count += 1.0;
        }
    *mean = sum / count;
    *variance = sum_sq / count - mean->cwiseProduct(*mean);
}

// A free-standing grid at the given center with constant value.
inline LocalGrid make_test_grid(const Vec3& center, const Vec3& half_scales,
                                double value, int m,
                                const Quat& orientation = Quat::Identity()) {
    LocalGrid grid;
    grid.center = center;
    grid.half_scales = half_scales;
    grid.orientation = orientation;
    grid.values = VecXd::Constant(static_cast<std::int64_t>(m) * m * m, value);
    return grid;
}

// Minimal rep wrapper around hand-built grids (forest left empty; queries
// and gradients never touch it).
inline GalaRep make_test_rep(std::vector<LocalGrid> grids, int m) {
    GalaRep rep;
    rep.params.grid_res = m;
    rep.params.hist_bins = 2 * m;
    rep.params.root_count = 1;
    rep.grids = std::move(grids);
    return rep;
}

// Random but structurally valid quantized rep: random roots (float-valued),
// a random ascending subset of leaves, random codes.
inline GalaRep random_quantized_rep(std::uint64_t seed) {
    SplitMix64 rng(seed);
    GalaRep rep;
    rep.params.root_count = 2 + static_cast<int>(rng.below(12));
    rep.params.depth = 1 + static_cast<int>(rng.below(2));
    rep.params.grid_res = 3 + static_cast<int>(rng.below(4));
    rep.params.hist_bins = 2 * rep.params.grid_res;
    rep.params.alpha = static_cast<float>(rng.uniform(0.0, 0.5));
    rep.mode = ExtractionMode::kFull;

    std::vector<RootVoxel> roots(rep.params.root_count);
    for (RootVoxel& root : roots) {
        root.center = Vec3(static_cast<float>(rng.uniform(-0.4, 0.4)),
                           static_cast<float>(rng.uniform(-0.4, 0.4)),
                           static_cast<float>(rng.uniform(-0.4, 0.4)));
        root.half_extent = static_cast<float>(rng.uniform(0.01, 0.2));
    }
    rep.forest = subdivide(roots, rep.params.alpha, rep.params.depth);

    const std::int64_t slots = rep.params.leaf_slots();
    for (std::int64_t leaf = 0; leaf < slots; ++leaf) {
        if (rng.below(3) != 0) continue;  // ~1/3 occupancy
        GridCodes codes;
        codes.euler = {static_cast<std::uint8_t>(rng.below(kEulerCodes)),
                       static_cast<std::uint8_t>(rng.below(kEulerCodes)),
                       static_cast<std::uint8_t>(rng.below(kEulerCodes))};
        for (int a = 0; a < 3; ++a) {
            codes.scales[a] = static_cast<std::uint8_t>(rng.below(256));
            codes.center[a] = static_cast<std::uint8_t>(rng.below(256));
        }
        codes.values.resize(rep.params.values_per_grid());
        for (auto& v : codes.values) v = static_cast<std::uint8_t>(rng.below(256));

        rep.forest.leaves()[leaf].non_empty = true;
        rep.grids.push_back(grid_from_codes(codes, leaf, rep.params.grid_res));
        rep.codes.push_back(std::move(codes));
    }
    rep.quantized = true;
    return rep;
}

// Rep with randomized grid geometry and values near the origin.
inline GalaRep make_random_rep(std::uint64_t seed, int n_grids, int m) {
    SplitMix64 rng(seed);
    std::vector<LocalGrid> grids;
    for (int g = 0; g < n_grids; ++g) {
        Quat q(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
               rng.uniform(-1, 1));
        if (q.norm() < 1e-3) q = Quat::Identity();
        q.normalize();
        LocalGrid grid = make_test_grid(
            Vec3(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2),
                 rng.uniform(-0.2, 0.2)),
            Vec3(rng.uniform(0.02, 0.1), rng.uniform(0.02, 0.1),
                 rng.uniform(0.02, 0.1)),
            0.0, m, q);
        for (std::int64_t k = 0; k < grid.values.size(); ++k)
            grid.values[k] = rng.uniform(-0.1, 0.1);
        grid.leaf_index = g;
        grids.push_back(std::move(grid));
    }
    return make_test_rep(std::move(grids), m);
}

} // namespace gala::testing
