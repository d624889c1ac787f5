#include "gala/reconstruct.hpp"

#include "gala/parallel.hpp"
#include "mc_tables.hpp"

#include <array>
#include <cmath>
#include <unordered_map>
#include <vector>

namespace gala {

SdfVolume sample_volume(const GalaRep& rep, int resolution, int threads) {
    if (resolution < 8) throw InvalidInput("volume resolution must be >= 8");

    SdfVolume volume;
    volume.resolution = resolution;
    volume.values.resize(static_cast<std::size_t>(resolution) * resolution *
                         resolution);

    const GridIndex index(rep);
    parallel_for(
        resolution,
        [&](std::int64_t k) {
            const double z = volume.coord(static_cast<int>(k));
            std::size_t out = static_cast<std::size_t>(k) * resolution * resolution;
            for (int j = 0; j < resolution; ++j) {
                const double y = volume.coord(j);
                for (int i = 0; i < resolution; ++i, ++out) {
                    const double v = query_sdf(rep, index, Vec3(volume.coord(i), y, z));
                    volume.values[out] = static_cast<float>(
                        std::clamp(v, -kSdfBound, kSdfBound));
                }
            }
        },
        threads);
    return volume;
}

namespace {

bool near_outside_default(double v, double eps) {
    return std::abs(v - kOutsideValue) < eps;
}

} // namespace

void flip_slice(float* slice, int nx, int ny, double eps) {
    const auto idx = [nx](int x, int y) { return y * nx + x; };
    std::vector<char> visited(static_cast<std::size_t>(nx) * ny, 0);
    std::vector<std::pair<int, int>> stack;
    std::vector<int> component;
    constexpr int kDirs[4][2] = {{0, 1}, {0, -1}, {1, 0}, {-1, 0}};

    for (int sy = 0; sy < ny; ++sy) {
        for (int sx = 0; sx < nx; ++sx) {
            if (visited[idx(sx, sy)] ||
                !near_outside_default(slice[idx(sx, sy)], eps))
                continue;

            stack.clear();
            component.clear();
            stack.emplace_back(sx, sy);
            visited[idx(sx, sy)] = 1;
            bool surrounded = true;

            while (!stack.empty()) {
                const auto [x, y] = stack.back();
                stack.pop_back();
                component.push_back(idx(x, y));
                for (const auto& d : kDirs) {
                    const int nxp = x + d[0];
                    const int nyp = y + d[1];
                    if (nxp < 0 || nxp >= nx || nyp < 0 || nyp >= ny) {
                        surrounded = false;  // the component touches the border
                        continue;
                    }
                    const double v = slice[idx(nxp, nyp)];
                    if (near_outside_default(v, eps)) {
                        if (!visited[idx(nxp, nyp)]) {
                            visited[idx(nxp, nyp)] = 1;
                            stack.emplace_back(nxp, nyp);
                        }
                    } else if (v >= 0.0) {
                        surrounded = false;  // a genuine positive neighbor
                    }
                }
            }

            if (surrounded)
                for (int c : component) slice[c] = -slice[c];
        }
    }
}

namespace {

// 6-connected variant over the full volume; border faces block the flip.
void flip_volume_3d(SdfVolume& volume, double eps) {
    const int r = volume.resolution;
    const auto idx = [r](int x, int y, int z) {
        return (static_cast<std::size_t>(z) * r + y) * r + x;
    };
    std::vector<char> visited(volume.values.size(), 0);
    std::vector<std::array<int, 3>> stack;
    std::vector<std::size_t> component;
    constexpr int kDirs[6][3] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                                 {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};

    for (int sz = 0; sz < r; ++sz)
        for (int sy = 0; sy < r; ++sy)
            for (int sx = 0; sx < r; ++sx) {
                if (visited[idx(sx, sy, sz)] ||
                    !near_outside_default(volume.values[idx(sx, sy, sz)], eps))
                    continue;

                stack.clear();
                component.clear();
                stack.push_back({sx, sy, sz});
                visited[idx(sx, sy, sz)] = 1;
                bool surrounded = true;

                while (!stack.empty()) {
                    const auto [x, y, z] = stack.back();
                    stack.pop_back();
                    component.push_back(idx(x, y, z));
                    for (const auto& d : kDirs) {
                        const int nx = x + d[0], ny = y + d[1], nz = z + d[2];
                        if (nx < 0 || nx >= r || ny < 0 || ny >= r || nz < 0 ||
                            nz >= r) {
                            surrounded = false;
                            continue;
                        }
                        const double v = volume.values[idx(nx, ny, nz)];
                        if (near_outside_default(v, eps)) {
                            if (!visited[idx(nx, ny, nz)]) {
                                visited[idx(nx, ny, nz)] = 1;
                                stack.push_back({nx, ny, nz});
                            }
                        } else if (v >= 0.0) {
                            surrounded = false;
                        }
                    }
                }

                if (surrounded)
                    for (std::size_t c : component)
                        volume.values[c] = -volume.values[c];
            }
}

} // namespace

void flip_interior_signs(SdfVolume& volume, bool three_dimensional, double eps,
                         int threads) {
    if (volume.resolution < 1) return;
    if (three_dimensional) {
        flip_volume_3d(volume, eps);
        return;
    }

    const int r = volume.resolution;
    parallel_for(
        r,
        [&](std::int64_t j) {
            // Gather the y slice (x fastest, z rows), flip, scatter back.
            std::vector<float> slice(static_cast<std::size_t>(r) * r);
            for (int k = 0; k < r; ++k)
                for (int i = 0; i < r; ++i)
                    slice[static_cast<std::size_t>(k) * r + i] =
                        volume.at(i, static_cast<int>(j), k);
            flip_slice(slice.data(), r, r, eps);
            for (int k = 0; k < r; ++k)
                for (int i = 0; i < r; ++i)
                    volume.at(i, static_cast<int>(j), k) =
                        slice[static_cast<std::size_t>(k) * r + i];
        },
        threads);
}

namespace {

// Lattice edge endpoints of the 12 cube edges: {corner_a, corner_b}.
constexpr int kEdgeCorners[12][2] = {{0, 1}, {1, 2}, {3, 2}, {0, 3},
                                     {4, 5}, {5, 6}, {7, 6}, {4, 7},
                                     {0, 4}, {1, 5}, {2, 6}, {3, 7}};

// Corner offsets in (x, y, z), matching the table convention.
constexpr int kCornerOffset[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                     {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};

// Axis of each edge (the coordinate in which its two corners differ).
constexpr int kEdgeAxis[12] = {0, 1, 0, 1, 0, 1, 0, 1, 2, 2, 2, 2};

} // namespace

TriMesh marching_cubes(const SdfVolume& volume, double iso) {
    const int r = volume.resolution;
    if (r < 2) throw InvalidInput("marching_cubes: volume too small");

    std::vector<Vec3> vertices;
    std::vector<Eigen::Vector3i> faces;
    std::unordered_map<std::int64_t, std::int32_t> edge_vertex;
    edge_vertex.reserve(1 << 16);

    // Unique key of the lattice edge starting at corner (i, j, k) along axis.
    const auto edge_key = [r](int i, int j, int k, int axis) {
        return ((static_cast<std::int64_t>(k) * r + j) * r + i) * 3 + axis;
    };

    double corner_value[8];
    for (int z = 0; z < r - 1; ++z)
        for (int y = 0; y < r - 1; ++y)
            for (int x = 0; x < r - 1; ++x) {
                int cube = 0;
                for (int c = 0; c < 8; ++c) {
                    corner_value[c] =
                        volume.at(x + kCornerOffset[c][0], y + kCornerOffset[c][1],
                                  z + kCornerOffset[c][2]);
                    if (corner_value[c] < iso) cube |= 1 << c;
                }
                if (detail::kEdgeTable[cube] == 0) continue;

                std::int32_t edge_ids[12];
                for (int e = 0; e < 12; ++e) {
                    if (!(detail::kEdgeTable[cube] & (1 << e))) continue;
                    const int ca = kEdgeCorners[e][0];
                    const int ci = x + kCornerOffset[ca][0];
                    const int cj = y + kCornerOffset[ca][1];
                    const int ck = z + kCornerOffset[ca][2];
                    const std::int64_t key = edge_key(ci, cj, ck, kEdgeAxis[e]);

                    auto [it, inserted] =
                        edge_vertex.try_emplace(key,
                                                static_cast<std::int32_t>(vertices.size()));
                    if (inserted) {
                        const int cb = kEdgeCorners[e][1];
                        const double va = corner_value[ca];
                        const double vb = corner_value[cb];
                        const double t = (iso - va) / (vb - va);
                        const Vec3 pa(volume.coord(ci), volume.coord(cj),
                                      volume.coord(ck));
                        Vec3 pb = pa;
                        pb[kEdgeAxis[e]] =
                            volume.coord((kEdgeAxis[e] == 0   ? ci
                                          : kEdgeAxis[e] == 1 ? cj
                                                              : ck) +
                                         1);
                        vertices.push_back(pa + t * (pb - pa));
                    }
                    edge_ids[e] = it->second;
                }

                for (int t = 0; detail::kTriTable[cube][t] != -1; t += 3) {
                    const std::int32_t a = edge_ids[detail::kTriTable[cube][t]];
                    const std::int32_t b = edge_ids[detail::kTriTable[cube][t + 1]];
                    const std::int32_t c = edge_ids[detail::kTriTable[cube][t + 2]];
                    if (a == b || b == c || a == c) continue;
                    if ((vertices[b] - vertices[a])
                            .cross(vertices[c] - vertices[a])
                            .squaredNorm() == 0.0)
                        continue;  // collapsed sliver from an on-corner crossing
                    // Reversed order: outward normals where the field increases.
                    faces.emplace_back(a, c, b);
                }
            }

    MatX3 v(static_cast<std::int64_t>(vertices.size()), 3);
    for (std::size_t i = 0; i < vertices.size(); ++i) v.row(i) = vertices[i];
    MatX3i t(static_cast<std::int64_t>(faces.size()), 3);
    for (std::size_t i = 0; i < faces.size(); ++i) t.row(i) = faces[i];
    if (faces.empty()) {
        TriMesh empty;
        empty.vertices = std::move(v);
        empty.triangles = std::move(t);
        empty.face_normals.resize(0, 3);
        return empty;
    }
    return make_mesh(std::move(v), std::move(t));
}

TriMesh reconstruct_mesh(const GalaRep& rep, const ReconstructOptions& options) {
    SdfVolume volume = sample_volume(rep, options.resolution, options.threads);
    if (options.flip_signs)
        flip_interior_signs(volume, options.flip_3d, 1e-6, options.threads);
    return marching_cubes(volume);
}

} // namespace gala
