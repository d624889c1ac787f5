#include "gala/local_grid.hpp"

#include "gala/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gala {

Vec3 lattice_world_position(const LocalGrid& grid, int kx, int ky, int kz, int m) {
    const Vec3 local(lattice_coord(kx, m) * grid.half_scales.x(),
                     lattice_coord(ky, m) * grid.half_scales.y(),
                     lattice_coord(kz, m) * grid.half_scales.z());
    return grid.center + grid.rotation() * local;
}

void jacobi_eigen_3x3(const Mat3& sym, Vec3* eigenvalues, Mat3* eigenvectors,
                      int max_sweeps, double tol) {
    Mat3 a = sym;
    Mat3 v = Mat3::Identity();
    constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        const double off = std::max({std::abs(a(0, 1)), std::abs(a(0, 2)),
                                     std::abs(a(1, 2))});
        if (off < tol) break;
        for (const auto& pq : pairs) {
            const int p = pq[0], q = pq[1];
            if (a(p, q) == 0.0) continue;
            const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
            const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                             (std::abs(theta) + std::sqrt(theta * theta + 1.0));
            const double c = 1.0 / std::sqrt(t * t + 1.0);
            const double s = t * c;

            Mat3 rot = Mat3::Identity();
            rot(p, p) = c;
            rot(q, q) = c;
            rot(p, q) = s;
            rot(q, p) = -s;
            a = rot.transpose() * a * rot;
            a(p, q) = a(q, p) = 0.0;
            v = v * rot;
        }
    }

    *eigenvalues = a.diagonal();
    *eigenvectors = v;
}

Mat3 pca_orientation(const MatX3& normals) {
    if (normals.rows() < 1) throw InvalidInput("pca_orientation: no normals");

    const Mat3 moment = normals.transpose() * normals /
                        static_cast<double>(normals.rows());
    Vec3 values;
    Mat3 vectors;
    jacobi_eigen_3x3(moment, &values, &vectors);

    // Sort columns by descending eigenvalue, then force right-handedness.
    std::array<int, 3> order = {0, 1, 2};
    std::sort(order.begin(), order.end(),
              [&values](int a, int b) { return values[a] > values[b]; });
    Mat3 sorted;
    for (int k = 0; k < 3; ++k) sorted.col(k) = vectors.col(order[k]);
    if (sorted.determinant() < 0.0) sorted.col(2) = -sorted.col(2);
    return sorted;
}

std::pair<Vec3, Vec3> initial_box(const Mat3& rotation, const MatX3& points,
                                  double min_half) {
    if (points.rows() < 1) throw InvalidInput("initial_box: no points");

    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (std::int64_t i = 0; i < points.rows(); ++i) {
        const Vec3 local = rotation.transpose() * Vec3(points.row(i));
        lo = lo.cwiseMin(local);
        hi = hi.cwiseMax(local);
    }
    const Vec3 center_world = rotation * (0.5 * (lo + hi));
    const Vec3 half = (0.5 * (hi - lo))
                          .cwiseMax(std::max(kMinScale, min_half))
                          .cwiseMin(kSdfBound);
    return {center_world, half};
}

RescaleDecision histogram_rescale_factor(double peak_center, int grid_res) {
    // Largest integer I with 2*I/m strictly below the peak. The epsilon keeps
    // an exactly-on-boundary peak on the strict side.
    const double half_steps = grid_res * peak_center / 2.0;
    const int grid_index =
        std::max(0, static_cast<int>(std::ceil(half_steps - 1e-12)) - 1);

    RescaleDecision decision;
    decision.grid_index = grid_index;
    if (grid_index > 0)
        decision.factor = (grid_res * peak_center) / (2.0 * grid_index);
    return decision;
}

double projection_histogram_peak(const Vec3& axis, double half_scale,
                                 const Vec3& center, const MatX3& points,
                                 int bins) {
    if (points.rows() < 1)
        throw InvalidInput("projection_histogram_peak: no points");
    if (bins < 1) throw InvalidInput("projection_histogram_peak: bins must be >= 1");

    std::vector<std::int64_t> counts(bins, 0);
    for (std::int64_t i = 0; i < points.rows(); ++i) {
        const double proj =
            std::abs((Vec3(points.row(i)) - center).dot(axis)) / half_scale;
        const double clipped = std::clamp(proj, 0.0, 1.0);
        const int bin = std::min(static_cast<int>(clipped * bins), bins - 1);
        ++counts[bin];
    }

    int peak = 0;
    for (int b = 1; b < bins; ++b)
        if (counts[b] > counts[peak]) peak = b;  // ties keep the innermost bin
    return (peak + 0.5) / static_cast<double>(bins);
}

double histogram_rescale(const Vec3& axis, double half_scale, const Vec3& center,
                         const MatX3& points, int bins, int grid_res,
                         double min_half) {
    const double peak =
        projection_histogram_peak(axis, half_scale, center, points, bins);
    const RescaleDecision decision = histogram_rescale_factor(peak, grid_res);
    return std::clamp(half_scale * decision.factor, std::max(kMinScale, min_half),
                      kSdfBound);
}

void init_grid_values(LocalGrid& grid, int grid_res, const SdfOracle& oracle) {
    grid.values.resize(static_cast<std::int64_t>(grid_res) * grid_res * grid_res);
    for (int kz = 0; kz < grid_res; ++kz)
        for (int ky = 0; ky < grid_res; ++ky)
            for (int kx = 0; kx < grid_res; ++kx)
                grid.values[lattice_flat_index(kx, ky, kz, grid_res)] =
                    truncated_sdf(oracle,
                                  lattice_world_position(grid, kx, ky, kz, grid_res));
}

const char* to_string(ExtractionMode mode) {
    switch (mode) {
        case ExtractionMode::kFull: return "full";
        case ExtractionMode::kNoAdaptive: return "no-adaptive";
        case ExtractionMode::kVanilla: return "vanilla";
        case ExtractionMode::kNormals: return "normals";
        case ExtractionMode::kNormalsHistogram: return "normals-hist";
    }
    return "unknown";
}

ExtractionMode extraction_mode_from_string(const std::string& name) {
    if (name == "full") return ExtractionMode::kFull;
    if (name == "no-adaptive") return ExtractionMode::kNoAdaptive;
    if (name == "vanilla") return ExtractionMode::kVanilla;
    if (name == "normals") return ExtractionMode::kNormals;
    if (name == "normals-hist") return ExtractionMode::kNormalsHistogram;
    throw InvalidInput("unknown extraction mode: " + name);
}

std::vector<LocalGrid> extract_grids(const Forest& forest,
                                     const SurfaceSamples& samples,
                                     ExtractionMode mode, int grid_res,
                                     int hist_bins, int threads) {
    if (grid_res < 2) throw InvalidInput("grid_res must be >= 2");
    if (hist_bins < 1) throw InvalidInput("hist_bins must be >= 1");

    const auto& leaves = forest.leaves();
    std::vector<std::int64_t> nonempty;
    for (std::int64_t leaf = 0; leaf < forest.leaf_count(); ++leaf)
        if (leaves[leaf].non_empty) nonempty.push_back(leaf);

    const auto buckets = bucket_samples_by_root(forest, samples);
    const std::int64_t per_root =
        forest.leaf_count() / static_cast<std::int64_t>(forest.roots.size());

    std::vector<LocalGrid> grids(nonempty.size());
    parallel_for(
        static_cast<std::int64_t>(nonempty.size()),
        [&](std::int64_t slot) {
            const std::int64_t leaf = nonempty[slot];
            const TreeNode& node = leaves[leaf];

            LocalGrid grid;
            grid.leaf_index = leaf;

            if (mode == ExtractionMode::kNoAdaptive) {
                // Uniform axis-aligned lattice spanning the leaf voxel; the
                // frame carries no fitted parameters.
                grid.center = node.center;
                grid.half_scales = Vec3::Constant(node.half_extent);
                grids[slot] = std::move(grid);
                return;
            }

            // Gather the leaf-bounded samples from the root's neighborhood.
            const auto& candidates = buckets[leaf / per_root];
            std::vector<std::int64_t> inside;
            for (std::int64_t i : candidates) {
                const Vec3 x = samples.points.row(i);
                if ((x - node.center).lpNorm<Eigen::Infinity>() <= node.half_extent)
                    inside.push_back(i);
            }
            if (inside.empty())
                throw NumericError("non-empty leaf without samples");

            MatX3 pts(static_cast<std::int64_t>(inside.size()), 3);
            MatX3 nrm(static_cast<std::int64_t>(inside.size()), 3);
            for (std::size_t i = 0; i < inside.size(); ++i) {
                pts.row(i) = samples.points.row(inside[i]);
                nrm.row(i) = samples.normals.row(inside[i]);
            }

            const bool oriented = mode == ExtractionMode::kNormals ||
                                  mode == ExtractionMode::kNormalsHistogram ||
                                  mode == ExtractionMode::kFull;
            const Mat3 rot = oriented ? pca_orientation(nrm) : Mat3::Identity();
            const double floor = kLatticeFloorRatio * node.half_extent;
            auto [center, half] = initial_box(rot, pts, floor);

            if (mode == ExtractionMode::kNormalsHistogram ||
                mode == ExtractionMode::kFull) {
                for (int axis = 0; axis < 3; ++axis)
                    half[axis] = histogram_rescale(rot.col(axis), half[axis],
                                                   center, pts, hist_bins,
                                                   grid_res, floor);
            }

            // Sample bounding boxes underestimate the true patch extent by
            // about one sample spacing; a small pad keeps neighboring
            // lattices overlapping instead of leaving pinholes between them.
            half = (half.array() + kLatticePadRatio * node.half_extent)
                       .min(kSdfBound)
                       .matrix();

            grid.center = center;
            grid.half_scales = half;
            grid.orientation = Quat(rot).normalized();
            grids[slot] = std::move(grid);
        },
        threads);

    return grids;
}

} // namespace gala
