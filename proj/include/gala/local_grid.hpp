#pragma once

#include "gala/forest.hpp"
#include "gala/sdf_oracle.hpp"
#include "gala/types.hpp"

#include <cstdint>
#include <vector>

namespace gala {

// One leaf's payload: an oriented, per-axis-scaled value lattice. Lattice
// node (kx, ky, kz) sits at center + R * (half_scales .* u), with
// u_i = -1 + 2 k_i / (m - 1); values are stored x-fastest. A grid
// contributes to queries inside its lattice box only.
struct LocalGrid {
    std::int64_t leaf_index = -1;  // dense index into forest.leaves()
    Vec3 center = Vec3::Zero();
    Quat orientation = Quat::Identity();
    Vec3 half_scales = Vec3::Ones();
    VecXd values;

    Mat3 rotation() const { return orientation.toRotationMatrix(); }
};

inline double lattice_coord(int k, int m) {
    return -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(m - 1);
}

inline std::int64_t lattice_flat_index(int kx, int ky, int kz, int m) {
    return (static_cast<std::int64_t>(kz) * m + ky) * m + kx;
}

Vec3 lattice_world_position(const LocalGrid& grid, int kx, int ky, int kz, int m);

// Cyclic Jacobi sweeps on a symmetric 3x3 matrix. Stops when the largest
// off-diagonal magnitude drops below tol or after max_sweeps sweeps.
void jacobi_eigen_3x3(const Mat3& sym, Vec3* eigenvalues, Mat3* eigenvectors,
                      int max_sweeps = 50, double tol = 1e-10);

// Eigenvectors of the normals' second-moment matrix, eigenvalue-descending in
// the columns, right-handed (det +1).
Mat3 pca_orientation(const MatX3& normals);

// Fraction of the leaf half-extent every lattice half-scale is floored at.
// A lattice collapsed onto locally flat geometry would otherwise answer its
// whole voxel from one boundary plane; the floor keeps a slab of lattice
// planes straddling the surface so adjacent samples change sign. At 0.5 a
// floored lattice plus the two-cell extrapolation margin of the interpolant
// reaches the voxel boundary exactly (for the default five-sample lattice),
// so every in-voxel query reads a signed distance ramp rather than a
// flattened boundary value.
inline constexpr double kLatticeFloorRatio = 0.5;

// Extracted boxes are padded by this fraction of the leaf half-extent so that
// lattices of neighboring leaves overlap despite finite sampling.
inline constexpr double kLatticePadRatio = 0.05;

// Bounding box of the points in the rotated frame: returns the box center in
// world coordinates and the per-axis half-extents clamped to
// [max(kMinScale, min_half), kSdfBound].
std::pair<Vec3, Vec3> initial_box(const Mat3& rotation, const MatX3& points,
                                  double min_half = kMinScale);

// Rescale decision for a histogram whose maximal bin has center peak_center
// (normalized to (0, 1]): the largest lattice fraction 2*I/m strictly below
// the peak is moved onto it. grid_index 0 means no rescale.
struct RescaleDecision {
    int grid_index = 0;
    double factor = 1.0;
};
RescaleDecision histogram_rescale_factor(double peak_center, int grid_res);

// Center of the maximal bin of |(x - center) . axis| / half_scale clipped to
// [0, 1], over `bins` bins; ties take the innermost bin.
double projection_histogram_peak(const Vec3& axis, double half_scale,
                                 const Vec3& center, const MatX3& points,
                                 int bins);

// Full per-axis rescale: histogram peak -> factor -> clamped new half-scale.
double histogram_rescale(const Vec3& axis, double half_scale, const Vec3& center,
                         const MatX3& points, int bins, int grid_res,
                         double min_half = kMinScale);

// Fills grid.values with truncated oracle distances at the lattice positions.
void init_grid_values(LocalGrid& grid, int grid_res, const SdfOracle& oracle);

// Which machinery participates in grid extraction. kNoAdaptive drops the
// per-grid frame entirely (axis-aligned lattice filling the leaf voxel);
// the others nest: kVanilla (axis-aligned sample box), kNormals (+ PCA
// orientation), kNormalsHistogram (+ per-axis histogram rescale). kFull is
// an alias for kNormalsHistogram.
enum class ExtractionMode : std::uint8_t {
    kFull = 0,
    kNoAdaptive = 1,
    kVanilla = 2,
    kNormals = 3,
    kNormalsHistogram = 4,
};

const char* to_string(ExtractionMode mode);
ExtractionMode extraction_mode_from_string(const std::string& name);

// Extracts one grid per non-empty leaf (values left empty; see
// init_grid_values). Grids come back in ascending leaf order.
std::vector<LocalGrid> extract_grids(const Forest& forest,
                                     const SurfaceSamples& samples,
                                     ExtractionMode mode, int grid_res,
                                     int hist_bins, int threads = 0);

} // namespace gala
