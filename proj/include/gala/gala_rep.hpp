#pragma once

#include "gala/forest.hpp"
#include "gala/local_grid.hpp"
#include "gala/quantization.hpp"
#include "gala/types.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace gala {

struct Hyperparams {
    int root_count = 256;
    int depth = 1;
    int grid_res = 5;    // lattice samples per axis (m)
    int hist_bins = 10;  // 2 * grid_res
    float alpha = 0.2f;  // child expansion ratio; kept in single precision so
                         // the serialized value round-trips exactly

    std::int64_t leaf_slots() const {
        std::int64_t slots = root_count;
        for (int l = 0; l < depth; ++l) slots *= 8;
        return slots;
    }
    std::int64_t values_per_grid() const {
        return static_cast<std::int64_t>(grid_res) * grid_res * grid_res;
    }
    void validate() const;
};

// 8-bit storage of one grid: 3 Euler codes, 3 scale codes, 3 center codes and
// m^3 value codes. Canonical once a rep is quantized.
struct GridCodes {
    std::array<std::uint8_t, 3> euler{};
    std::array<std::uint8_t, 3> scales{};
    std::array<std::uint8_t, 3> center{};
    std::vector<std::uint8_t> values;
};

struct GalaRep {
    Hyperparams params;
    ExtractionMode mode = ExtractionMode::kFull;
    Forest forest;
    std::vector<LocalGrid> grids;   // one per non-empty leaf, ascending leaf order
    bool quantized = false;         // codes are canonical, floats derived
    std::vector<GridCodes> codes;   // parallel to grids when quantized

    std::int64_t grid_count() const {
        return static_cast<std::int64_t>(grids.size());
    }
    // Stored scalars: 4 per root plus, per grid, m^3 values and the frame
    // (4 quaternion + 3 scale + 3 center); the no-adaptive mode keeps only
    // the grid center alongside the values.
    std::int64_t param_count() const;
    double occupancy() const;
};

// Hat weight of one grid at x: max(0, 1 - ||lattice_local(x)||_inf), the
// infinity-ball hat over the grid's own lattice box.
double grid_weight(const LocalGrid& grid, const Vec3& x);

// Lattice coordinate of x in the grid frame: R^T (x - center) / half_scales.
// Interpolation clamps it onto [-1, 1]^3.
Vec3 lattice_local(const LocalGrid& grid, const Vec3& x);

// Trilinear basis over the [-1,1]^3 lattice at a local coordinate.
struct TrilinearStencil {
    std::array<std::int64_t, 8> node;
    std::array<double, 8> weight;
};
TrilinearStencil trilinear_stencil(int grid_res, const Vec3& local);

double grid_trilinear(const LocalGrid& grid, int grid_res, const Vec3& local);

// Uniform binning of grid support boxes for sublinear candidate lookup.
// Candidate lists are ascending and conservative (supersets of the grids
// with positive weight anywhere in the cell).
class GridIndex {
public:
    GridIndex() = default;
    explicit GridIndex(const GalaRep& rep, int cells_per_axis = 0);

    std::span<const std::int32_t> candidates(const Vec3& x) const;

private:
    Vec3 origin_ = Vec3::Zero();
    double cell_size_ = 1.0;
    int cells_ = 0;
    std::vector<std::int64_t> start_;
    std::vector<std::int32_t> entries_;
};

// Weighted blend of the covering grids (hat-weighted trilinear values,
// normalized); kOutsideValue where no grid covers x.
double query_sdf(const GalaRep& rep, const Vec3& x);
double query_sdf(const GalaRep& rep, const GridIndex& index, const Vec3& x);

// Snaps every grid frame (q, s_g, p_g) onto its code lattice; the codes
// become the canonical storage. No-adaptive grids keep their derived frame.
void quantize_grid_geometry(GalaRep& rep);

// Snaps grid values as well and marks the rep quantized.
void quantize_rep(GalaRep& rep);

// Rebuilds a grid's floats from codes (adaptive modes).
LocalGrid grid_from_codes(const GridCodes& codes, std::int64_t leaf_index,
                          int grid_res);

} // namespace gala
