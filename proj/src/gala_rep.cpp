#include "gala/gala_rep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gala {

void Hyperparams::validate() const {
    if (root_count < 1) throw InvalidInput("root count must be >= 1");
    if (depth < 1) throw InvalidInput("depth must be >= 1");
    if (grid_res < 2) throw InvalidInput("grid resolution must be >= 2 for trilinear interpolation");
    if (hist_bins < 1) throw InvalidInput("histogram bin count must be >= 1");
    if (!(alpha >= 0.0f) || !std::isfinite(alpha))
        throw InvalidInput("alpha must be finite and >= 0");
}

std::int64_t GalaRep::param_count() const {
    const std::int64_t per_grid =
        params.values_per_grid() +
        (mode == ExtractionMode::kNoAdaptive ? 3 : 10);
    return 4 * static_cast<std::int64_t>(params.root_count) +
           grid_count() * per_grid;
}

double GalaRep::occupancy() const {
    return static_cast<double>(grid_count()) /
           static_cast<double>(params.leaf_slots());
}

double grid_weight(const LocalGrid& grid, const Vec3& x) {
    return std::max(0.0, 1.0 - lattice_local(grid, x).lpNorm<Eigen::Infinity>());
}

Vec3 lattice_local(const LocalGrid& grid, const Vec3& x) {
    return (grid.rotation().transpose() * (x - grid.center))
        .cwiseQuotient(grid.half_scales);
}

TrilinearStencil trilinear_stencil(int grid_res, const Vec3& local) {
    const int m = grid_res;
    TrilinearStencil st;
    int cell[3];
    double frac[3];
    for (int a = 0; a < 3; ++a) {
        const double t =
            std::clamp((local[a] + 1.0) * 0.5 * (m - 1), 0.0, double(m - 1));
        const int c = std::min(static_cast<int>(t), m - 2);
        cell[a] = c;
        frac[a] = t - c;
    }
    int corner = 0;
    for (int dz = 0; dz < 2; ++dz)
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx, ++corner) {
                st.node[corner] = lattice_flat_index(cell[0] + dx, cell[1] + dy,
                                                     cell[2] + dz, m);
                st.weight[corner] = (dx ? frac[0] : 1.0 - frac[0]) *
                                    (dy ? frac[1] : 1.0 - frac[1]) *
                                    (dz ? frac[2] : 1.0 - frac[2]);
            }
    return st;
}

double grid_trilinear(const LocalGrid& grid, int grid_res, const Vec3& local) {
    const TrilinearStencil st = trilinear_stencil(grid_res, local);
    double value = 0.0;
    for (int c = 0; c < 8; ++c) value += st.weight[c] * grid.values[st.node[c]];
    return value;
}

namespace {

// Shared blend loop; candidate ids must be ascending so that both query paths
// accumulate in the same order.
template <typename Ids>
double blend_over(const GalaRep& rep, const Ids& ids, const Vec3& x) {
    double weight_sum = 0.0;
    double value_sum = 0.0;
    for (const auto id : ids) {
        const LocalGrid& grid = rep.grids[id];
        const Vec3 local = lattice_local(grid, x);
        const double w = 1.0 - local.lpNorm<Eigen::Infinity>();
        if (w <= 0.0) continue;
        weight_sum += w;
        value_sum += w * grid_trilinear(grid, rep.params.grid_res, local);
    }
    if (weight_sum <= 0.0) return kOutsideValue;
    return value_sum / weight_sum;
}

struct IotaRange {
    std::int32_t n;
    struct Iter {
        std::int32_t i;
        std::int32_t operator*() const { return i; }
        Iter& operator++() { ++i; return *this; }
        bool operator!=(const Iter& o) const { return i != o.i; }
    };
    Iter begin() const { return {0}; }
    Iter end() const { return {n}; }
};

} // namespace

double query_sdf(const GalaRep& rep, const Vec3& x) {
    return blend_over(rep, IotaRange{static_cast<std::int32_t>(rep.grid_count())}, x);
}

double query_sdf(const GalaRep& rep, const GridIndex& index, const Vec3& x) {
    return blend_over(rep, index.candidates(x), x);
}

GridIndex::GridIndex(const GalaRep& rep, int cells_per_axis) {
    const std::int64_t n_grids = rep.grid_count();
    if (n_grids == 0) return;

    cells_ = cells_per_axis > 0 ? cells_per_axis : (n_grids >= 512 ? 64 : 32);

    // World-space AABB of each grid's support box.
    std::vector<Vec3> lo(n_grids), hi(n_grids);
    Vec3 domain_lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 domain_hi = -domain_lo;
    for (std::int64_t g = 0; g < n_grids; ++g) {
        const Mat3 rot = rep.grids[g].rotation();
        const Vec3 extent = rot.cwiseAbs() * rep.grids[g].half_scales;
        lo[g] = rep.grids[g].center - extent;
        hi[g] = rep.grids[g].center + extent;
        domain_lo = domain_lo.cwiseMin(lo[g]);
        domain_hi = domain_hi.cwiseMax(hi[g]);
    }
    origin_ = domain_lo;
    cell_size_ = (domain_hi - domain_lo).maxCoeff() / cells_;
    cell_size_ = std::max(cell_size_, 1e-9);

    auto cell_of = [this](double v, double o) {
        return std::clamp(static_cast<int>(std::floor((v - o) / cell_size_)), 0,
                          cells_ - 1);
    };

    const std::int64_t total = static_cast<std::int64_t>(cells_) * cells_ * cells_;
    start_.assign(total + 1, 0);

    auto for_covered_cells = [&](std::int64_t g, auto&& fn) {
        const int x0 = cell_of(lo[g].x(), origin_.x());
        const int x1 = cell_of(hi[g].x(), origin_.x());
        const int y0 = cell_of(lo[g].y(), origin_.y());
        const int y1 = cell_of(hi[g].y(), origin_.y());
        const int z0 = cell_of(lo[g].z(), origin_.z());
        const int z1 = cell_of(hi[g].z(), origin_.z());
        for (int z = z0; z <= z1; ++z)
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x)
                    fn((static_cast<std::int64_t>(z) * cells_ + y) * cells_ + x);
    };

    for (std::int64_t g = 0; g < n_grids; ++g)
        for_covered_cells(g, [&](std::int64_t cell) { ++start_[cell + 1]; });
    for (std::int64_t c = 0; c < total; ++c) start_[c + 1] += start_[c];

    entries_.resize(start_[total]);
    std::vector<std::int64_t> cursor(start_.begin(), start_.end() - 1);
    for (std::int64_t g = 0; g < n_grids; ++g)
        for_covered_cells(g, [&](std::int64_t cell) {
            entries_[cursor[cell]++] = static_cast<std::int32_t>(g);
        });
}

std::span<const std::int32_t> GridIndex::candidates(const Vec3& x) const {
    if (cells_ == 0) return {};
    for (int a = 0; a < 3; ++a) {
        const double t = (x[a] - origin_[a]) / cell_size_;
        if (t < 0.0 || t >= cells_) return {};
    }
    std::int64_t cell = 0;
    for (int a = 2; a >= 0; --a) {
        const int c = static_cast<int>((x[a] - origin_[a]) / cell_size_);
        cell = cell * cells_ + std::min(c, cells_ - 1);
    }
    return {entries_.data() + start_[cell],
            static_cast<std::size_t>(start_[cell + 1] - start_[cell])};
}

void quantize_grid_geometry(GalaRep& rep) {
    rep.codes.resize(rep.grids.size());
    if (rep.mode == ExtractionMode::kNoAdaptive) return;

    for (std::size_t g = 0; g < rep.grids.size(); ++g) {
        LocalGrid& grid = rep.grids[g];
        GridCodes& codes = rep.codes[g];

        const Vec3 center_before = grid.center;
        const Mat3 rot_before = grid.rotation();

        codes.euler = quat_to_euler_codes(grid.orientation);
        grid.orientation = euler_codes_to_quat(codes.euler);
        for (int a = 0; a < 3; ++a) {
            codes.center[a] = static_cast<std::uint8_t>(
                quantize(grid.center[a], kCenterLo, kCenterHi));
            grid.center[a] = dequantize(codes.center[a], kCenterLo, kCenterHi);
        }

        // Snapping the center and orientation moves the lattice box; pad the
        // scales so the snapped box still covers the extracted one, otherwise
        // gaps open between neighboring grids and punch pinholes through the
        // coverage shell. Scale codes round up for the same reason.
        const Mat3 rot_after = grid.rotation();
        const Vec3 shift = rot_after.transpose() * (center_before - grid.center);
        // Per-axis bound on how far any point of the old box moves in the new
        // frame: |((R_new - R_old)^T p)_a| <= sum_j |dR(j,a)| s_j.
        const Vec3 rot_slack =
            (rot_after - rot_before).cwiseAbs().transpose() * grid.half_scales;
        const double levels = 255.0;
        for (int a = 0; a < 3; ++a) {
            const double wanted = std::min(
                grid.half_scales[a] + std::abs(shift[a]) + rot_slack[a], kScaleHi);
            const double t = (wanted - kScaleLo) / (kScaleHi - kScaleLo) * levels;
            codes.scales[a] = static_cast<std::uint8_t>(
                std::clamp(std::ceil(t - 1e-9), 0.0, levels));
            grid.half_scales[a] = dequantize_scale(codes.scales[a]);
        }
    }
}

void quantize_rep(GalaRep& rep) {
    quantize_grid_geometry(rep);
    for (std::size_t g = 0; g < rep.grids.size(); ++g) {
        LocalGrid& grid = rep.grids[g];
        GridCodes& codes = rep.codes[g];
        codes.values.resize(grid.values.size());
        for (std::int64_t k = 0; k < grid.values.size(); ++k) {
            codes.values[k] = static_cast<std::uint8_t>(
                quantize(grid.values[k], kValueLo, kValueHi));
            grid.values[k] = dequantize(codes.values[k], kValueLo, kValueHi);
        }
    }
    rep.quantized = true;
}

LocalGrid grid_from_codes(const GridCodes& codes, std::int64_t leaf_index,
                          int grid_res) {
    LocalGrid grid;
    grid.leaf_index = leaf_index;
    grid.orientation = euler_codes_to_quat(codes.euler);
    for (int a = 0; a < 3; ++a) {
        grid.half_scales[a] = dequantize_scale(codes.scales[a]);
        grid.center[a] = dequantize(codes.center[a], kCenterLo, kCenterHi);
    }
    grid.values.resize(static_cast<std::int64_t>(grid_res) * grid_res * grid_res);
    for (std::int64_t k = 0; k < grid.values.size(); ++k)
        grid.values[k] = dequantize(codes.values[k], kValueLo, kValueHi);
    return grid;
}

} // namespace gala
