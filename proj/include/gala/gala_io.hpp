#pragma once

#include "gala/gala_rep.hpp"
#include "gala/types.hpp"

#include <string>

namespace gala {

inline constexpr std::uint32_t kGalaFormatVersion = 1;

// Scalar min/max of one normalization domain.
struct DomainStats {
    double lo = 0.0;
    double hi = 0.0;
};

// Per-domain statistics used to map stored quantities into [0, 1].
struct GalaStats {
    DomainStats root_center;  // over all root center components
    DomainStats root_scale;
    DomainStats grid_center;  // over all grid center components
    DomainStats grid_scale;
};

GalaStats compute_stats(const GalaRep& rep);

// Plain-text sidecar with one "<domain> <lo> <hi>" line per domain, for
// dataset-level statistics shared across files.
GalaStats load_stats_sidecar(const std::string& path);
void save_stats_sidecar(const GalaStats& stats, const std::string& path);

// Binary container (all fields little-endian):
//   "GALA", u32 version,
//   u16 root_count, u16 depth, u16 grid_res, u16 hist_bins,
//   f32 alpha, u32 grid_count, u8 mode,
//   f32 x 8 per-domain min/max (root_center, root_scale, grid_center,
//        grid_scale),
//   roots:  root_count x (3 x f32 center, f32 half_extent),
//   leaves: grid_count x (u32 parent, u8 sibling, 3 x u8 euler codes,
//           3 x u8 scale codes, 3 x u8 center codes, grid_res^3 x u8 values),
//           in ascending leaf order.
// Codes are the canonical payload; save refuses unquantized reps.
void save_gala(const GalaRep& rep, const std::string& path);
GalaRep load_gala(const std::string& path);

// Flattened per-tree tensors for downstream generative training, normalized
// to [0, 1] ("GALX", little-endian, f64 arrays):
//   u32 version, u16 root_count, u16 depth, u16 grid_res, u16 reserved,
//   u32 leaf_slots, f64 x 8 stats,
//   X_o     root_count x 4   (root center, scale),
//   mask    leaf_slots  x u8 (1 = real leaf, 0 = padding),
//   X_vbar  leaf_slots x 10  (quaternion xyzw, grid scales, grid center),
//   X_v     leaf_slots x grid_res^3 (value codes / 255).
// Rows follow leaf-slot order (parent * 8 + sibling); padded rows are zero.
// dataset_stats overrides the per-file statistics when given.
void export_generation_data(const GalaRep& rep, const std::string& path,
                            const GalaStats* dataset_stats = nullptr);

} // namespace gala
