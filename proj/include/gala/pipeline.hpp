#pragma once

#include "gala/fitting.hpp"
#include "gala/gala_rep.hpp"
#include "gala/sdf_oracle.hpp"
#include "gala/tri_mesh.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace gala {

struct FitOptions {
    Hyperparams params;
    ExtractionMode mode = ExtractionMode::kFull;
    int iterations = 400;
    std::int64_t batch_size = 8192;
    std::uint64_t seed = 0;
    std::int64_t fps_initial_index = 0;
    std::int64_t sample_count = 0;  // 0 -> 10 per triangle
    bool quantize = true;
    int threads = 0;
};

struct FitResult {
    GalaRep rep;
    double extraction_seconds = 0.0;  // everything before value refinement
    double refinement_seconds = 0.0;
    double final_loss = 0.0;
    std::vector<double> loss_history;

    // Kept alive for callers that keep querying the truth (metrics, tests).
    std::shared_ptr<SdfOracle> oracle;
    std::shared_ptr<SurfaceSamples> samples;
};

// Full fitting pipeline: normalize, sample, oracle build, root seeding,
// overlapping subdivision, leaf classification, grid extraction (with
// frame quantization when enabled), value initialization and refinement.
FitResult fit_gala(const TriMesh& input_mesh, const FitOptions& options = {});

} // namespace gala
