#include "gala/pipeline.hpp"

#include "gala/parallel.hpp"

#include <chrono>

namespace gala {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

} // namespace

FitResult fit_gala(const TriMesh& input_mesh, const FitOptions& options) {
    options.params.validate();
    if (options.iterations < 0) throw InvalidInput("iterations must be >= 0");
    if (options.batch_size < 1) throw InvalidInput("batch size must be >= 1");

    FitResult result;
    const auto t_start = std::chrono::steady_clock::now();

    const TriMesh mesh = normalize_mesh(input_mesh);
    const std::int64_t sample_count = options.sample_count > 0
                                          ? options.sample_count
                                          : default_sample_count(mesh);
    if (options.fps_initial_index < 0 || options.fps_initial_index >= sample_count)
        throw InvalidInput("FPS initial index out of range");
    if (options.params.root_count > sample_count)
        throw InvalidInput("more roots than surface samples");

    auto samples = std::make_shared<SurfaceSamples>(
        sample_surface(mesh, sample_count, options.seed));
    auto oracle = std::make_shared<SdfOracle>(build_oracle(mesh));

    const auto roots =
        init_roots(*samples, options.params.root_count, options.fps_initial_index);

    GalaRep rep;
    rep.params = options.params;
    rep.mode = options.mode;
    rep.forest = subdivide(roots, options.params.alpha, options.params.depth);
    classify_nonempty(rep.forest, *samples);

    rep.grids = extract_grids(rep.forest, *samples, options.mode,
                              options.params.grid_res, options.params.hist_bins,
                              options.threads);

    // Frames are snapped to their code lattice before values are sampled, so
    // the stored lattice is the one the values were fitted on.
    if (options.quantize) quantize_grid_geometry(rep);

    parallel_for(
        rep.grid_count(),
        [&](std::int64_t g) {
            init_grid_values(rep.grids[g], rep.params.grid_res, *oracle);
        },
        options.threads);

    result.extraction_seconds = seconds_since(t_start);

    const auto t_refine = std::chrono::steady_clock::now();
    RefineOptions refine_options;
    refine_options.iterations = options.iterations;
    refine_options.batch_size = options.batch_size;
    refine_options.seed = options.seed;
    refine_options.quantize = options.quantize;
    refine_options.threads = options.threads;
    const RefineResult refined = refine(rep, *oracle, *samples, refine_options);
    result.refinement_seconds = seconds_since(t_refine);

    result.rep = std::move(rep);
    result.final_loss = refined.final_loss;
    result.loss_history = refined.loss_history;
    result.oracle = std::move(oracle);
    result.samples = std::move(samples);
    return result;
}

} // namespace gala
