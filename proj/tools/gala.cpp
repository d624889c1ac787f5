// Command-line driver: fit / reconstruct / eval / export-gen / info.

#include "gala/eval_metrics.hpp"
#include "gala/gala_io.hpp"
#include "gala/pipeline.hpp"
#include "gala/reconstruct.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

int threads_fallback(int flag_value) {
    if (flag_value != 0) return flag_value;
    if (const char* env = std::getenv("GALA_THREADS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0) return parsed;
    }
    return 0;
}

struct FitArgs {
    std::string input, output;
    int roots = 256;
    double alpha = 0.2;
    int grid_res = 5;
    int depth = 1;
    int iters = 400;
    std::int64_t batch = 8192;
    std::uint64_t seed = 0;
    std::int64_t fps_init = 0;
    bool no_quantize = false;
    std::string mode = "full";
    int threads = 0;
};

int run_fit(const FitArgs& args) {
    gala::FitOptions options;
    options.params.root_count = args.roots;
    options.params.alpha = static_cast<float>(args.alpha);
    options.params.grid_res = args.grid_res;
    options.params.hist_bins = 2 * args.grid_res;
    options.params.depth = args.depth;
    options.mode = gala::extraction_mode_from_string(args.mode);
    options.iterations = args.iters;
    options.batch_size = args.batch;
    options.seed = args.seed;
    options.fps_initial_index = args.fps_init;
    options.quantize = !args.no_quantize;
    options.threads = threads_fallback(args.threads);

    const gala::TriMesh mesh = gala::load_mesh(args.input);
    gala::FitResult result = gala::fit_gala(mesh, options);

    if (!result.rep.quantized) {
        // The container stores codes; a full-precision fit is snapped once here.
        std::printf("note=values quantized on save\n");
        gala::quantize_rep(result.rep);
    }
    gala::save_gala(result.rep, args.output);

    std::printf("input=%s\n", args.input.c_str());
    std::printf("triangles=%lld\n", static_cast<long long>(mesh.triangle_count()));
    std::printf("mode=%s\n", gala::to_string(options.mode));
    std::printf("extraction_s=%.3f\n", result.extraction_seconds);
    std::printf("refinement_s=%.3f\n", result.refinement_seconds);
    std::printf("mse_final=%.8g\n", result.final_loss);
    std::printf("grid_count=%lld\n", static_cast<long long>(result.rep.grid_count()));
    std::printf("param_count=%lld\n", static_cast<long long>(result.rep.param_count()));
    std::printf("occupancy=%.4f\n", result.rep.occupancy());
    std::printf("output=%s\n", args.output.c_str());
    return kExitOk;
}

struct ReconstructArgs {
    std::string input, output;
    int res = 256;
    bool no_flip = false;
    bool flip_3d = false;
    int threads = 0;
};

int run_reconstruct(const ReconstructArgs& args) {
    const gala::GalaRep rep = gala::load_gala(args.input);
    gala::ReconstructOptions options;
    options.resolution = args.res;
    options.flip_signs = !args.no_flip;
    options.flip_3d = args.flip_3d;
    options.threads = threads_fallback(args.threads);

    const gala::TriMesh mesh = gala::reconstruct_mesh(rep, options);
    gala::save_mesh(mesh, args.output);
    std::printf("vertices=%lld\n", static_cast<long long>(mesh.vertex_count()));
    std::printf("triangles=%lld\n", static_cast<long long>(mesh.triangle_count()));
    std::printf("output=%s\n", args.output.c_str());
    return kExitOk;
}

struct EvalArgs {
    std::string a, b;
    std::int64_t samples = 100000;
    std::uint64_t seed = 0;
    int threads = 0;
};

int run_eval(const EvalArgs& args) {
    const gala::TriMesh mesh_a = gala::load_mesh(args.a);
    const gala::TriMesh mesh_b = gala::load_mesh(args.b);
    const int threads = threads_fallback(args.threads);
    const double cd = gala::chamfer(mesh_a, mesh_b, args.samples, args.seed, threads);
    const double hd = gala::hausdorff(mesh_a, mesh_b, args.samples, args.seed, threads);
    std::printf("samples=%lld\n", static_cast<long long>(args.samples));
    std::printf("cd=%.10g\n", cd);
    std::printf("cd_x1e3=%.6f\n", cd * 1e3);
    std::printf("hd=%.10g\n", hd);
    std::printf("hd_x1e2=%.6f\n", hd * 1e2);
    return kExitOk;
}

struct ExportArgs {
    std::string input, output, stats;
};

int run_export(const ExportArgs& args) {
    const gala::GalaRep rep = gala::load_gala(args.input);
    if (args.stats.empty()) {
        gala::export_generation_data(rep, args.output);
    } else {
        const gala::GalaStats stats = gala::load_stats_sidecar(args.stats);
        gala::export_generation_data(rep, args.output, &stats);
    }
    std::printf("rows=%lld\n", static_cast<long long>(rep.params.leaf_slots()));
    std::printf("output=%s\n", args.output.c_str());
    return kExitOk;
}

int run_info(const std::string& input) {
    const gala::GalaRep rep = gala::load_gala(input);
    std::printf("roots=%d\n", rep.params.root_count);
    std::printf("depth=%d\n", rep.params.depth);
    std::printf("grid_res=%d\n", rep.params.grid_res);
    std::printf("hist_bins=%d\n", rep.params.hist_bins);
    std::printf("alpha=%.6g\n", static_cast<double>(rep.params.alpha));
    std::printf("mode=%s\n", gala::to_string(rep.mode));
    std::printf("grid_count=%lld\n", static_cast<long long>(rep.grid_count()));
    std::printf("leaf_slots=%lld\n", static_cast<long long>(rep.params.leaf_slots()));
    std::printf("occupancy=%.4f\n", rep.occupancy());
    std::printf("param_count=%lld\n", static_cast<long long>(rep.param_count()));
    std::printf("quantized=%d\n", rep.quantized ? 1 : 0);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"GALA shape fitting: octree forests of oriented local SDF grids"};
    app.require_subcommand(1);

    FitArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "Fit a representation to a mesh");
    fit->add_option("--input", fit_args.input, "Input mesh (OBJ/STL)")->required();
    fit->add_option("--output", fit_args.output, "Output .gala file")->required();
    fit->add_option("--roots", fit_args.roots, "Tree root count");
    fit->add_option("--alpha", fit_args.alpha, "Child expansion ratio");
    fit->add_option("--grid-res", fit_args.grid_res, "Lattice samples per axis");
    fit->add_option("--depth", fit_args.depth, "Subdivision depth");
    fit->add_option("--iters", fit_args.iters, "Refinement iterations");
    fit->add_option("--batch", fit_args.batch, "Query batch size");
    fit->add_option("--seed", fit_args.seed, "Sampling seed");
    fit->add_option("--fps-init", fit_args.fps_init, "Initial FPS sample index");
    fit->add_flag("--no-quantize", fit_args.no_quantize,
                  "Refine at full precision (values snapped once on save)");
    fit->add_option("--mode", fit_args.mode,
                    "full|no-adaptive|vanilla|normals|normals-hist");
    fit->add_option("--threads", fit_args.threads, "Worker threads (0 = all)");

    ReconstructArgs rec_args;
    CLI::App* rec = app.add_subcommand("reconstruct", "Extract a mesh");
    rec->add_option("--input", rec_args.input, "Input .gala file")->required();
    rec->add_option("--output", rec_args.output, "Output mesh (OBJ/STL)")->required();
    rec->add_option("--res", rec_args.res, "Volume resolution per axis");
    rec->add_flag("--no-flip", rec_args.no_flip, "Skip the interior sign flip");
    rec->add_flag("--flip-3d", rec_args.flip_3d,
                  "6-connected volumetric flip instead of per-slice");
    rec->add_option("--threads", rec_args.threads, "Worker threads (0 = all)");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "Chamfer/Hausdorff between meshes");
    eval->add_option("--a", eval_args.a, "First mesh")->required();
    eval->add_option("--b", eval_args.b, "Second mesh")->required();
    eval->add_option("--samples", eval_args.samples, "Samples per mesh");
    eval->add_option("--seed", eval_args.seed, "Sampling seed");
    eval->add_option("--threads", eval_args.threads, "Worker threads (0 = all)");

    ExportArgs export_args;
    CLI::App* exp = app.add_subcommand("export-gen",
                                       "Export flattened generation tensors");
    exp->add_option("--input", export_args.input, "Input .gala file")->required();
    exp->add_option("--output", export_args.output, "Output .galx file")->required();
    exp->add_option("--stats", export_args.stats,
                    "Dataset statistics sidecar (optional)");

    std::string info_input;
    CLI::App* info = app.add_subcommand("info", "Dump header and accounting");
    info->add_option("--input", info_input, "Input .gala file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadInput;
    }

    try {
        if (fit->parsed()) return run_fit(fit_args);
        if (rec->parsed()) return run_reconstruct(rec_args);
        if (eval->parsed()) return run_eval(eval_args);
        if (exp->parsed()) return run_export(export_args);
        if (info->parsed()) return run_info(info_input);
    } catch (const gala::InvalidInput& e) {
        std::fprintf(stderr, "error (bad input): %s\n", e.what());
        return kExitBadInput;
    } catch (const gala::NumericError& e) {
        std::fprintf(stderr, "error (numeric): %s\n", e.what());
        return kExitNumeric;
    } catch (const gala::IoError& e) {
        std::fprintf(stderr, "error (io): %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kExitOk;
}
