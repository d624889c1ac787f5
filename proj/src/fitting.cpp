#include "gala/fitting.hpp"

#include "gala/parallel.hpp"
#include "gala/rng.hpp"

#include <algorithm>
#include <cmath>

namespace gala {

QueryBatch sample_training_batch(const SdfOracle& oracle,
                                 const SurfaceSamples& samples, std::int64_t n,
                                 std::uint64_t seed, double near_fraction,
                                 double band, int threads) {
    if (n < 1) throw InvalidInput("batch size must be >= 1");
    if (samples.count() < 1) throw InvalidInput("no surface samples");

    const std::int64_t n_near =
        std::clamp<std::int64_t>(std::llround(near_fraction * n), 0, n);

    QueryBatch batch;
    batch.points.resize(n, 3);
    batch.targets.resize(n);

    SplitMix64 rng(mix_seed(seed, 0x7261696eULL));
    for (std::int64_t i = 0; i < n; ++i) {
        if (i < n_near) {
            const std::int64_t s =
                static_cast<std::int64_t>(rng.below(samples.count()));
            const double offset = rng.uniform(-band, band);
            batch.points.row(i) =
                Vec3(samples.points.row(s)) + offset * Vec3(samples.normals.row(s));
        } else {
            batch.points.row(i) = Vec3(rng.uniform(-0.5, 0.5),
                                       rng.uniform(-0.5, 0.5),
                                       rng.uniform(-0.5, 0.5));
        }
    }

    parallel_for(
        n,
        [&](std::int64_t i) {
            batch.targets[i] = truncated_sdf(oracle, batch.points.row(i));
        },
        threads);
    return batch;
}

namespace {

constexpr std::int64_t kChunk = 1024;

struct Contribution {
    std::int32_t grid;
    std::int32_t node;
    double grad;
};

// One fused forward/backward pass. Per-chunk partial sums are merged in chunk
// order, so the result is independent of the thread count.
double loss_and_grads(const GalaRep& rep, const GridIndex& index,
                      const QueryBatch& batch, std::vector<VecXd>* grads,
                      int threads) {
    if (batch.count() < 1) throw InvalidInput("empty batch");
    const std::int64_t n = batch.count();
    const int m = rep.params.grid_res;
    const std::int64_t chunks = (n + kChunk - 1) / kChunk;

    std::vector<double> chunk_loss(chunks, 0.0);
    std::vector<std::vector<Contribution>> chunk_grads;
    if (grads) chunk_grads.resize(chunks);

    parallel_for_blocks(
        n, kChunk,
        [&](std::int64_t begin, std::int64_t end) {
            const std::int64_t chunk = begin / kChunk;
            double loss = 0.0;
            std::vector<Contribution>* out = grads ? &chunk_grads[chunk] : nullptr;

            std::vector<std::int32_t> hit_ids;
            std::vector<double> hit_w;
            std::vector<TrilinearStencil> hit_st;

            for (std::int64_t i = begin; i < end; ++i) {
                const Vec3 x = batch.points.row(i);

                double weight_sum = 0.0;
                double value_sum = 0.0;
                hit_ids.clear();
                hit_w.clear();
                hit_st.clear();

                for (const std::int32_t id : index.candidates(x)) {
                    const LocalGrid& grid = rep.grids[id];
                    const double w = grid_weight(grid, x);
                    if (w <= 0.0) continue;
                    const TrilinearStencil st =
                        trilinear_stencil(m, lattice_local(grid, x));
                    double v = 0.0;
                    for (int c = 0; c < 8; ++c)
                        v += st.weight[c] * grid.values[st.node[c]];
                    weight_sum += w;
                    value_sum += w * v;
                    if (out) {
                        hit_ids.push_back(id);
                        hit_w.push_back(w);
                        hit_st.push_back(st);
                    }
                }

                const double value =
                    weight_sum > 0.0 ? value_sum / weight_sum : kOutsideValue;
                const double err = value - batch.targets[i];
                loss += err * err;

                if (out && weight_sum > 0.0) {
                    const double scale = 2.0 * err / static_cast<double>(n);
                    for (std::size_t h = 0; h < hit_ids.size(); ++h) {
                        const double coeff = scale * hit_w[h] / weight_sum;
                        for (int c = 0; c < 8; ++c)
                            out->push_back({hit_ids[h],
                                            static_cast<std::int32_t>(hit_st[h].node[c]),
                                            coeff * hit_st[h].weight[c]});
                    }
                }
            }
            chunk_loss[chunk] = loss;
        },
        threads);

    if (grads) {
        grads->assign(rep.grids.size(), VecXd::Zero(rep.params.values_per_grid()));
        for (const auto& chunk : chunk_grads)
            for (const Contribution& c : chunk)
                (*grads)[c.grid][c.node] += c.grad;
    }

    double loss = 0.0;
    for (double l : chunk_loss) loss += l;
    return loss / static_cast<double>(n);
}

} // namespace

double mse_loss(const GalaRep& rep, const GridIndex& index,
                const QueryBatch& batch) {
    return loss_and_grads(rep, index, batch, nullptr, 1);
}

double mse_loss(const GalaRep& rep, const QueryBatch& batch) {
    return mse_loss(rep, GridIndex(rep), batch);
}

std::vector<VecXd> grad_values(const GalaRep& rep, const GridIndex& index,
                               const QueryBatch& batch, int threads) {
    std::vector<VecXd> grads;
    loss_and_grads(rep, index, batch, &grads, threads);
    return grads;
}

RefineResult refine(GalaRep& rep, const SdfOracle& oracle,
                    const SurfaceSamples& samples, const RefineOptions& options) {
    RefineResult result;
    if (options.iterations < 0) throw InvalidInput("iterations must be >= 0");
    if (options.iterations == 0) return result;

    const std::int64_t n_grids = rep.grid_count();
    const std::int64_t per_grid = rep.params.values_per_grid();
    const GridIndex index(rep);  // geometry is fixed during refinement

    // Full-precision master values; forward passes read rep.grids.
    std::vector<VecXd> master(n_grids);
    for (std::int64_t g = 0; g < n_grids; ++g) master[g] = rep.grids[g].values;
    const std::vector<VecXd> initial = master;

    std::vector<VecXd> adam_m(n_grids, VecXd::Zero(per_grid));
    std::vector<VecXd> adam_v(n_grids, VecXd::Zero(per_grid));
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

    double lr = options.learning_rate;
    std::vector<VecXd> grads;
    result.loss_history.reserve(options.iterations);

    for (int iter = 0; iter < options.iterations; ++iter) {
        if (std::find(options.decay_at.begin(), options.decay_at.end(), iter) !=
            options.decay_at.end())
            lr *= options.decay_factor;

        if (options.quantize) {
            // Straight-through: evaluate on decoded codes, step the masters.
            for (std::int64_t g = 0; g < n_grids; ++g)
                for (std::int64_t k = 0; k < per_grid; ++k)
                    rep.grids[g].values[k] = dequantize(
                        quantize(master[g][k], kValueLo, kValueHi), kValueLo,
                        kValueHi);
        } else {
            for (std::int64_t g = 0; g < n_grids; ++g)
                rep.grids[g].values = master[g];
        }

        const QueryBatch batch = sample_training_batch(
            oracle, samples, options.batch_size,
            mix_seed(options.seed, static_cast<std::uint64_t>(iter) + 1),
            options.near_fraction, options.band, options.threads);

        const double loss =
            loss_and_grads(rep, index, batch, &grads, options.threads);
        if (!std::isfinite(loss))
            throw NumericError("non-finite loss at iteration " + std::to_string(iter));
        result.loss_history.push_back(loss);

        const double bias1 = 1.0 - std::pow(kBeta1, iter + 1);
        const double bias2 = 1.0 - std::pow(kBeta2, iter + 1);
        parallel_for(
            n_grids,
            [&](std::int64_t g) {
                for (std::int64_t k = 0; k < per_grid; ++k) {
                    const double grad = grads[g][k];
                    adam_m[g][k] = kBeta1 * adam_m[g][k] + (1.0 - kBeta1) * grad;
                    adam_v[g][k] = kBeta2 * adam_v[g][k] + (1.0 - kBeta2) * grad * grad;
                    const double mhat = adam_m[g][k] / bias1;
                    const double vhat = adam_v[g][k] / bias2;
                    master[g][k] -=
                        lr * (mhat / (std::sqrt(vhat) + kEps) +
                              options.anchor * (master[g][k] - initial[g][k]));
                }
            },
            options.threads);
    }

    if (options.quantize) {
        for (std::int64_t g = 0; g < n_grids; ++g) rep.grids[g].values = master[g];
        quantize_rep(rep);
    } else {
        for (std::int64_t g = 0; g < n_grids; ++g) rep.grids[g].values = master[g];
    }

    const QueryBatch final_batch = sample_training_batch(
        oracle, samples, options.batch_size,
        mix_seed(options.seed, static_cast<std::uint64_t>(options.iterations) + 1),
        options.near_fraction, options.band, options.threads);
    result.final_loss = loss_and_grads(rep, index, final_batch, nullptr,
                                       options.threads);
    if (!std::isfinite(result.final_loss))
        throw NumericError("refinement diverged: non-finite final loss");
    return result;
}

} // namespace gala
