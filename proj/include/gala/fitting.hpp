#pragma once

#include "gala/gala_rep.hpp"
#include "gala/sdf_oracle.hpp"
#include "gala/tri_mesh.hpp"
#include "gala/types.hpp"

#include <cstdint>
#include <vector>

namespace gala {

struct QueryBatch {
    MatX3 points;
    VecXd targets;  // truncated oracle distances

    std::int64_t count() const { return points.rows(); }
};

// Training batch: near_fraction of the points are surface samples displaced
// along their normal by a uniform offset in [-band, band]; the rest are
// uniform in the [-0.5, 0.5]^3 box. Deterministic in seed.
QueryBatch sample_training_batch(const SdfOracle& oracle,
                                 const SurfaceSamples& samples, std::int64_t n,
                                 std::uint64_t seed, double near_fraction = 0.9,
                                 double band = 0.05, int threads = 0);

// Mean squared error between the blended query values and the batch targets.
// Points outside every grid contribute (kOutsideValue - target)^2 and no
// gradient.
double mse_loss(const GalaRep& rep, const GridIndex& index,
                const QueryBatch& batch);
double mse_loss(const GalaRep& rep, const QueryBatch& batch);

// Analytic dLoss/dV, one vector of m^3 entries per grid. The query is linear
// in the values, so the gradient is exact.
std::vector<VecXd> grad_values(const GalaRep& rep, const GridIndex& index,
                               const QueryBatch& batch, int threads = 0);

struct RefineOptions {
    int iterations = 400;
    std::int64_t batch_size = 8192;
    double learning_rate = 1e-3;
    std::vector<int> decay_at = {200, 300};
    double decay_factor = 0.5;
    double near_fraction = 0.9;
    double band = 0.05;
    // Decoupled pull toward the oracle-sampled initial values. Lattice nodes
    // the batch never constrains (deep clamp regions) would otherwise drift
    // freely and lose the sign structure the interior flip depends on.
    double anchor = 0.3;
    std::uint64_t seed = 0;
    bool quantize = true;  // straight-through: forward on decoded 8-bit values,
                           // updates on the full-precision masters
    int threads = 0;
};

struct RefineResult {
    std::vector<double> loss_history;  // batch MSE per iteration, pre-update
    double final_loss = 0.0;           // fresh-batch MSE after the last update
};

// First-order refinement of the grid values (Adam; geometry stays fixed).
// With options.quantize the final values are stored through their codes and
// the rep is marked quantized. iterations == 0 leaves the rep untouched.
RefineResult refine(GalaRep& rep, const SdfOracle& oracle,
                    const SurfaceSamples& samples,
                    const RefineOptions& options = {});

} // namespace gala
