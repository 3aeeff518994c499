#pragma once

// Central-finite-difference gradient verification. The numeric side only
// re-evaluates the forward objective; it never touches backward(), so the
// two routes stay independent.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "emoladder/matrix.hpp"
#include "emoladder/model.hpp"
#include "emoladder/rng.hpp"

namespace emoladder {

// d/dx f() at the value stored in `slot`.
template <typename F>
double central_diff(F&& f, double& slot, double h = 1e-5) {
    const double saved = slot;
    slot = saved + h;
    const double up = f();
    slot = saved - h;
    const double down = f();
    slot = saved;
    return (up - down) / (2.0 * h);
}

inline double gradcheck_rel_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    return std::abs(analytic - numeric) / denom;
}

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst; // tensor/entry of the largest disagreement
};

template <typename LossFn>
void check_tensor_grad(GradCheckReport& report, const std::string& name, Matrix& tensor,
                       const Matrix& analytic, LossFn&& loss, double h = 1e-5) {
    for (std::size_t i = 0; i < tensor.size(); ++i) {
        const double numeric = central_diff(loss, tensor.data()[i], h);
        const double err = gradcheck_rel_error(analytic.data()[i], numeric);
        if (err > report.max_rel_error) {
            report.max_rel_error = err;
            report.worst = name + "[" + std::to_string(i) + "]";
        }
    }
}

// The composite training objective recomputed from a fresh forward pass with
// the snapshotted rng (so corruption draws and dropout masks replay exactly).
double training_objective(ModelParams& params, const Matrix& x, const Matrix& targets,
                          const Rng& rng_snapshot);

// Every trainable parameter of one backward() call against finite
// differences of training_objective.
GradCheckReport check_model_gradients(ModelParams& params, const Matrix& x,
                                      const Matrix& targets, const Rng& rng_snapshot);

// Same for the autoencoder pretraining objective (reconstruction mse).
GradCheckReport check_dae_pretrain_gradients(ModelParams& params, const Matrix& x,
                                             const Rng& rng_snapshot);

// Builds a fresh model of the given variant and checks its full objective on
// one random batch. The autoencoder runs both phases and reports the worse.
GradCheckReport variant_grad_check(Variant variant, std::size_t input_dim,
                                   const std::vector<std::size_t>& hidden, std::size_t batch,
                                   std::uint64_t seed);

} // namespace emoladder
