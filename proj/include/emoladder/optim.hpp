#pragma once

#include <cstdint>
#include <vector>

#include "emoladder/matrix.hpp"

namespace emoladder {

struct NadamConfig {
    double learning_rate = 5e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Nesterov-accelerated Adam (Dozat's formulation, standard bias correction,
// no beta1 schedule). One state per model; moment accumulators are parallel
// to the model's trainable-parameter list.
struct NadamState {
    NadamConfig config;
    std::vector<Matrix> m; // first moments
    std::vector<Matrix> v; // second moments
    std::uint64_t t = 0;   // completed steps

    void init(const std::vector<const Matrix*>& params);
};

// One update over all tensors:
//   m <- b1*m + (1-b1)*g          v <- b2*v + (1-b2)*g^2
//   m_hat = m/(1-b1^t)            v_hat = v/(1-b2^t)
//   theta <- theta - lr * (b1*m_hat + (1-b1)*g/(1-b1^t)) / (sqrt(v_hat) + eps)
// Non-finite gradients abort with NumericError; nothing is clipped silently.
void nadam_step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads,
                NadamState& state);

} // namespace emoladder
