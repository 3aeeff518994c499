#pragma once

#include "emoladder/matrix.hpp"
#include "emoladder/rng.hpp"

namespace emoladder {

enum class Mode { train, infer };

// ---------------------------------------------------------------------------
// Dense affine: y = xW + b, bias broadcast over the batch.
// ---------------------------------------------------------------------------

struct DenseParams {
    Matrix w; // in x out
    Matrix b; // 1 x out
};

struct DenseCache {
    Matrix x;
    bool consumed = false;
};

Matrix dense_forward(const Matrix& x, const DenseParams& p, DenseCache* cache = nullptr);

// Accumulates parameter gradients into grad_w / grad_b (callers zero them
// once per step; shared weights receive contributions from several paths).
Matrix dense_backward(const Matrix& grad_out, const DenseParams& p, DenseCache& cache,
                      Matrix& grad_w, Matrix& grad_b);

// ---------------------------------------------------------------------------
// Batch normalization. Train mode normalizes by batch mean/variance
// (population, 1/N) and optionally folds them into the running statistics;
// infer mode normalizes by the running statistics. gamma/beta are the
// learnable scale and shift (gamma_bn/beta_bn in the docs, to keep them apart
// from the multi-task loss weights).
// ---------------------------------------------------------------------------

struct BatchNormParams {
    Matrix gamma;        // 1 x n
    Matrix beta;         // 1 x n
    Matrix running_mean; // 1 x n
    Matrix running_var;  // 1 x n
    double epsilon = 1e-5;
    double momentum = 0.99; // retained fraction of the old running value
};

struct BatchNormCache {
    Matrix x_hat;   // normalized input, batch x n
    Matrix inv_std; // 1 x n
    bool consumed = false;
};

// Train mode requires batch size >= 2. A cache may only be requested in
// train mode; the infer path is never differentiated.
Matrix batchnorm_forward(const Matrix& x, BatchNormParams& p, Mode mode,
                         BatchNormCache* cache = nullptr, bool update_running = true);

// Infer-mode normalization without side effects.
Matrix batchnorm_infer(const Matrix& x, const BatchNormParams& p);

Matrix batchnorm_backward(const Matrix& grad_out, const BatchNormParams& p,
                          BatchNormCache& cache, Matrix& grad_gamma, Matrix& grad_beta);

// ---------------------------------------------------------------------------
// Plain per-column standardization, y = (x - mu) / sqrt(var + eps), no
// learnable parameters. The ladder decoder's top-down projections use this.
// ---------------------------------------------------------------------------

struct ColnormCache {
    Matrix x_hat;
    Matrix inv_std;
    bool consumed = false;
};

Matrix colnorm_forward(const Matrix& x, double epsilon, ColnormCache* cache = nullptr);
Matrix colnorm_backward(const Matrix& grad_out, ColnormCache& cache);

// ---------------------------------------------------------------------------
// ReLU. Derivative at exactly 0 is defined as 0.
// ---------------------------------------------------------------------------

struct ReluCache {
    Matrix x;
    bool consumed = false;
};

Matrix relu_forward(const Matrix& x, ReluCache* cache = nullptr);
Matrix relu_backward(const Matrix& grad_out, ReluCache& cache);

// ---------------------------------------------------------------------------
// Inverted dropout: train mode zeroes units with probability p_drop and
// scales survivors by 1/(1-p_drop); infer mode is the identity. Train mode
// consumes one uniform draw per element regardless of p_drop, so the stream
// position does not depend on the rate.
// ---------------------------------------------------------------------------

struct DropoutCache {
    Matrix mask; // entries are 0 or 1/(1-p_drop)
    bool consumed = false;
};

Matrix dropout_forward(const Matrix& x, double p_drop, Rng& rng, Mode mode,
                       DropoutCache* cache = nullptr);
Matrix dropout_backward(const Matrix& grad_out, DropoutCache& cache);

// ---------------------------------------------------------------------------
// Seeded weight initialization: scaled-uniform fan-in schemes.
// ---------------------------------------------------------------------------

// He-style uniform, for layers feeding a ReLU.
DenseParams init_dense_he(std::size_t in_dim, std::size_t out_dim, Rng& rng);
// Xavier-style uniform, for linear layers.
DenseParams init_dense_xavier(std::size_t in_dim, std::size_t out_dim, Rng& rng);

BatchNormParams init_batchnorm(std::size_t n);

} // namespace emoladder
