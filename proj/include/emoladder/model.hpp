#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "emoladder/layers.hpp"
#include "emoladder/losses.hpp"
#include "emoladder/matrix.hpp"
#include "emoladder/rng.hpp"

namespace emoladder {

// The five architectures under study. The first three are baselines; the
// ladder variants add the denoising decoder with lateral connections.
enum class Variant { autoencoder, stl, mtl, ladder_stl, ladder_mtl };

enum class Attr : std::size_t { arousal = 0, valence = 1, dominance = 2 };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);
std::string attr_name(Attr a);
Attr attr_from_name(const std::string& name);

struct ModelConfig {
    Variant variant = Variant::stl;
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_dims{256, 256};
    std::vector<Attr> output_attrs{Attr::arousal};
    double noise_variance = 0.3; // sigma^2 of the per-layer Gaussian corruption
    double lambda = 1.0;         // reconstruction weight, broadcast to all layers
    double dropout_input = 0.5;
    double dropout_hidden1 = 0.5;
    MtlWeights mtl_weights;

    // Variant-appropriate defaults: ladder variants get dropout 0.1, the
    // baselines 0.5; MTL variants predict all three attributes.
    static ModelConfig for_variant(Variant v, std::size_t input_dim,
                                   Attr target = Attr::arousal);

    bool is_ladder() const {
        return variant == Variant::ladder_stl || variant == Variant::ladder_mtl;
    }
    bool is_mtl() const {
        return variant == Variant::mtl || variant == Variant::ladder_mtl;
    }
    // Ladder levels 0..L where level 0 is the input and L = hidden count.
    std::size_t n_levels() const { return hidden_dims.size() + 1; }
    std::size_t n_attrs() const { return output_attrs.size(); }

    void validate() const; // throws ConfigError
};

struct EncoderLayerParams {
    DenseParams dense;
    BatchNormParams bn;
};

// Per-unit denoising MLP g(): inputs [u_i, zt_i, u_i*zt_i] -> 4 hidden
// (leaky ReLU, slope 0.1) -> 1 linear output, with separate parameters for
// every unit. Stored vectorized over units: each matrix is units x 4 except
// out_b (units x 1).
struct CombinatorParams {
    Matrix w_u, w_z, w_uz; // input weights per hidden node
    Matrix b_h;            // hidden biases
    Matrix w_out;          // hidden -> output weights
    Matrix b_out;          // units x 1
};

constexpr double kCombinatorLeakSlope = 0.1;

struct CombinatorCache {
    Matrix u, zt;
    std::array<Matrix, 4> h; // hidden pre-activations
    bool consumed = false;
};

Matrix combinator_forward(const Matrix& u, const Matrix& z_tilde, const CombinatorParams& p,
                          CombinatorCache* cache = nullptr);

// Accumulates parameter gradients into `grads` and input gradients into
// grad_u / grad_zt (which must be zero-or-accumulated matrices of the right
// shape, or empty).
void combinator_backward(const Matrix& grad_zhat, const CombinatorParams& p,
                         CombinatorCache& cache, CombinatorParams& grads, Matrix& grad_u,
                         Matrix& grad_zt);

// One decoder level l: the combinator for the level plus, below the top, the
// vertical map producing this level's top-down projection,
// u^(l) = colnorm(z_hat^(l+1) * vert_w).
struct DecoderLevelParams {
    Matrix vert_w; // dims(l+1) x dims(l); empty at the top level
    CombinatorParams comb;
};

struct ModelParams {
    ModelConfig config;
    std::vector<EncoderLayerParams> encoder; // shared by clean and noisy paths
    DenseParams head;                        // top width x n_attrs
    std::vector<DecoderLevelParams> decoder; // ladder variants: levels 0..L

    // Autoencoder-baseline mirror decoder: hidden stages then a linear output
    // back to input width.
    std::vector<EncoderLayerParams> ae_decoder_hidden;
    DenseParams ae_decoder_out;

    bool encoder_frozen = false; // set by dae_pretrain_then_freeze
};

struct ParamRef {
    std::string name;
    Matrix* tensor;
};

// Every learnable tensor, in a fixed documented order (checkpoint manifest
// order). Running batch-norm statistics are state, not parameters; see
// state_tensors().
std::vector<ParamRef> all_parameters(ModelParams& p);
// all_parameters minus encoder/decoder tensors when the encoder is frozen.
std::vector<ParamRef> trainable_parameters(ModelParams& p);
// Running batch-norm statistics (checkpointed alongside parameters).
std::vector<ParamRef> state_tensors(ModelParams& p);

ModelParams build_model(const ModelConfig& config, Rng& rng);
// Zero-valued mirror of `p` used as a gradient accumulator.
ModelParams make_grads_like(const ModelParams& p);

// Record of one training forward pass. Levels are indexed 0..L; baseline
// variants fill only the training path (z_tilde) and predictions.
struct LadderTrace {
    std::size_t batch = 0;
    Matrix input;
    std::vector<Matrix> z;       // clean post-batch-norm representations, z[0] = x
    std::vector<Matrix> z_tilde; // training-path representations
    std::vector<Matrix> z_hat;   // reconstructions
    std::vector<Matrix> u;       // top-down projections
    Matrix predictions;          // batch x n_attrs

    bool has_clean = false;
    bool has_decoder = false;
    bool consumed = false;

    // backward caches, indexed by encoder layer (layer l at [l-1])
    std::vector<DenseCache> dense_noisy, dense_clean;
    std::vector<BatchNormCache> bn_noisy, bn_clean;
    std::vector<ReluCache> relu_noisy, relu_clean;
    DropoutCache drop_input, drop_hidden1;
    bool dropout_active = false;
    DenseCache head_cache;
    // decoder caches per level 0..L
    std::vector<ColnormCache> colnorm_cache;
    std::vector<CombinatorCache> comb_cache;
};

// Training forward pass. Ladder variants run the clean encoder, the noisy
// encoder (Gaussian corruption at the input and after every batch
// normalization) and the decoder; the supervised head reads the top noisy
// representation z_tilde^(L). Baselines run a single dropout-regularized
// path. Running batch-norm statistics are updated from the clean path.
LadderTrace forward_train(ModelParams& params, const Matrix& x, Rng& rng);

// Clean-path inference: no noise, dropout as identity, batch norm with
// running statistics. Output is batch x n_attrs. Decoder parameters never
// influence this path.
Matrix forward_infer(const ModelParams& params, const Matrix& x);

struct BackwardResult {
    ModelParams grads;
    LossBreakdown loss;
};

// Gradients of C = C_c + lambda * sum_l C_d^(l) with respect to every
// parameter: supervised path, lateral connections, decoder, and the clean
// encoder (the reconstruction targets z^(l) are part of the graph).
// `targets` is batch x n_attrs in config.output_attrs order.
BackwardResult backward(const ModelParams& params, LadderTrace& trace, const Matrix& targets);

// Sets every encoder batch-norm running statistic to the statistics the
// clean path observes on `x` (momentum bypassed).
void freeze_batchnorm_to_batch(ModelParams& params, const Matrix& x);

// Corrupts x with the configured noise variance (no dropout), runs the
// ladder paths and decoder without touching running statistics, and returns
// mse(z_hat^(0), x): the input-layer denoising error. The identity-on-noisy
// reference value is the noise variance itself.
double ladder_denoising_mse(ModelParams& params, const Matrix& x, Rng& rng);

// ---------------------------------------------------------------------------
// Denoising-autoencoder baseline: unsupervised pretraining, then a frozen
// encoder under a trainable linear head.
// ---------------------------------------------------------------------------

struct DaeTrace {
    Matrix input;
    double reconstruction_mse = 0.0;
    bool consumed = false;

    DropoutCache drop_input, drop_hidden1;
    bool dropout_active = false;
    std::vector<DenseCache> enc_dense;
    std::vector<BatchNormCache> enc_bn;
    std::vector<ReluCache> enc_relu;
    std::vector<DenseCache> dec_dense;
    std::vector<BatchNormCache> dec_bn;
    std::vector<ReluCache> dec_relu;
    DenseCache dec_out_cache;
    Matrix reconstruction;
};

// Corrupt -> encode -> decode; the loss is mse(reconstruction, clean x).
DaeTrace dae_forward_train(ModelParams& params, const Matrix& x, Rng& rng);
ModelParams dae_backward(const ModelParams& params, DaeTrace& trace);

// Reconstruction error of the trained autoencoder on noise-corrupted x
// (dropout off, running statistics untouched).
double dae_denoising_mse(ModelParams& params, const Matrix& x, Rng& rng);

struct DaePretrainConfig {
    double learning_rate = 1e-3;
    std::size_t epochs = 30;
    std::size_t batch_size = 128;
};

// Trains encoder + mirror decoder to reconstruct the clean input from the
// corrupted input, then freezes the encoder; only the head stays trainable.
ModelParams dae_pretrain_then_freeze(const ModelConfig& config, const Matrix& train_features,
                                     Rng& rng, const DaePretrainConfig& pretrain);

} // namespace emoladder
