#include "emoladder/gradcheck.hpp"

#include "emoladder/losses.hpp"

namespace emoladder {

double training_objective(ModelParams& params, const Matrix& x, const Matrix& targets,
                          const Rng& rng_snapshot) {
    Rng rng = rng_snapshot;
    LadderTrace t = forward_train(params, x, rng);
    const ModelConfig& cfg = params.config;
    std::vector<double> w(cfg.n_attrs(), cfg.n_attrs() > 1 ? 1.0 / static_cast<double>(cfg.n_attrs()) : 1.0);
    if (cfg.is_mtl()) {
        w = {cfg.mtl_weights.alpha, cfg.mtl_weights.beta, cfg.mtl_weights.dominance()};
    }
    double total = 0.0;
    for (std::size_t a = 0; a < cfg.n_attrs(); ++a) {
        std::vector<double> grad;
        total += w[a] * ccc_loss_and_grad(column(t.predictions, a), column(targets, a), grad);
    }
    if (cfg.is_ladder()) {
        for (std::size_t l = 0; l < cfg.n_levels(); ++l) {
            total += cfg.lambda * mse(t.z_hat[l], t.z[l]);
        }
    }
    return total;
}

GradCheckReport check_model_gradients(ModelParams& params, const Matrix& x,
                                      const Matrix& targets, const Rng& rng_snapshot) {
    Rng rng = rng_snapshot;
    LadderTrace trace = forward_train(params, x, rng);
    BackwardResult res = backward(params, trace, targets);

    auto loss = [&]() { return training_objective(params, x, targets, rng_snapshot); };

    GradCheckReport report;
    std::vector<ParamRef> prefs = trainable_parameters(params);
    std::vector<ParamRef> grefs = trainable_parameters(res.grads);
    for (std::size_t k = 0; k < prefs.size(); ++k) {
        check_tensor_grad(report, prefs[k].name, *prefs[k].tensor, *grefs[k].tensor, loss);
    }
    return report;
}

GradCheckReport check_dae_pretrain_gradients(ModelParams& params, const Matrix& x,
                                             const Rng& rng_snapshot) {
    Rng rng = rng_snapshot;
    DaeTrace trace = dae_forward_train(params, x, rng);
    ModelParams grads = dae_backward(params, trace);

    auto loss = [&]() {
        Rng r = rng_snapshot;
        return dae_forward_train(params, x, r).reconstruction_mse;
    };

    GradCheckReport report;
    std::vector<ParamRef> prefs = all_parameters(params);
    std::vector<ParamRef> grefs = all_parameters(grads);
    for (std::size_t k = 0; k < prefs.size(); ++k) {
        if (prefs[k].name.rfind("head.", 0) == 0) continue; // outside this objective
        check_tensor_grad(report, prefs[k].name, *prefs[k].tensor, *grefs[k].tensor, loss);
    }
    return report;
}

GradCheckReport variant_grad_check(Variant variant, std::size_t input_dim,
                                   const std::vector<std::size_t>& hidden, std::size_t batch,
                                   std::uint64_t seed) {
    ModelConfig cfg = ModelConfig::for_variant(variant, input_dim);
    cfg.hidden_dims = hidden;
    Rng rng(seed);
    ModelParams params = build_model(cfg, rng);
    Matrix x = gaussian_sample(batch, input_dim, 1.0, rng);
    Matrix targets = gaussian_sample(batch, cfg.n_attrs(), 1.0, rng);

    if (variant == Variant::autoencoder) {
        GradCheckReport pre = check_dae_pretrain_gradients(params, x, rng);
        params.encoder_frozen = true;
        GradCheckReport head = check_model_gradients(params, x, targets, rng);
        return head.max_rel_error > pre.max_rel_error ? head : pre;
    }
    return check_model_gradients(params, x, targets, rng);
}

} // namespace emoladder
