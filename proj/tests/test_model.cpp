#include <doctest.h>

#include <cmath>

#include "emoladder/errors.hpp"
#include "emoladder/model.hpp"
#include "emoladder/gradcheck.hpp"

using namespace emoladder;

namespace {

ModelConfig tiny_config(Variant v) {
    ModelConfig c = ModelConfig::for_variant(v, 7);
    c.hidden_dims = {5, 3};
    return c;
}

} // namespace

TEST_CASE("config validation") {
    ModelConfig c = ModelConfig::for_variant(Variant::stl, 10);
    CHECK_NOTHROW(c.validate());

    c.output_attrs = {Attr::arousal, Attr::valence};
    CHECK_THROWS_AS(c.validate(), ConfigError);

    ModelConfig m = ModelConfig::for_variant(Variant::mtl, 10);
    CHECK(m.output_attrs.size() == 3);
    m.output_attrs = {Attr::valence, Attr::arousal, Attr::dominance};
    CHECK_THROWS_AS(m.validate(), ConfigError);

    ModelConfig l = ModelConfig::for_variant(Variant::ladder_stl, 10);
    CHECK(l.dropout_input == 0.1);
    CHECK(ModelConfig::for_variant(Variant::stl, 10).dropout_input == 0.5);
    l.hidden_dims.clear();
    CHECK_THROWS_AS(l.validate(), ConfigError);
}

TEST_CASE("build_model determinism and shapes") {
    ModelConfig c = ModelConfig::for_variant(Variant::stl, 6373);
    Rng a(5), b(5);
    ModelParams p1 = build_model(c, a);
    ModelParams p2 = build_model(c, b);
    CHECK(exactly_equal(p1.encoder[0].dense.w, p2.encoder[0].dense.w));
    CHECK(exactly_equal(p1.head.w, p2.head.w));

    CHECK(p1.encoder[0].dense.w.rows() == 6373);
    CHECK(p1.encoder[0].dense.w.cols() == 256);
    CHECK(p1.encoder[1].dense.w.rows() == 256);
    CHECK(p1.encoder[1].dense.w.cols() == 256);
    CHECK(p1.head.w.rows() == 256);
    CHECK(p1.head.w.cols() == 1);
}

TEST_CASE("combinator parameter count follows the per-unit 3-4-1 parameterization") {
    ModelConfig c = tiny_config(Variant::ladder_stl);
    Rng rng(1);
    ModelParams p = build_model(c, rng);
    std::size_t comb_params = 0;
    for (ParamRef& r : all_parameters(p)) {
        if (r.name.find(".comb.") != std::string::npos) comb_params += r.tensor->size();
    }
    // per unit: 3x4 input weights, 4 hidden biases, 4 output weights, 1 output bias
    const std::size_t units = 7 + 5 + 3;
    CHECK(comb_params == units * 21);
}

TEST_CASE("combinator zero map and per-unit independence") {
    const std::size_t n = 4;
    CombinatorParams p;
    p.w_u = Matrix(n, 4);
    p.w_z = Matrix(n, 4);
    p.w_uz = Matrix(n, 4);
    p.b_h = Matrix(n, 4);
    p.w_out = Matrix(n, 4);
    p.b_out = Matrix(n, 1);
    for (std::size_t i = 0; i < n; ++i) p.b_out.at(i, 0) = 0.25 * static_cast<double>(i);

    Rng rng(3);
    Matrix u = gaussian_sample(5, n, 1.0, rng);
    Matrix zt = gaussian_sample(5, n, 1.0, rng);
    Matrix out = combinator_forward(u, zt, p);
    for (std::size_t b = 0; b < 5; ++b) {
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(out.at(b, i) == p.b_out.at(i, 0)); // all-zero weights -> output bias
        }
    }

    // perturbing unit j's inputs must not change other units
    ModelConfig c = tiny_config(Variant::ladder_stl);
    Rng build_rng(7);
    ModelParams model = build_model(c, build_rng);
    const CombinatorParams& comb = model.decoder[2].comb; // width 3
    Matrix u2 = gaussian_sample(4, 3, 1.0, rng);
    Matrix z2 = gaussian_sample(4, 3, 1.0, rng);
    Matrix base = combinator_forward(u2, z2, comb);
    Matrix u2b = u2;
    u2b.at(0, 1) += 0.5;
    Matrix moved = combinator_forward(u2b, z2, comb);
    for (std::size_t i = 0; i < 3; ++i) {
        if (i == 1) continue;
        for (std::size_t b = 0; b < 4; ++b) CHECK(moved.at(b, i) == base.at(b, i));
    }
}

TEST_CASE("noiseless collapse: sigma 0 and dropout 0 make both paths identical") {
    ModelConfig c = tiny_config(Variant::ladder_stl);
    c.noise_variance = 0.0;
    c.dropout_input = 0.0;
    c.dropout_hidden1 = 0.0;
    Rng rng(11);
    ModelParams p = build_model(c, rng);
    Matrix x = gaussian_sample(6, 7, 1.0, rng);
    LadderTrace t = forward_train(p, x, rng);
    REQUIRE(t.z.size() == 3);
    REQUIRE(t.z_tilde.size() == 3);
    for (std::size_t l = 0; l < 3; ++l) {
        CHECK(exactly_equal(t.z[l], t.z_tilde[l]));
    }
}

TEST_CASE("trace has L+1 levels and deterministic replay") {
    ModelConfig c = tiny_config(Variant::ladder_mtl);
    Rng rng(13);
    ModelParams p = build_model(c, rng);
    Matrix x = gaussian_sample(4, 7, 1.0, rng);

    Rng f1(21), f2(21);
    LadderTrace t1 = forward_train(p, x, f1);
    LadderTrace t2 = forward_train(p, x, f2);
    CHECK(t1.z_tilde.size() == 3);
    CHECK(t1.z_hat.size() == 3);
    CHECK(t1.u.size() == 3);
    CHECK(exactly_equal(t1.predictions, t2.predictions));
    for (std::size_t l = 0; l < 3; ++l) {
        CHECK(exactly_equal(t1.z_tilde[l], t2.z_tilde[l]));
        CHECK(exactly_equal(t1.z_hat[l], t2.z_hat[l]));
    }
}

TEST_CASE("inference is independent of decoder parameters") {
    ModelConfig c = tiny_config(Variant::ladder_stl);
    Rng rng(17);
    ModelParams p = build_model(c, rng);
    Matrix x = gaussian_sample(5, 7, 1.0, rng);
    Matrix before = forward_infer(p, x);
    CHECK(before.rows() == 5);
    CHECK(before.cols() == 1);
    for (DecoderLevelParams& level : p.decoder) {
        for (std::size_t i = 0; i < level.comb.w_out.size(); ++i) {
            level.comb.w_out.data()[i] += 3.21;
        }
        if (!level.vert_w.empty()) level.vert_w.at(0, 0) -= 1.5;
    }
    CHECK(exactly_equal(forward_infer(p, x), before));
}

TEST_CASE("forward_infer equals the training-path head output under frozen batch stats") {
    ModelConfig c = tiny_config(Variant::ladder_stl);
    c.noise_variance = 0.0;
    c.dropout_input = 0.0;
    c.dropout_hidden1 = 0.0;
    Rng rng(19);
    ModelParams p = build_model(c, rng);
    Matrix x = gaussian_sample(6, 7, 1.0, rng);
    freeze_batchnorm_to_batch(p, x);
    LadderTrace t = forward_train(p, x, rng);
    Matrix infer = forward_infer(p, x);
    CHECK(approx_equal(infer, t.predictions, 1e-12));
}

TEST_CASE("lambda 0 removes all decoder gradients") {
    ModelConfig c = tiny_config(Variant::ladder_stl);
    c.lambda = 0.0;
    Rng rng(23);
    ModelParams p = build_model(c, rng);
    Matrix x = gaussian_sample(4, 7, 1.0, rng);
    Matrix targets = gaussian_sample(4, 1, 1.0, rng);
    LadderTrace t = forward_train(p, x, rng);
    BackwardResult res = backward(p, t, targets);
    for (ParamRef& r : all_parameters(res.grads)) {
        if (r.name.rfind("decoder", 0) == 0) {
            CHECK(max_abs(*r.tensor) == 0.0);
        }
    }
    CHECK(res.loss.total == res.loss.supervised);
}

TEST_CASE("encoder gradients accumulate from both supervised and reconstruction paths") {
    ModelConfig c = tiny_config(Variant::ladder_stl);
    Rng rng(29);
    ModelParams p = build_model(c, rng);
    Matrix x = gaussian_sample(4, 7, 1.0, rng);
    Matrix targets = gaussian_sample(4, 1, 1.0, rng);

    Rng f1(31), f2(31);
    LadderTrace t_full = forward_train(p, x, f1);
    BackwardResult full = backward(p, t_full, targets);

    // reconstruction-only gradients: same draws, lambda unchanged, but the
    // supervised contribution removed by differencing against lambda=0
    ModelConfig c0 = c;
    c0.lambda = 0.0;
    ModelParams p0 = p;
    p0.config = c0;
    LadderTrace t_sup = forward_train(p0, x, f2);
    BackwardResult sup_only = backward(p0, t_sup, targets);

    // encoder gradient must differ once the reconstruction path is removed
    CHECK_FALSE(exactly_equal(full.grads.encoder[0].dense.w, sup_only.grads.encoder[0].dense.w));
}

TEST_CASE("loss decomposition is exact") {
    ModelConfig c = tiny_config(Variant::ladder_mtl);
    Rng rng(37);
    ModelParams p = build_model(c, rng);
    Matrix x = gaussian_sample(6, 7, 1.0, rng);
    Matrix targets = gaussian_sample(6, 3, 1.0, rng);
    LadderTrace t = forward_train(p, x, rng);
    BackwardResult res = backward(p, t, targets);
    REQUIRE(res.loss.reconstruction.size() == 3);
    CHECK(res.loss.total == res.loss.recompute_total());
    CHECK(std::abs(res.loss.total - res.loss.recompute_total()) <= 1e-12);
}

TEST_CASE("trace cannot be consumed twice and must match targets") {
    ModelConfig c = tiny_config(Variant::stl);
    Rng rng(41);
    ModelParams p = build_model(c, rng);
    Matrix x = gaussian_sample(4, 7, 1.0, rng);
    Matrix targets = gaussian_sample(4, 1, 1.0, rng);
    LadderTrace t = forward_train(p, x, rng);
    CHECK_THROWS_AS(backward(p, t, Matrix(3, 1)), ShapeError);
    backward(p, t, targets);
    CHECK_THROWS_AS(backward(p, t, targets), StateError);
}

TEST_CASE("full-model gradient checks on tiny instances") {
    SUBCASE("stl") {
        auto rep = variant_grad_check(Variant::stl, 7, {5, 3}, 4, 101);
        INFO(rep.worst);
        CHECK(rep.max_rel_error < 1e-4);
    }
    SUBCASE("ladder_stl") {
        auto rep = variant_grad_check(Variant::ladder_stl, 7, {5, 3}, 4, 102);
        INFO(rep.worst);
        CHECK(rep.max_rel_error < 1e-4);
    }
    SUBCASE("ladder_mtl") {
        auto rep = variant_grad_check(Variant::ladder_mtl, 7, {5, 3}, 4, 103);
        INFO(rep.worst);
        CHECK(rep.max_rel_error < 1e-4);
    }
}

TEST_CASE("parameter sharing: one optimizer step moves both paths together") {
    ModelConfig c = tiny_config(Variant::ladder_stl);
    c.noise_variance = 0.0;
    c.dropout_input = 0.0;
    c.dropout_hidden1 = 0.0;
    Rng rng(53);
    ModelParams p = build_model(c, rng);
    Matrix x = gaussian_sample(6, 7, 1.0, rng);
    Matrix targets = gaussian_sample(6, 1, 1.0, rng);

    LadderTrace t = forward_train(p, x, rng);
    BackwardResult res = backward(p, t, targets);
    for (std::size_t i = 0; i < p.encoder[0].dense.w.size(); ++i) {
        p.encoder[0].dense.w.data()[i] -= 1e-3 * res.grads.encoder[0].dense.w.data()[i];
    }
    // with zero corruption the two paths read the same storage, so they stay equal
    LadderTrace t2 = forward_train(p, x, rng);
    for (std::size_t l = 0; l < 3; ++l) CHECK(exactly_equal(t2.z[l], t2.z_tilde[l]));
}

TEST_CASE("dae pretraining freezes the encoder and beats the identity noise floor") {
    // low-rank synthetic block, standardized columns
    Rng rng(61);
    const std::size_t n = 600, d = 20, r = 4;
    Matrix latents = gaussian_sample(n, r, 1.0, rng);
    Matrix mix = gaussian_sample(r, d, 1.0 / static_cast<double>(r), rng);
    Matrix clean = matmul(latents, mix);
    // column-standardize so the noise floor is sigma^2 per unit
    for (std::size_t c = 0; c < d; ++c) {
        double m = 0, var = 0;
        for (std::size_t row = 0; row < n; ++row) m += clean.at(row, c);
        m /= static_cast<double>(n);
        for (std::size_t row = 0; row < n; ++row) {
            var += (clean.at(row, c) - m) * (clean.at(row, c) - m);
        }
        var /= static_cast<double>(n);
        const double s = std::sqrt(var);
        for (std::size_t row = 0; row < n; ++row) {
            clean.at(row, c) = (clean.at(row, c) - m) / s;
        }
    }
    std::vector<std::size_t> train_idx(500), held_idx(100);
    for (std::size_t i = 0; i < 500; ++i) train_idx[i] = i;
    for (std::size_t i = 0; i < 100; ++i) held_idx[i] = 500 + i;
    Matrix train = take_rows(clean, train_idx);
    Matrix held_out = take_rows(clean, held_idx);

    ModelConfig cfg = ModelConfig::for_variant(Variant::autoencoder, d);
    cfg.hidden_dims = {16, 8};
    cfg.dropout_input = 0.0; // isolate the denoising objective
    cfg.dropout_hidden1 = 0.0;
    DaePretrainConfig pre;
    pre.epochs = 40;
    pre.batch_size = 50;
    pre.learning_rate = 3e-3;
    Rng train_rng(71);
    ModelParams model = dae_pretrain_then_freeze(cfg, train, train_rng, pre);
    CHECK(model.encoder_frozen);

    Rng eval_rng(73);
    const double rec = dae_denoising_mse(model, held_out, eval_rng);
    CHECK(rec < cfg.noise_variance); // identity-on-noisy baseline = 0.3

    // head training must leave encoder and decoder untouched
    Matrix enc_before = model.encoder[0].dense.w;
    Matrix dec_before = model.ae_decoder_out.w;
    Matrix targets = gaussian_sample(500, 1, 1.0, train_rng);
    std::vector<ParamRef> trainable = trainable_parameters(model);
    CHECK(trainable.size() == 2);
    LadderTrace t = forward_train(model, train, train_rng);
    BackwardResult res = backward(model, t, targets);
    std::vector<ParamRef> grefs = trainable_parameters(res.grads);
    for (std::size_t k = 0; k < trainable.size(); ++k) {
        for (std::size_t i = 0; i < trainable[k].tensor->size(); ++i) {
            trainable[k].tensor->data()[i] -= 1e-3 * grefs[k].tensor->data()[i];
        }
    }
    CHECK(exactly_equal(model.encoder[0].dense.w, enc_before));
    CHECK(exactly_equal(model.ae_decoder_out.w, dec_before));
}
