#include <cmath>

#include "emoladder/errors.hpp"
#include "emoladder/model.hpp"
#include "emoladder/optim.hpp"

namespace emoladder {

namespace {

void accumulate_into(Matrix& into, const Matrix& delta) {
    if (into.empty()) {
        into = delta;
        return;
    }
    if (!into.same_shape(delta)) {
        throw ShapeError("accumulate: " + into.shape_str() + " vs " + delta.shape_str());
    }
    for (std::size_t i = 0; i < into.size(); ++i) into.data()[i] += delta.data()[i];
}

} // namespace

BackwardResult backward(const ModelParams& params, LadderTrace& trace, const Matrix& targets) {
    const ModelConfig& cfg = params.config;
    if (trace.consumed) {
        throw StateError("backward: trace already consumed");
    }
    const std::size_t n_attrs = cfg.n_attrs();
    if (trace.predictions.rows() != trace.batch || trace.predictions.cols() != n_attrs) {
        throw StateError("backward: trace does not match model config");
    }
    if (targets.rows() != trace.batch || targets.cols() != n_attrs) {
        throw ShapeError("backward: targets " + targets.shape_str() + ", expected " +
                         std::to_string(trace.batch) + "x" + std::to_string(n_attrs));
    }
    trace.consumed = true;

    BackwardResult res;
    res.grads = make_grads_like(params);
    ModelParams& g = res.grads;

    // Supervised cost: 1 - CCC per attribute on this mini-batch, combined
    // with the multi-task weights where applicable.
    std::vector<double> attr_cost(n_attrs);
    std::vector<double> weights(n_attrs, n_attrs > 1 ? 1.0 / static_cast<double>(n_attrs) : 1.0);
    if (cfg.is_mtl()) {
        weights = {cfg.mtl_weights.alpha, cfg.mtl_weights.beta, cfg.mtl_weights.dominance()};
    }
    Matrix dpred(trace.batch, n_attrs);
    for (std::size_t a = 0; a < n_attrs; ++a) {
        std::vector<double> grad_col;
        attr_cost[a] =
            ccc_loss_and_grad(column(trace.predictions, a), column(targets, a), grad_col);
        for (std::size_t b = 0; b < trace.batch; ++b) {
            dpred.at(b, a) = weights[a] * grad_col[b];
        }
    }
    if (cfg.is_mtl()) {
        res.loss.supervised = mtl_loss(attr_cost[0], attr_cost[1], attr_cost[2], cfg.mtl_weights);
    } else {
        res.loss.supervised = 0.0;
        for (std::size_t a = 0; a < n_attrs; ++a) res.loss.supervised += weights[a] * attr_cost[a];
    }

    if (cfg.variant == Variant::autoencoder) {
        // frozen encoder: the head is the whole differentiable path
        res.loss.total = res.loss.supervised;
        dense_backward(dpred, params.head, trace.head_cache, g.head.w, g.head.b);
        return res;
    }

    const std::size_t layers = cfg.hidden_dims.size();
    const std::size_t levels = cfg.n_levels();
    const bool ladder = cfg.is_ladder();

    std::vector<Matrix> dzt(levels);
    for (std::size_t l = 0; l < levels; ++l) {
        dzt[l] = Matrix(trace.batch, trace.z_tilde[l].cols());
    }

    std::vector<Matrix> dz;
    if (ladder) {
        if (!trace.has_decoder || !trace.has_clean) {
            throw StateError("backward: ladder trace is missing decoder or clean path");
        }
        res.loss.reconstruction.resize(levels);
        res.loss.lambda.assign(levels, cfg.lambda);
        dz.resize(levels);

        std::vector<Matrix> dzhat(levels);
        for (std::size_t l = 0; l < levels; ++l) {
            res.loss.reconstruction[l] = mse(trace.z_hat[l], trace.z[l]);
            const double coef =
                cfg.lambda * 2.0 / static_cast<double>(trace.z_hat[l].size());
            dzhat[l] = scale(sub(trace.z_hat[l], trace.z[l]), coef);
            dz[l] = scale(sub(trace.z[l], trace.z_hat[l]), coef);
        }
        res.loss.total = ladder_total(res.loss.supervised, res.loss.reconstruction,
                                      res.loss.lambda);

        // Decoder, bottom level first: each level's top-down projection feeds
        // gradient into the reconstruction one level up.
        const std::size_t top = levels - 1;
        for (std::size_t l = 0; l < levels; ++l) {
            Matrix grad_u(trace.batch, trace.u[l].cols());
            combinator_backward(dzhat[l], params.decoder[l].comb, trace.comb_cache[l],
                                g.decoder[l].comb, grad_u, dzt[l]);
            Matrix du = colnorm_backward(grad_u, trace.colnorm_cache[l]);
            if (l < top) {
                accumulate_into(g.decoder[l].vert_w,
                                matmul(transpose(trace.z_hat[l + 1]), du));
                accumulate_into(dzhat[l + 1], matmul(du, transpose(params.decoder[l].vert_w)));
            } else {
                accumulate_into(dzt[top], du);
            }
        }
    } else {
        res.loss.total = res.loss.supervised;
    }

    // Training-path encoder, head first.
    accumulate_into(dzt[layers],
                    dense_backward(dpred, params.head, trace.head_cache, g.head.w, g.head.b));
    for (std::size_t l = layers; l >= 1; --l) {
        EncoderLayerParams& gl = g.encoder[l - 1];
        Matrix dpre = batchnorm_backward(dzt[l], params.encoder[l - 1].bn, trace.bn_noisy[l - 1],
                                         gl.bn.gamma, gl.bn.beta);
        Matrix da = dense_backward(dpre, params.encoder[l - 1].dense, trace.dense_noisy[l - 1],
                                   gl.dense.w, gl.dense.b);
        if (l > 1) {
            if (l - 1 == 1 && trace.dropout_active) {
                da = dropout_backward(da, trace.drop_hidden1);
            }
            accumulate_into(dzt[l - 1], relu_backward(da, trace.relu_noisy[l - 2]));
        } else {
            accumulate_into(dzt[0], da);
        }
    }
    if (trace.dropout_active) {
        dropout_backward(dzt[0], trace.drop_input); // input gradient, discarded
    }

    // Clean encoder: reconstruction targets are part of the graph.
    if (ladder) {
        for (std::size_t l = layers; l >= 1; --l) {
            EncoderLayerParams& gl = g.encoder[l - 1];
            Matrix dpre = batchnorm_backward(dz[l], params.encoder[l - 1].bn,
                                             trace.bn_clean[l - 1], gl.bn.gamma, gl.bn.beta);
            Matrix da = dense_backward(dpre, params.encoder[l - 1].dense,
                                       trace.dense_clean[l - 1], gl.dense.w, gl.dense.b);
            if (l > 1) {
                accumulate_into(dz[l - 1], relu_backward(da, trace.relu_clean[l - 2]));
            }
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Denoising-autoencoder baseline
// ---------------------------------------------------------------------------

namespace {

struct DaeOptions {
    bool enable_dropout = true;
    bool update_running = true;
};

DaeTrace dae_forward_impl(ModelParams& params, const Matrix& x, Rng& rng,
                          const DaeOptions& opt) {
    const ModelConfig& cfg = params.config;
    if (cfg.variant != Variant::autoencoder) {
        throw ConfigError("dae_forward: needs the autoencoder variant");
    }
    if (x.cols() != cfg.input_dim) {
        throw ShapeError("dae_forward: input " + x.shape_str());
    }
    x.require_finite("dae_forward input");

    DaeTrace t;
    t.input = x;
    t.dropout_active = opt.enable_dropout;
    const std::size_t layers = cfg.hidden_dims.size();
    t.enc_dense.resize(layers);
    t.enc_bn.resize(layers);
    t.enc_relu.resize(layers > 0 ? layers - 1 : 0);

    Matrix xin = opt.enable_dropout
                     ? dropout_forward(x, cfg.dropout_input, rng, Mode::train, &t.drop_input)
                     : x;
    Matrix a = add(xin, gaussian_sample(x.rows(), cfg.input_dim, cfg.noise_variance, rng));
    for (std::size_t l = 1; l <= layers; ++l) {
        EncoderLayerParams& layer = params.encoder[l - 1];
        Matrix pre = dense_forward(a, layer.dense, &t.enc_dense[l - 1]);
        Matrix z = batchnorm_forward(pre, layer.bn, Mode::train, &t.enc_bn[l - 1],
                                     opt.update_running);
        z.require_finite("autoencoder layer " + std::to_string(l));
        if (l < layers) {
            Matrix act = relu_forward(z, &t.enc_relu[l - 1]);
            if (l == 1 && opt.enable_dropout) {
                act = dropout_forward(act, cfg.dropout_hidden1, rng, Mode::train,
                                      &t.drop_hidden1);
            }
            a = std::move(act);
        } else {
            a = std::move(z);
        }
    }

    const std::size_t stages = params.ae_decoder_hidden.size();
    t.dec_dense.resize(stages);
    t.dec_bn.resize(stages);
    t.dec_relu.resize(stages);
    for (std::size_t k = 0; k < stages; ++k) {
        EncoderLayerParams& stage = params.ae_decoder_hidden[k];
        Matrix pre = dense_forward(a, stage.dense, &t.dec_dense[k]);
        Matrix z = batchnorm_forward(pre, stage.bn, Mode::train, &t.dec_bn[k],
                                     opt.update_running);
        a = relu_forward(z, &t.dec_relu[k]);
    }
    t.reconstruction = dense_forward(a, params.ae_decoder_out, &t.dec_out_cache);
    t.reconstruction.require_finite("autoencoder reconstruction");
    t.reconstruction_mse = mse(t.reconstruction, x);
    return t;
}

} // namespace

DaeTrace dae_forward_train(ModelParams& params, const Matrix& x, Rng& rng) {
    if (params.encoder_frozen) {
        throw StateError("dae_forward_train: encoder already frozen");
    }
    return dae_forward_impl(params, x, rng, DaeOptions{});
}

ModelParams dae_backward(const ModelParams& params, DaeTrace& trace) {
    if (trace.consumed) {
        throw StateError("dae_backward: trace already consumed");
    }
    trace.consumed = true;
    ModelParams g = make_grads_like(params);

    Matrix d = scale(sub(trace.reconstruction, trace.input),
                     2.0 / static_cast<double>(trace.reconstruction.size()));
    d = dense_backward(d, params.ae_decoder_out, trace.dec_out_cache, g.ae_decoder_out.w,
                       g.ae_decoder_out.b);
    for (std::size_t k = params.ae_decoder_hidden.size(); k-- > 0;) {
        EncoderLayerParams& gs = g.ae_decoder_hidden[k];
        d = relu_backward(d, trace.dec_relu[k]);
        d = batchnorm_backward(d, params.ae_decoder_hidden[k].bn, trace.dec_bn[k], gs.bn.gamma,
                               gs.bn.beta);
        d = dense_backward(d, params.ae_decoder_hidden[k].dense, trace.dec_dense[k], gs.dense.w,
                           gs.dense.b);
    }
    const std::size_t layers = params.config.hidden_dims.size();
    for (std::size_t l = layers; l >= 1; --l) {
        EncoderLayerParams& gl = g.encoder[l - 1];
        d = batchnorm_backward(d, params.encoder[l - 1].bn, trace.enc_bn[l - 1], gl.bn.gamma,
                               gl.bn.beta);
        d = dense_backward(d, params.encoder[l - 1].dense, trace.enc_dense[l - 1], gl.dense.w,
                           gl.dense.b);
        if (l > 1) {
            if (l - 1 == 1 && trace.dropout_active) {
                d = dropout_backward(d, trace.drop_hidden1);
            }
            d = relu_backward(d, trace.enc_relu[l - 2]);
        }
    }
    return g;
}

double dae_denoising_mse(ModelParams& params, const Matrix& x, Rng& rng) {
    DaeOptions opt;
    opt.enable_dropout = false;
    opt.update_running = false;
    return dae_forward_impl(params, x, rng, opt).reconstruction_mse;
}

ModelParams dae_pretrain_then_freeze(const ModelConfig& config, const Matrix& train_features,
                                     Rng& rng, const DaePretrainConfig& pretrain) {
    if (config.variant != Variant::autoencoder) {
        throw ConfigError("dae_pretrain_then_freeze: needs the autoencoder variant");
    }
    ModelParams params = build_model(config, rng);

    std::vector<ParamRef> prefs = all_parameters(params);
    std::vector<const Matrix*> pview;
    std::vector<Matrix*> pmut;
    for (ParamRef& r : prefs) {
        pview.push_back(r.tensor);
        pmut.push_back(r.tensor);
    }
    NadamState opt;
    opt.config.learning_rate = pretrain.learning_rate;
    opt.init(pview);

    const std::size_t n = train_features.rows();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < pretrain.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += pretrain.batch_size) {
            const std::size_t end = std::min(n, start + pretrain.batch_size);
            if (end - start < 2) continue; // batch norm floor
            std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(end));
            Matrix bx = take_rows(train_features, idx);
            DaeTrace trace = dae_forward_train(params, bx, rng);
            ModelParams grads = dae_backward(params, trace);
            std::vector<ParamRef> grefs = all_parameters(grads);
            std::vector<const Matrix*> gview;
            for (ParamRef& r : grefs) gview.push_back(r.tensor);
            nadam_step(pmut, gview, opt);
        }
    }
    params.encoder_frozen = true;
    return params;
}

} // namespace emoladder
