#include "emoladder/model.hpp"

#include <cmath>

#include "emoladder/errors.hpp"

namespace emoladder {

namespace {
constexpr double kDecoderNormEpsilon = 1e-5;
} // namespace

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::autoencoder: return "autoencoder";
        case Variant::stl: return "stl";
        case Variant::mtl: return "mtl";
        case Variant::ladder_stl: return "ladder_stl";
        case Variant::ladder_mtl: return "ladder_mtl";
    }
    return "?";
}

Variant variant_from_name(const std::string& name) {
    if (name == "autoencoder" || name == "ae") return Variant::autoencoder;
    if (name == "stl") return Variant::stl;
    if (name == "mtl") return Variant::mtl;
    if (name == "ladder_stl" || name == "ladder+stl") return Variant::ladder_stl;
    if (name == "ladder_mtl" || name == "ladder+mtl") return Variant::ladder_mtl;
    throw ConfigError("unknown variant: " + name);
}

std::string attr_name(Attr a) {
    switch (a) {
        case Attr::arousal: return "arousal";
        case Attr::valence: return "valence";
        case Attr::dominance: return "dominance";
    }
    return "?";
}

Attr attr_from_name(const std::string& name) {
    if (name == "arousal" || name == "aro") return Attr::arousal;
    if (name == "valence" || name == "val") return Attr::valence;
    if (name == "dominance" || name == "dom") return Attr::dominance;
    throw ConfigError("unknown attribute: " + name);
}

ModelConfig ModelConfig::for_variant(Variant v, std::size_t input_dim, Attr target) {
    ModelConfig c;
    c.variant = v;
    c.input_dim = input_dim;
    if (c.is_mtl()) {
        c.output_attrs = {Attr::arousal, Attr::valence, Attr::dominance};
    } else {
        c.output_attrs = {target};
    }
    const double p = c.is_ladder() ? 0.1 : 0.5;
    c.dropout_input = p;
    c.dropout_hidden1 = p;
    return c;
}

void ModelConfig::validate() const {
    if (input_dim == 0) throw ConfigError("config: input_dim must be > 0");
    if (hidden_dims.empty()) throw ConfigError("config: hidden_dims must be non-empty");
    for (std::size_t h : hidden_dims) {
        if (h == 0) throw ConfigError("config: hidden width must be > 0");
    }
    if (!(noise_variance >= 0.0)) throw ConfigError("config: noise_variance must be >= 0");
    if (!(lambda >= 0.0)) throw ConfigError("config: lambda must be >= 0");
    if (!(dropout_input >= 0.0 && dropout_input < 1.0) ||
        !(dropout_hidden1 >= 0.0 && dropout_hidden1 < 1.0)) {
        throw ConfigError("config: dropout rates must be in [0, 1)");
    }
    if (output_attrs.empty()) throw ConfigError("config: output_attrs must be non-empty");
    for (std::size_t i = 0; i < output_attrs.size(); ++i) {
        for (std::size_t j = i + 1; j < output_attrs.size(); ++j) {
            if (output_attrs[i] == output_attrs[j]) {
                throw ConfigError("config: duplicate output attribute");
            }
        }
    }
    const bool single_task = variant == Variant::stl || variant == Variant::ladder_stl;
    if (single_task && output_attrs.size() != 1) {
        throw ConfigError("config: STL variants predict exactly one attribute");
    }
    if (is_mtl()) {
        const std::vector<Attr> canon{Attr::arousal, Attr::valence, Attr::dominance};
        if (output_attrs != canon) {
            throw ConfigError(
                "config: MTL variants predict arousal, valence, dominance in that order");
        }
        mtl_weights.validate();
    }
}

// ---------------------------------------------------------------------------
// Combinator g()
// ---------------------------------------------------------------------------

namespace {

inline double leaky(double x) { return x > 0.0 ? x : kCombinatorLeakSlope * x; }
inline double leaky_grad(double x) { return x > 0.0 ? 1.0 : kCombinatorLeakSlope; }

void take(bool& consumed, const char* what) {
    if (consumed) throw StateError(std::string(what) + ": cache already consumed");
    consumed = true;
}

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

Matrix combinator_forward(const Matrix& u, const Matrix& z_tilde, const CombinatorParams& p,
                          CombinatorCache* cache) {
    if (!u.same_shape(z_tilde)) {
        throw ShapeError("combinator: u " + u.shape_str() + " vs z_tilde " + z_tilde.shape_str());
    }
    const std::size_t batch = u.rows(), n = u.cols();
    if (p.w_u.rows() != n || p.w_u.cols() != 4) {
        throw ShapeError("combinator: params sized " + p.w_u.shape_str() + " for width " +
                         std::to_string(n));
    }
    Matrix out(batch, n);
    std::array<Matrix, 4> h;
    for (std::size_t j = 0; j < 4; ++j) h[j] = Matrix(batch, n);
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t i = 0; i < n; ++i) {
            const double ui = u.at(b, i);
            const double ti = z_tilde.at(b, i);
            const double mi = ui * ti;
            double acc = p.b_out.at(i, 0);
            for (std::size_t j = 0; j < 4; ++j) {
                const double pre = ui * p.w_u.at(i, j) + ti * p.w_z.at(i, j) +
                                   mi * p.w_uz.at(i, j) + p.b_h.at(i, j);
                h[j].at(b, i) = pre;
                acc += leaky(pre) * p.w_out.at(i, j);
            }
            out.at(b, i) = acc;
        }
    }
    if (cache) {
        cache->u = u;
        cache->zt = z_tilde;
        cache->h = std::move(h);
        cache->consumed = false;
    }
    return out;
}

void combinator_backward(const Matrix& grad_zhat, const CombinatorParams& p,
                         CombinatorCache& cache, CombinatorParams& grads, Matrix& grad_u,
                         Matrix& grad_zt) {
    take(cache.consumed, "combinator_backward");
    const std::size_t batch = cache.u.rows(), n = cache.u.cols();
    if (!grad_zhat.same_shape(cache.u)) {
        throw ShapeError("combinator_backward: grad " + grad_zhat.shape_str());
    }
    Matrix dw_u(n, 4), dw_z(n, 4), dw_uz(n, 4), db_h(n, 4), dw_out(n, 4), db_out(n, 1);
    Matrix du(batch, n), dt(batch, n);
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t i = 0; i < n; ++i) {
            const double go = grad_zhat.at(b, i);
            const double ui = cache.u.at(b, i);
            const double ti = cache.zt.at(b, i);
            const double mi = ui * ti;
            db_out.at(i, 0) += go;
            double dui = 0.0, dti = 0.0;
            for (std::size_t j = 0; j < 4; ++j) {
                const double pre = cache.h[j].at(b, i);
                dw_out.at(i, j) += go * leaky(pre);
                const double dpre = go * p.w_out.at(i, j) * leaky_grad(pre);
                db_h.at(i, j) += dpre;
                dw_u.at(i, j) += dpre * ui;
                dw_z.at(i, j) += dpre * ti;
                dw_uz.at(i, j) += dpre * mi;
                dui += dpre * (p.w_u.at(i, j) + p.w_uz.at(i, j) * ti);
                dti += dpre * (p.w_z.at(i, j) + p.w_uz.at(i, j) * ui);
            }
            du.at(b, i) = dui;
            dt.at(b, i) = dti;
        }
    }
    accumulate_into(grads.w_u, dw_u);
    accumulate_into(grads.w_z, dw_z);
    accumulate_into(grads.w_uz, dw_uz);
    accumulate_into(grads.b_h, db_h);
    accumulate_into(grads.w_out, dw_out);
    accumulate_into(grads.b_out, db_out);
    accumulate_into(grad_u, du);
    accumulate_into(grad_zt, dt);
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

namespace {

Matrix uniform_matrix(std::size_t rows, std::size_t cols, double limit, Rng& rng) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = (2.0 * rng.uniform() - 1.0) * limit;
    return m;
}

CombinatorParams init_combinator(std::size_t units, Rng& rng) {
    const double in_limit = std::sqrt(6.0 / 7.0);  // per-unit fan 3 -> 4
    const double out_limit = std::sqrt(6.0 / 5.0); // per-unit fan 4 -> 1
    CombinatorParams p;
    p.w_u = uniform_matrix(units, 4, in_limit, rng);
    p.w_z = uniform_matrix(units, 4, in_limit, rng);
    p.w_uz = uniform_matrix(units, 4, in_limit, rng);
    p.b_h = Matrix(units, 4);
    p.w_out = uniform_matrix(units, 4, out_limit, rng);
    p.b_out = Matrix(units, 1);
    return p;
}

std::size_t level_width(const ModelConfig& c, std::size_t level) {
    return level == 0 ? c.input_dim : c.hidden_dims[level - 1];
}

} // namespace

ModelParams build_model(const ModelConfig& config, Rng& rng) {
    config.validate();
    ModelParams p;
    p.config = config;
    const std::size_t levels = config.n_levels();
    for (std::size_t l = 1; l < levels; ++l) {
        EncoderLayerParams layer;
        layer.dense = init_dense_he(level_width(config, l - 1), level_width(config, l), rng);
        layer.bn = init_batchnorm(level_width(config, l));
        p.encoder.push_back(std::move(layer));
    }
    p.head = init_dense_xavier(config.hidden_dims.back(), config.n_attrs(), rng);

    if (config.is_ladder()) {
        p.decoder.resize(levels);
        for (std::size_t l = 0; l < levels; ++l) {
            const std::size_t width = level_width(config, l);
            if (l + 1 < levels) {
                const std::size_t above = level_width(config, l + 1);
                const double limit = std::sqrt(6.0 / static_cast<double>(above + width));
                p.decoder[l].vert_w = uniform_matrix(above, width, limit, rng);
            }
            p.decoder[l].comb = init_combinator(width, rng);
        }
    }

    if (config.variant == Variant::autoencoder) {
        // mirror stages: hidden_L -> hidden_{L-1} -> ... -> hidden_1 -> input
        for (std::size_t k = config.hidden_dims.size(); k-- > 1;) {
            EncoderLayerParams stage;
            stage.dense = init_dense_he(config.hidden_dims[k], config.hidden_dims[k - 1], rng);
            stage.bn = init_batchnorm(config.hidden_dims[k - 1]);
            p.ae_decoder_hidden.push_back(std::move(stage));
        }
        p.ae_decoder_out = init_dense_xavier(config.hidden_dims.front(), config.input_dim, rng);
    }
    return p;
}

namespace {

template <typename Params, typename Ref>
void collect_params(Params& p, std::vector<Ref>& out) {
    for (std::size_t l = 0; l < p.encoder.size(); ++l) {
        const std::string k = "encoder" + std::to_string(l + 1);
        out.push_back({k + ".w", &p.encoder[l].dense.w});
        out.push_back({k + ".b", &p.encoder[l].dense.b});
        out.push_back({k + ".gamma", &p.encoder[l].bn.gamma});
        out.push_back({k + ".beta", &p.encoder[l].bn.beta});
    }
    out.push_back({"head.w", &p.head.w});
    out.push_back({"head.b", &p.head.b});
    for (std::size_t l = 0; l < p.decoder.size(); ++l) {
        const std::string k = "decoder" + std::to_string(l);
        if (!p.decoder[l].vert_w.empty()) {
            out.push_back({k + ".vert_w", &p.decoder[l].vert_w});
        }
        out.push_back({k + ".comb.w_u", &p.decoder[l].comb.w_u});
        out.push_back({k + ".comb.w_z", &p.decoder[l].comb.w_z});
        out.push_back({k + ".comb.w_uz", &p.decoder[l].comb.w_uz});
        out.push_back({k + ".comb.b_h", &p.decoder[l].comb.b_h});
        out.push_back({k + ".comb.w_out", &p.decoder[l].comb.w_out});
        out.push_back({k + ".comb.b_out", &p.decoder[l].comb.b_out});
    }
    for (std::size_t k = 0; k < p.ae_decoder_hidden.size(); ++k) {
        const std::string key = "ae_decoder" + std::to_string(k);
        out.push_back({key + ".w", &p.ae_decoder_hidden[k].dense.w});
        out.push_back({key + ".b", &p.ae_decoder_hidden[k].dense.b});
        out.push_back({key + ".gamma", &p.ae_decoder_hidden[k].bn.gamma});
        out.push_back({key + ".beta", &p.ae_decoder_hidden[k].bn.beta});
    }
    if (!p.ae_decoder_out.w.empty()) {
        out.push_back({"ae_decoder_out.w", &p.ae_decoder_out.w});
        out.push_back({"ae_decoder_out.b", &p.ae_decoder_out.b});
    }
}

} // namespace

std::vector<ParamRef> all_parameters(ModelParams& p) {
    std::vector<ParamRef> out;
    collect_params(p, out);
    return out;
}

std::vector<ParamRef> trainable_parameters(ModelParams& p) {
    if (!p.encoder_frozen) return all_parameters(p);
    std::vector<ParamRef> out;
    out.push_back({"head.w", &p.head.w});
    out.push_back({"head.b", &p.head.b});
    return out;
}

std::vector<ParamRef> state_tensors(ModelParams& p) {
    std::vector<ParamRef> out;
    for (std::size_t l = 0; l < p.encoder.size(); ++l) {
        const std::string k = "encoder" + std::to_string(l + 1);
        out.push_back({k + ".running_mean", &p.encoder[l].bn.running_mean});
        out.push_back({k + ".running_var", &p.encoder[l].bn.running_var});
    }
    for (std::size_t k = 0; k < p.ae_decoder_hidden.size(); ++k) {
        const std::string key = "ae_decoder" + std::to_string(k);
        out.push_back({key + ".running_mean", &p.ae_decoder_hidden[k].bn.running_mean});
        out.push_back({key + ".running_var", &p.ae_decoder_hidden[k].bn.running_var});
    }
    return out;
}

ModelParams make_grads_like(const ModelParams& p) {
    ModelParams g = p;
    for (ParamRef& r : all_parameters(g)) {
        *r.tensor = Matrix(r.tensor->rows(), r.tensor->cols());
    }
    for (ParamRef& r : state_tensors(g)) {
        *r.tensor = Matrix(r.tensor->rows(), r.tensor->cols());
    }
    return g;
}

// ---------------------------------------------------------------------------
// Forward passes
// ---------------------------------------------------------------------------

namespace {

// Infer-mode encoder trunk: returns the top post-batch-norm representation.
Matrix encode_infer(const ModelParams& p, const Matrix& x) {
    const std::size_t layers = p.encoder.size();
    Matrix a = x;
    for (std::size_t l = 1; l <= layers; ++l) {
        const EncoderLayerParams& layer = p.encoder[l - 1];
        Matrix z = batchnorm_infer(dense_forward(a, layer.dense), layer.bn);
        a = (l < layers) ? relu_forward(z) : z;
    }
    return a;
}

struct ForwardOptions {
    bool enable_dropout = true;
    bool update_running = true;
};

LadderTrace forward_train_impl(ModelParams& params, const Matrix& x, Rng& rng,
                               const ForwardOptions& opt) {
    const ModelConfig& cfg = params.config;
    if (x.cols() != cfg.input_dim) {
        throw ShapeError("forward_train: input " + x.shape_str() + ", expected width " +
                         std::to_string(cfg.input_dim));
    }
    x.require_finite("forward_train input");

    LadderTrace t;
    t.batch = x.rows();
    t.input = x;

    if (cfg.variant == Variant::autoencoder && params.encoder_frozen) {
        // frozen encoder, trainable head only
        Matrix feat = encode_infer(params, x);
        t.predictions = dense_forward(feat, params.head, &t.head_cache);
        t.predictions.require_finite("supervised head");
        return t;
    }
    if (cfg.variant == Variant::autoencoder) {
        throw StateError("forward_train: autoencoder variant must be pretrained and frozen "
                         "before supervised training");
    }

    const std::size_t layers = cfg.hidden_dims.size();
    const std::size_t levels = cfg.n_levels();
    const bool ladder = cfg.is_ladder();
    const double sigma2 = ladder ? cfg.noise_variance : 0.0;

    t.z_tilde.resize(levels);
    t.dense_noisy.resize(layers);
    t.bn_noisy.resize(layers);
    t.relu_noisy.resize(layers > 0 ? layers - 1 : 0);
    t.dropout_active = opt.enable_dropout;

    // Training path: dropout + (ladder only) additive Gaussian corruption at
    // the input and after every batch normalization. For the baselines this
    // is the only encoder pass, so it also maintains the running statistics.
    const bool noisy_updates_running = !ladder && opt.update_running;
    {
        Matrix xin = opt.enable_dropout
                         ? dropout_forward(x, cfg.dropout_input, rng, Mode::train, &t.drop_input)
                         : x;
        t.z_tilde[0] =
            ladder ? add(xin, gaussian_sample(t.batch, cfg.input_dim, sigma2, rng)) : xin;
        Matrix a = t.z_tilde[0];
        for (std::size_t l = 1; l <= layers; ++l) {
            EncoderLayerParams& layer = params.encoder[l - 1];
            Matrix pre = dense_forward(a, layer.dense, &t.dense_noisy[l - 1]);
            Matrix bn_out = batchnorm_forward(pre, layer.bn, Mode::train, &t.bn_noisy[l - 1],
                                              noisy_updates_running);
            t.z_tilde[l] = ladder
                               ? add(bn_out, gaussian_sample(t.batch, bn_out.cols(), sigma2, rng))
                               : std::move(bn_out);
            t.z_tilde[l].require_finite("training encoder layer " + std::to_string(l));
            if (l < layers) {
                Matrix act = relu_forward(t.z_tilde[l], &t.relu_noisy[l - 1]);
                if (l == 1 && opt.enable_dropout) {
                    act = dropout_forward(act, cfg.dropout_hidden1, rng, Mode::train,
                                          &t.drop_hidden1);
                }
                a = std::move(act);
            }
        }
        t.predictions = dense_forward(t.z_tilde[layers], params.head, &t.head_cache);
        t.predictions.require_finite("supervised head");
    }

    if (!ladder) return t;

    // Clean path: reconstruction targets and the running statistics.
    t.has_clean = true;
    t.z.resize(levels);
    t.dense_clean.resize(layers);
    t.bn_clean.resize(layers);
    t.relu_clean.resize(layers > 0 ? layers - 1 : 0);
    {
        t.z[0] = x;
        Matrix a = x;
        for (std::size_t l = 1; l <= layers; ++l) {
            EncoderLayerParams& layer = params.encoder[l - 1];
            Matrix pre = dense_forward(a, layer.dense, &t.dense_clean[l - 1]);
            t.z[l] = batchnorm_forward(pre, layer.bn, Mode::train, &t.bn_clean[l - 1],
                                       opt.update_running);
            t.z[l].require_finite("clean encoder layer " + std::to_string(l));
            if (l < layers) a = relu_forward(t.z[l], &t.relu_clean[l - 1]);
        }
    }

    // Decoder: top-down denoising with lateral connections.
    t.has_decoder = true;
    t.z_hat.resize(levels);
    t.u.resize(levels);
    t.colnorm_cache.resize(levels);
    t.comb_cache.resize(levels);
    {
        const std::size_t top = levels - 1;
        t.u[top] = colnorm_forward(t.z_tilde[top], kDecoderNormEpsilon, &t.colnorm_cache[top]);
        t.z_hat[top] =
            combinator_forward(t.u[top], t.z_tilde[top], params.decoder[top].comb,
                               &t.comb_cache[top]);
        t.z_hat[top].require_finite("decoder level " + std::to_string(top));
        for (std::size_t l = top; l-- > 0;) {
            Matrix pre_u = matmul(t.z_hat[l + 1], params.decoder[l].vert_w);
            t.u[l] = colnorm_forward(pre_u, kDecoderNormEpsilon, &t.colnorm_cache[l]);
            t.z_hat[l] = combinator_forward(t.u[l], t.z_tilde[l], params.decoder[l].comb,
                                            &t.comb_cache[l]);
            t.z_hat[l].require_finite("decoder level " + std::to_string(l));
        }
    }
    return t;
}

} // namespace

LadderTrace forward_train(ModelParams& params, const Matrix& x, Rng& rng) {
    return forward_train_impl(params, x, rng, ForwardOptions{});
}

Matrix forward_infer(const ModelParams& params, const Matrix& x) {
    if (x.cols() != params.config.input_dim) {
        throw ShapeError("forward_infer: input " + x.shape_str() + ", expected width " +
                         std::to_string(params.config.input_dim));
    }
    x.require_finite("forward_infer input");
    Matrix feat = encode_infer(params, x);
    Matrix pred = dense_forward(feat, params.head);
    pred.require_finite("forward_infer predictions");
    return pred;
}

void freeze_batchnorm_to_batch(ModelParams& params, const Matrix& x) {
    const std::size_t layers = params.encoder.size();
    Matrix a = x;
    for (std::size_t l = 1; l <= layers; ++l) {
        EncoderLayerParams& layer = params.encoder[l - 1];
        Matrix pre = dense_forward(a, layer.dense);
        const double saved = layer.bn.momentum;
        layer.bn.momentum = 0.0; // running <- exactly this batch
        Matrix z = batchnorm_forward(pre, layer.bn, Mode::train, nullptr, true);
        layer.bn.momentum = saved;
        a = (l < layers) ? relu_forward(z) : z;
    }
}

double ladder_denoising_mse(ModelParams& params, const Matrix& x, Rng& rng) {
    if (!params.config.is_ladder()) {
        throw ConfigError("ladder_denoising_mse: needs a ladder variant");
    }
    ForwardOptions opt;
    opt.enable_dropout = false;
    opt.update_running = false;
    LadderTrace t = forward_train_impl(params, x, rng, opt);
    return mse(t.z_hat[0], t.z[0]);
}

} // namespace emoladder
