#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "emoladder/checkpoint.hpp"
#include "emoladder/config_io.hpp"
#include "emoladder/errors.hpp"

using namespace emoladder;

namespace {

struct TempDir {
    std::string path;
    TempDir() {
        char tmpl[] = "/tmp/emoladder_ckpt_XXXXXX";
        path = mkdtemp(tmpl);
    }
    std::string file(const std::string& name) const { return path + "/" + name; }
};

} // namespace

TEST_CASE("checkpoint round trip is bitwise lossless") {
    TempDir dir;
    ModelConfig cfg = ModelConfig::for_variant(Variant::ladder_mtl, 9);
    cfg.hidden_dims = {6, 4};
    Rng rng(123);
    ModelParams params = build_model(cfg, rng);
    // give the running stats non-default values
    Matrix x = gaussian_sample(8, 9, 1.0, rng);
    forward_train(params, x, rng);

    std::vector<ParamRef> prefs = all_parameters(params);
    std::vector<const Matrix*> pview;
    for (ParamRef& r : prefs) pview.push_back(r.tensor);
    NadamState opt;
    opt.init(pview);
    opt.t = 17;
    Rng noise(5);
    for (Matrix& m : opt.m) m = gaussian_sample(m.rows(), m.cols(), 1.0, noise);
    for (Matrix& m : opt.v) m = gaussian_sample(m.rows(), m.cols(), 1.0, noise);
    for (Matrix& m : opt.v) {
        for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = std::abs(m.data()[i]);
    }

    save_checkpoint(params, dir.file("model.ckpt"), &opt);
    Checkpoint back = load_checkpoint(dir.file("model.ckpt"));

    CHECK(back.params.config.variant == Variant::ladder_mtl);
    CHECK(back.params.config.hidden_dims == cfg.hidden_dims);
    std::vector<ParamRef> prefs2 = all_parameters(back.params);
    REQUIRE(prefs2.size() == prefs.size());
    for (std::size_t k = 0; k < prefs.size(); ++k) {
        CHECK(prefs2[k].name == prefs[k].name);
        CHECK(exactly_equal(*prefs2[k].tensor, *prefs[k].tensor));
    }
    std::vector<ParamRef> srefs = state_tensors(params);
    std::vector<ParamRef> srefs2 = state_tensors(back.params);
    for (std::size_t k = 0; k < srefs.size(); ++k) {
        CHECK(exactly_equal(*srefs2[k].tensor, *srefs[k].tensor));
    }
    REQUIRE(back.optimizer.has_value());
    CHECK(back.optimizer->t == 17);
    for (std::size_t k = 0; k < opt.m.size(); ++k) {
        CHECK(exactly_equal(back.optimizer->m[k], opt.m[k]));
        CHECK(exactly_equal(back.optimizer->v[k], opt.v[k]));
    }

    SUBCASE("loaded model predicts identically") {
        Matrix probe = gaussian_sample(4, 9, 1.0, noise);
        CHECK(exactly_equal(forward_infer(params, probe), forward_infer(back.params, probe)));
    }
}

TEST_CASE("checkpoint without optimizer state") {
    TempDir dir;
    ModelConfig cfg = ModelConfig::for_variant(Variant::stl, 5);
    cfg.hidden_dims = {4, 3};
    Rng rng(9);
    ModelParams params = build_model(cfg, rng);
    save_checkpoint(params, dir.file("m.ckpt"));
    Checkpoint back = load_checkpoint(dir.file("m.ckpt"));
    CHECK_FALSE(back.optimizer.has_value());
    CHECK(exactly_equal(back.params.head.w, params.head.w));
}

TEST_CASE("frozen-autoencoder checkpoints preserve the frozen flag") {
    TempDir dir;
    ModelConfig cfg = ModelConfig::for_variant(Variant::autoencoder, 6);
    cfg.hidden_dims = {5, 4};
    Rng rng(31);
    ModelParams params = build_model(cfg, rng);
    params.encoder_frozen = true;
    save_checkpoint(params, dir.file("ae.ckpt"));
    Checkpoint back = load_checkpoint(dir.file("ae.ckpt"));
    CHECK(back.params.encoder_frozen);
    CHECK(exactly_equal(back.params.ae_decoder_out.w, params.ae_decoder_out.w));
}

TEST_CASE("corrupt checkpoints are rejected") {
    TempDir dir;
    {
        std::ofstream os(dir.file("junk.ckpt"), std::ios::binary);
        os << "NOT A CHECKPOINT";
    }
    CHECK_THROWS_AS(load_checkpoint(dir.file("junk.ckpt")), ParseError);
    CHECK_THROWS_AS(load_checkpoint(dir.file("missing.ckpt")), ParseError);
}

TEST_CASE("model config JSON round trip") {
    ModelConfig cfg = ModelConfig::for_variant(Variant::ladder_mtl, 50);
    cfg.lambda = 10.0;
    cfg.mtl_weights = MtlWeights{0.4, 0.3};
    ModelConfig back = model_config_from_json(model_config_to_json(cfg));
    CHECK(back.variant == cfg.variant);
    CHECK(back.lambda == cfg.lambda);
    CHECK(back.mtl_weights.alpha == cfg.mtl_weights.alpha);
    CHECK(back.output_attrs == cfg.output_attrs);

    CHECK_THROWS_AS(model_config_from_json("{not json"), ParseError);
}
