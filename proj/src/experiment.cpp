#include <algorithm>
#include <cmath>

#include "emoladder/errors.hpp"
#include "emoladder/experiment.hpp"
#include "emoladder/losses.hpp"

namespace emoladder {

void RunConfig::validate() const {
    model.validate();
    if (max_epochs < 1) throw ConfigError("run config: max_epochs must be >= 1");
    if (batch_size < 2) throw ConfigError("run config: batch_size must be >= 2");
    if (seeds.empty()) throw ConfigError("run config: seeds must be non-empty");
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        for (std::size_t j = i + 1; j < seeds.size(); ++j) {
            if (seeds[i] == seeds[j]) throw ConfigError("run config: duplicate seed");
        }
    }
    primary_index(); // throws if the monitor attribute is not predicted
}

std::size_t RunConfig::primary_index() const {
    for (std::size_t i = 0; i < model.output_attrs.size(); ++i) {
        if (model.output_attrs[i] == primary_attr) return i;
    }
    throw ConfigError("run config: primary_attr " + attr_name(primary_attr) +
                      " is not among the model's output attributes");
}

namespace {

// Selects the configured attribute columns out of the 3-wide target matrix.
Matrix select_targets(const ModelConfig& cfg, const Matrix& targets3) {
    Matrix out(targets3.rows(), cfg.n_attrs());
    for (std::size_t a = 0; a < cfg.n_attrs(); ++a) {
        const std::size_t src = static_cast<std::size_t>(cfg.output_attrs[a]);
        for (std::size_t r = 0; r < targets3.rows(); ++r) {
            out.at(r, a) = targets3.at(r, src);
        }
    }
    return out;
}

} // namespace

std::vector<double> evaluate_ccc(const ModelParams& params, const DatasetSplit& split) {
    const Matrix pred = forward_infer(params, split.features);
    std::vector<double> out(params.config.n_attrs());
    for (std::size_t a = 0; a < out.size(); ++a) {
        const std::size_t src = static_cast<std::size_t>(params.config.output_attrs[a]);
        out[a] = ccc(column(pred, a), column(split.targets, src));
    }
    return out;
}

SeedResult train_one(const RunConfig& config, std::uint64_t seed, const Splits& splits) {
    config.validate();
    SeedResult result;
    result.seed = seed;
    const std::size_t monitor = config.primary_index();

    try {
        Rng rng(seed);
        ModelParams params =
            config.model.variant == Variant::autoencoder
                ? dae_pretrain_then_freeze(config.model, splits.train.features, rng,
                                           config.dae_pretrain)
                : build_model(config.model, rng);

        std::vector<ParamRef> prefs = trainable_parameters(params);
        std::vector<Matrix*> pmut;
        std::vector<const Matrix*> pview;
        for (ParamRef& r : prefs) {
            pmut.push_back(r.tensor);
            pview.push_back(r.tensor);
        }
        NadamState opt;
        opt.config = config.optimizer;
        opt.init(pview);

        double best_monitor = -2.0; // CCC lower bound is -1
        for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
            double loss_sum = 0.0;
            std::size_t n_batches = 0;
            for (Batch& batch : batches(splits.train, config.batch_size, rng)) {
                LadderTrace trace = forward_train(params, batch.features, rng);
                BackwardResult back =
                    backward(params, trace, select_targets(config.model, batch.targets));
                std::vector<ParamRef> grefs = trainable_parameters(back.grads);
                std::vector<const Matrix*> gview;
                for (ParamRef& r : grefs) gview.push_back(r.tensor);
                nadam_step(pmut, gview, opt);
                loss_sum += back.loss.total;
                ++n_batches;
            }
            if (n_batches == 0) {
                throw ArgumentError("train_one: training split smaller than one batch");
            }

            EpochRecord rec;
            rec.epoch = epoch;
            rec.train_loss = loss_sum / static_cast<double>(n_batches);
            rec.val_ccc = evaluate_ccc(params, splits.validation);
            result.log.push_back(rec);

            if (rec.val_ccc[monitor] > best_monitor) {
                best_monitor = rec.val_ccc[monitor];
                result.best_epoch = epoch;
                result.best_val_ccc = rec.val_ccc;
                result.best_params = params;
            }
        }
        result.test_ccc = evaluate_ccc(result.best_params, splits.test);
    } catch (const NumericError& e) {
        result.failed = true;
        result.failure = e.what();
    }
    return result;
}

RunSummary run_experiment(const RunConfig& config, const Splits& splits,
                          const std::function<void(const SeedResult&)>& on_seed) {
    config.validate();
    RunSummary summary;
    summary.variant = config.model.variant;
    summary.primary_attr = config.primary_attr;
    summary.seeds = config.seeds;

    for (std::uint64_t seed : config.seeds) {
        SeedResult r = train_one(config, seed, splits);
        if (r.failed) summary.failed_seeds.push_back(seed);
        if (on_seed) on_seed(r);
        SeedRecord rec;
        rec.seed = r.seed;
        rec.failed = r.failed;
        rec.failure = r.failure;
        rec.best_epoch = r.best_epoch;
        rec.best_val_ccc = r.best_val_ccc;
        rec.test_ccc = r.test_ccc;
        rec.log = std::move(r.log);
        summary.per_seed.push_back(std::move(rec));
    }

    for (std::size_t a = 0; a < config.model.n_attrs(); ++a) {
        AttrSummary s;
        s.attr = config.model.output_attrs[a];
        for (const SeedRecord& r : summary.per_seed) {
            if (r.failed) continue;
            s.val_ccc_per_seed.push_back(r.best_val_ccc[a]);
            s.test_ccc_per_seed.push_back(r.test_ccc[a]);
        }
        s.val_mean = mean_of(s.val_ccc_per_seed);
        s.val_std = sample_std(s.val_ccc_per_seed);
        s.test_mean = mean_of(s.test_ccc_per_seed);
        s.test_std = sample_std(s.test_ccc_per_seed);
        summary.attrs.push_back(std::move(s));
    }
    return summary;
}

} // namespace emoladder
