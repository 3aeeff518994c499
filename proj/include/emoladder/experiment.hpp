#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "emoladder/data.hpp"
#include "emoladder/model.hpp"
#include "emoladder/optim.hpp"

namespace emoladder {

// Full training protocol for one architecture: up to max_epochs of NADAM
// with best-validation-CCC checkpoint selection, repeated per seed.
struct RunConfig {
    ModelConfig model;
    NadamConfig optimizer;
    std::size_t max_epochs = 50;
    std::size_t batch_size = 128;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    Attr primary_attr = Attr::arousal; // early-stopping monitor
    std::string output_dir;

    // data source: delimited feature/label files, or a synthetic spec
    std::string features_path;
    std::string labels_path;
    std::string synth_spec_path;
    SplitFractions fractions;
    std::uint64_t split_seed = 1234;

    // autoencoder baseline only
    DaePretrainConfig dae_pretrain;

    void validate() const;
    // index of primary_attr within model.output_attrs
    std::size_t primary_index() const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;         // mean total loss over the epoch's batches
    std::vector<double> val_ccc;     // per attribute, split-level
};

struct SeedResult {
    std::uint64_t seed = 0;
    bool failed = false;
    std::string failure;
    std::size_t best_epoch = 0;
    std::vector<double> best_val_ccc; // per attribute, at the selected epoch
    std::vector<double> test_ccc;     // per attribute, of the selected checkpoint
    std::vector<EpochRecord> log;
    ModelParams best_params;
};

struct AttrSummary {
    Attr attr = Attr::arousal;
    std::vector<double> val_ccc_per_seed;
    std::vector<double> test_ccc_per_seed;
    double val_mean = 0.0, val_std = 0.0;
    double test_mean = 0.0, test_std = 0.0;
};

// SeedResult without the checkpoint weights.
struct SeedRecord {
    std::uint64_t seed = 0;
    bool failed = false;
    std::string failure;
    std::size_t best_epoch = 0;
    std::vector<double> best_val_ccc;
    std::vector<double> test_ccc;
    std::vector<EpochRecord> log;
};

struct RunSummary {
    Variant variant = Variant::stl;
    Attr primary_attr = Attr::arousal;
    std::vector<std::uint64_t> seeds;
    std::vector<std::uint64_t> failed_seeds;
    std::vector<SeedRecord> per_seed;
    std::vector<AttrSummary> attrs; // aggregated over non-failed seeds
};

// Trains once with the given seed; selects the epoch with the best validation
// CCC of the primary attribute and evaluates that checkpoint on the test
// split. Numeric divergence is reported via failed/failure, not thrown.
SeedResult train_one(const RunConfig& config, std::uint64_t seed, const Splits& splits);

// train_one per seed plus mean/std aggregation (sample standard deviation).
// on_seed, when given, sees each finished SeedResult (checkpoint included).
RunSummary run_experiment(const RunConfig& config, const Splits& splits,
                          const std::function<void(const SeedResult&)>& on_seed = {});

// Split-level CCC of a model per configured attribute.
std::vector<double> evaluate_ccc(const ModelParams& params, const DatasetSplit& split);

double mean_of(const std::vector<double>& v);
double sample_std(const std::vector<double>& v);

// Welch's unequal-variance one-tailed t-test of mean(a) > mean(b); both
// samples need >= 2 values. Degenerate zero-variance samples: equal means
// give 0.5. The t tail is evaluated through a continued-fraction regularized
// incomplete beta.
double t_test_one_tailed(const std::vector<double>& a, const std::vector<double>& b);

// P(T_df > t) for Student's t.
double student_t_sf(double t, double df);
// Regularized incomplete beta I_x(a, b), Lentz continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

// ---------------------------------------------------------------------------
// Reporting
// ---------------------------------------------------------------------------

// Comparison table over variants: one row per variant, columns attribute x
// split, cells "mean ± std" (3 decimals). [brackets] mark the best mean per
// attribute/split column; a trailing * marks a ladder variant whose per-seed
// test/validation CCCs beat every supplied baseline with one-tailed p < 0.05.
std::string render_report(const std::vector<RunSummary>& summaries);
// Same content, one line per (variant, attribute, split) cell.
std::string render_report_delimited(const std::vector<RunSummary>& summaries);

} // namespace emoladder
