#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "emoladder/matrix.hpp"
#include "emoladder/rng.hpp"

namespace emoladder {

// One partition: features plus the three averaged attribute ratings
// (arousal, valence, dominance on the 1-7 scale) and the speaker of each row.
struct DatasetSplit {
    std::vector<std::string> segment_ids;
    Matrix features; // N x D
    Matrix targets;  // N x 3
    std::vector<std::string> speaker_ids;

    std::size_t size() const { return segment_ids.size(); }
};

// The joined corpus before partitioning. Same layout as a split, plus the
// count of feature rows that had to be dropped for lack of a label row.
struct FullTable : DatasetSplit {
    std::size_t dropped_missing_labels = 0;
};

// Feature file: header `segment_id,f0001,...`; one row per segment.
// Labels file: header `segment_id,arousal,valence,dominance,speaker_id`.
// Rows are joined on segment id; feature rows without a label are dropped
// (counted), duplicate ids are rejected, targets must lie in [1, 7].
FullTable load_corpus(const std::string& features_path, const std::string& labels_path);

// Writers for the same formats; doubles are rendered with enough digits to
// round-trip bit-exactly.
void write_features_file(const DatasetSplit& table, const std::string& path);
void write_labels_file(const DatasetSplit& table, const std::string& path);

struct SplitFractions {
    double train = 0.7;
    double validation = 0.1;
    double test = 0.2;
};

struct Splits {
    DatasetSplit train;
    DatasetSplit validation;
    DatasetSplit test;
};

// Speaker-disjoint partitioning: speakers are shuffled with the given rng and
// greedily assigned, whole, to whichever split is furthest below its segment
// quota. Needs >= 3 speakers; fractions must sum to 1.
Splits split_by_speaker(const FullTable& table, const SplitFractions& fractions, Rng& rng);

// Per-feature z-scoring fitted on the training split only. Features with zero
// training variance are dropped everywhere and their original indices kept.
struct Standardizer {
    std::vector<double> mean; // per retained feature
    std::vector<double> std_dev;
    std::vector<std::size_t> kept;    // original column indices retained
    std::vector<std::size_t> dropped; // zero-variance columns

    Matrix apply(const Matrix& features) const;
    Matrix invert(const Matrix& standardized) const;
};

Standardizer fit_standardizer(const Matrix& train_features);
// Fits on splits.train and transforms all three splits in place.
Standardizer standardize(Splits& splits);

// Synthetic corpus: a low-rank latent drives both the features (through a
// random linear map, a tanh, and additive noise) and the three attribute
// targets (correlated smooth functions of the latent squashed into [1, 7]).
struct SynthSpec {
    std::size_t n_samples = 2000;
    std::size_t feature_dim = 50;
    std::size_t latent_rank = 8;
    // symmetric PSD with unit diagonal
    std::array<std::array<double, 3>, 3> attr_corr{{{1.0, 0.6, 0.3},
                                                    {0.6, 1.0, 0.4},
                                                    {0.3, 0.4, 1.0}}};
    double feature_noise = 0.5; // std of additive feature noise
    double target_noise = 0.05; // std of pre-squash target noise
    std::size_t n_speakers = 40;
    std::uint64_t seed = 1;

    void validate() const;
};

FullTable generate_synthetic(const SynthSpec& spec);

// Key-value text format: `name = value` lines, '#' comments.
SynthSpec load_synth_spec(const std::string& path);
void save_synth_spec(const SynthSpec& spec, const std::string& path);

struct Batch {
    Matrix features;
    Matrix targets; // N x 3
};

// Seeded shuffle into fixed-size mini-batches; with drop_last (the default)
// a trailing short batch is discarded to protect batch-norm statistics.
std::vector<Batch> batches(const DatasetSplit& split, std::size_t batch_size, Rng& rng,
                           bool drop_last = true);

} // namespace emoladder
