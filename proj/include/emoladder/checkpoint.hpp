#pragma once

#include <optional>
#include <string>

#include "emoladder/data.hpp"
#include "emoladder/model.hpp"
#include "emoladder/optim.hpp"

namespace emoladder {

// Self-describing binary container: ASCII magic line, length-prefixed JSON
// header (model config plus a tensor manifest), then raw little-endian
// float64 blocks in manifest order. Round-trips are lossless at 64-bit
// precision and cover parameters, running batch-norm statistics, the input
// standardizer, and (optionally) the optimizer state.
void save_checkpoint(const ModelParams& params, const std::string& path,
                     const NadamState* optimizer = nullptr,
                     const Standardizer* standardizer = nullptr);

struct Checkpoint {
    ModelParams params;
    std::optional<NadamState> optimizer;
    std::optional<Standardizer> standardizer;
};

Checkpoint load_checkpoint(const std::string& path);

} // namespace emoladder
