#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "emoladder/matrix.hpp"

namespace emoladder {

// Deterministic random source. The core stream is std::mt19937_64, whose
// algorithm is pinned by the C++ standard, and every derived draw (uniform
// doubles, Gaussians via the Marsaglia polar method, bounded integers via
// rejection) is implemented here rather than delegated to unspecified
// std::distribution internals. Identical seed => identical stream on every
// platform.
//
// Copyable on purpose: a copy freezes the stream, which is how finite
// difference checks replay the exact noise/dropout draws of a forward pass.
// Single-owner while in use; never share one instance across threads.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal, Marsaglia polar method with cached spare.
    double gaussian();

    // Uniform integer in [0, n); unbiased via rejection. n must be > 0.
    std::size_t uniform_index(std::size_t n);

    // Fisher-Yates shuffle, consuming uniform_index draws.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// rows x cols of i.i.d. N(0, variance) samples; variance must be >= 0.
// Always consumes rows*cols Gaussian draws, so variance == 0 returns the
// all-zero matrix while leaving the stream in the same position a nonzero
// variance would have.
Matrix gaussian_sample(std::size_t rows, std::size_t cols, double variance, Rng& rng);

} // namespace emoladder
