#include "emoladder/rng.hpp"

#include <cmath>

#include "emoladder/errors.hpp"

namespace emoladder {

double Rng::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

std::size_t Rng::uniform_index(std::size_t n) {
    if (n == 0) {
        throw ArgumentError("uniform_index: n must be > 0");
    }
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r;
    do {
        r = next_u64();
    } while (r >= limit);
    return static_cast<std::size_t>(r % bound);
}

Matrix gaussian_sample(std::size_t rows, std::size_t cols, double variance, Rng& rng) {
    if (!(variance >= 0.0)) {
        throw ArgumentError("gaussian_sample: variance must be >= 0");
    }
    const double sigma = std::sqrt(variance);
    Matrix out(rows, cols);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] = sigma * rng.gaussian();
    }
    return out;
}

} // namespace emoladder
