#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "emoladder/errors.hpp"
#include "emoladder/rng.hpp"

using namespace emoladder;

TEST_CASE("same seed, same stream") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        CHECK(a.uniform() == b.uniform());
        CHECK(a.gaussian() == b.gaussian());
    }
}

TEST_CASE("gaussian_sample moments at variance 0.3") {
    Rng rng(123);
    const std::size_t n = 1000;
    Matrix s = gaussian_sample(n, 1000, 0.3, rng);
    double mean = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) mean += s.data()[i];
    mean /= static_cast<double>(s.size());
    CHECK(std::abs(mean) < 0.005);

    double var = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        var += (s.data()[i] - mean) * (s.data()[i] - mean);
    }
    var /= static_cast<double>(s.size());
    CHECK(std::abs(var - 0.3) < 0.005);
}

TEST_CASE("gaussian_sample degenerate and error cases") {
    Rng rng(1);
    Matrix z = gaussian_sample(3, 4, 0.0, rng);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(z.data()[i] == 0.0);
    CHECK_THROWS_AS(gaussian_sample(2, 2, -0.1, rng), ArgumentError);
}

TEST_CASE("gaussian_sample reproducibility after reset") {
    Rng a(99);
    Matrix first = gaussian_sample(8, 8, 0.3, a);
    Rng b(99);
    Matrix second = gaussian_sample(8, 8, 0.3, b);
    CHECK(exactly_equal(first, second));
}

TEST_CASE("uniform_index stays in range and shuffle is a permutation") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        CHECK(rng.uniform_index(7) < 7);
    }
    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    rng.shuffle(v);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    CHECK_THROWS_AS(rng.uniform_index(0), ArgumentError);
}

TEST_CASE("copying an rng freezes the stream") {
    Rng a(7);
    a.gaussian();
    Rng b = a;
    for (int i = 0; i < 100; ++i) CHECK(a.gaussian() == b.gaussian());
}
