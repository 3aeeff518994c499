#include <doctest.h>

#include <cmath>

#include "emoladder/errors.hpp"
#include "emoladder/losses.hpp"
#include "emoladder/rng.hpp"
#include "emoladder/gradcheck.hpp"

using namespace emoladder;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng, double spread = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = spread * rng.gaussian();
    return v;
}

} // namespace

TEST_CASE("ccc oracle values") {
    std::vector<double> x{0.3, -1.2, 2.0, 0.7};
    CHECK(ccc(x, x) == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> constant{2.0, 2.0, 2.0, 2.0};
    std::vector<double> varying{1.0, 2.0, 3.0, 4.0};
    CHECK(ccc(constant, varying) == 0.0);

    CHECK(ccc({1, 2, 3, 4}, {2, 3, 4, 5}) == doctest::Approx(2.5 / 3.5).epsilon(1e-9));
}

TEST_CASE("ccc argument errors") {
    CHECK_THROWS_AS(ccc({1.0}, {1.0}), ArgumentError);
    CHECK_THROWS_AS(ccc({1.0, 2.0}, {1.0, 2.0, 3.0}), ArgumentError);
}

TEST_CASE("ccc symmetry and boundedness on random pairs") {
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(30);
        std::vector<double> x = random_vec(n, rng, 2.0);
        std::vector<double> y = random_vec(n, rng, 3.0);
        const double a = ccc(x, y), b = ccc(y, x);
        CHECK(std::abs(a - b) < 1e-12);
        CHECK(std::abs(a) <= 1.0 + 1e-12);
    }
}

TEST_CASE("ccc of affine transforms") {
    std::vector<double> x{0.5, -1.0, 2.5, 0.0, 1.0};
    double mu = 0.0;
    for (double v : x) mu += v;
    mu /= static_cast<double>(x.size());

    SUBCASE("scaling or shifting breaks perfect concordance") {
        std::vector<double> scaled, shifted;
        for (double v : x) {
            scaled.push_back(2.0 * v);
            shifted.push_back(v + 1.0);
        }
        CHECK(ccc(x, scaled) < 1.0);
        CHECK(ccc(x, shifted) < 1.0);
    }
    SUBCASE("mirror through the mean gives exactly -1") {
        std::vector<double> mirrored;
        for (double v : x) mirrored.push_back(-v + 2.0 * mu);
        CHECK(ccc(x, mirrored) == doctest::Approx(-1.0).epsilon(1e-12));
    }
}

TEST_CASE("ccc loss and gradient") {
    std::vector<double> t{1.0, 2.0, 3.0};
    std::vector<double> grad;
    CHECK(ccc_loss_and_grad(t, t, grad) == doctest::Approx(0.0));

    Rng rng(9);
    std::vector<double> pred = random_vec(16, rng);
    std::vector<double> target = random_vec(16, rng);
    const double loss = ccc_loss_and_grad(pred, target, grad);
    CHECK(loss == doctest::Approx(1.0 - ccc(pred, target)).epsilon(1e-12));

    double max_err = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double numeric = emoladder::central_diff(
            [&]() {
                std::vector<double> g;
                return ccc_loss_and_grad(pred, target, g);
            },
            pred[i]);
        max_err = std::max(max_err, emoladder::gradcheck_rel_error(grad[i], numeric));
    }
    CHECK(max_err < 1e-6);
}

TEST_CASE("ccc loss is a pure function of its inputs") {
    Rng rng(10);
    std::vector<double> pred = random_vec(8, rng);
    std::vector<double> target = random_vec(8, rng);
    std::vector<double> g1, g2;
    const double l1 = ccc_loss_and_grad(pred, target, g1);
    const double l2 = ccc_loss_and_grad(pred, target, g2);
    CHECK(l1 == l2);
    CHECK(g1 == g2);
}

TEST_CASE("mse basics and loop oracle") {
    Matrix a = Matrix::from_rows({{0, 0}});
    Matrix b = Matrix::from_rows({{1, 1}});
    CHECK(mse(a, a) == 0.0);
    CHECK(mse(a, b) == doctest::Approx(1.0));
    CHECK_THROWS_AS(mse(a, Matrix(2, 2)), ShapeError);

    Rng rng(12);
    Matrix x = gaussian_sample(8, 8, 1.0, rng);
    Matrix y = gaussian_sample(8, 8, 1.0, rng);
    double acc = 0.0;
    for (std::size_t r = 0; r < 8; ++r) {
        for (std::size_t c = 0; c < 8; ++c) {
            acc += (x.at(r, c) - y.at(r, c)) * (x.at(r, c) - y.at(r, c));
        }
    }
    CHECK(std::abs(mse(x, y) - acc / 64.0) < 1e-12);
}

TEST_CASE("ladder_total") {
    CHECK(ladder_total(0.7, {0.2, 0.4}, {0.0, 0.0}) == doctest::Approx(0.7));
    CHECK(ladder_total(0.5, {0.2, 0.1, 0.3}, {1, 1, 1}) == doctest::Approx(1.1));
    CHECK_THROWS_AS(ladder_total(0.5, {0.1}, {1, 2}), ArgumentError);
    CHECK_THROWS_AS(ladder_total(0.5, {0.1}, {-1}), ArgumentError);

    SUBCASE("linear in each reconstruction cost") {
        Rng rng(3);
        std::vector<double> lambda{0.1, 1.0, 10.0};
        std::vector<double> cd{0.3, 0.2, 0.05};
        const double base = ladder_total(0.4, cd, lambda);
        for (std::size_t l = 0; l < cd.size(); ++l) {
            std::vector<double> bumped = cd;
            bumped[l] += 1.0;
            CHECK(ladder_total(0.4, bumped, lambda) ==
                  doctest::Approx(base + lambda[l]).epsilon(1e-12));
        }
    }
}

TEST_CASE("mtl_loss") {
    MtlWeights even{1.0 / 3.0, 1.0 / 3.0};
    CHECK(mtl_loss(0.3, 0.6, 0.9, even) == doctest::Approx(0.6).epsilon(1e-12));

    MtlWeights w{0.5, 0.3};
    CHECK(mtl_loss(0.3, 0.6, 0.9, w) == doctest::Approx(0.51).epsilon(1e-12));
    CHECK(w.alpha + w.beta + w.dominance() == doctest::Approx(1.0).epsilon(1e-15));

    // alpha + beta = 1 leaves dominance with zero weight
    MtlWeights boundary{0.5, 0.5};
    CHECK(mtl_loss(0.1, 0.2, 123.0, boundary) == doctest::Approx(0.15).epsilon(1e-12));

    MtlWeights bad{0.8, 0.5};
    CHECK_THROWS_AS(mtl_loss(1, 1, 1, bad), ArgumentError);
    MtlWeights zero{0.0, 0.5};
    CHECK_THROWS_AS(mtl_loss(1, 1, 1, zero), ArgumentError);
}

TEST_CASE("loss breakdown recomputes exactly") {
    LossBreakdown b;
    b.supervised = 0.37;
    b.reconstruction = {0.11, 0.07, 0.25};
    b.lambda = {1.0, 1.0, 1.0};
    b.total = ladder_total(b.supervised, b.reconstruction, b.lambda);
    CHECK(b.total == b.recompute_total()); // bitwise: same expression
}
