#include <doctest.h>

#include "emoladder/errors.hpp"
#include "emoladder/matrix.hpp"
#include "emoladder/rng.hpp"

using namespace emoladder;

TEST_CASE("matmul identity and hand arithmetic") {
    Matrix a = Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
    CHECK(exactly_equal(matmul(Matrix::identity(3), a), a));

    Matrix b = Matrix::from_rows({{1, 2}, {3, 4}});
    Matrix v = Matrix::from_rows({{0}, {1}});
    Matrix r = matmul(b, v);
    CHECK(r.at(0, 0) == doctest::Approx(2.0));
    CHECK(r.at(1, 0) == doctest::Approx(4.0));
}

TEST_CASE("matmul matches the naive triple-loop oracle") {
    Rng rng(7);
    Matrix a = gaussian_sample(5, 7, 1.0, rng);
    Matrix b = gaussian_sample(7, 3, 1.0, rng);
    Matrix fast = matmul(a, b);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 7; ++k) acc += a.at(i, k) * b.at(k, j);
            CHECK(std::abs(fast.at(i, j) - acc) < 1e-12);
        }
    }
}

TEST_CASE("matmul rejects dimension mismatch") {
    Matrix a(2, 3), b(2, 3);
    CHECK_THROWS_AS(matmul(a, b), ShapeError);
}

TEST_CASE("matmul associativity on random triples") {
    Rng rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        Matrix a = gaussian_sample(4, 6, 1.0, rng);
        Matrix b = gaussian_sample(6, 5, 1.0, rng);
        Matrix c = gaussian_sample(5, 3, 1.0, rng);
        Matrix left = matmul(matmul(a, b), c);
        Matrix right = matmul(a, matmul(b, c));
        for (std::size_t i = 0; i < left.size(); ++i) {
            const double denom = std::max(std::abs(left.data()[i]), 1.0);
            CHECK(std::abs(left.data()[i] - right.data()[i]) / denom < 1e-9);
        }
    }
}

TEST_CASE("hadamard identities and hand arithmetic") {
    Rng rng(3);
    Matrix a = gaussian_sample(3, 4, 1.0, rng);
    CHECK(exactly_equal(hadamard(a, Matrix(3, 4, 1.0)), a));
    CHECK(exactly_equal(hadamard(a, Matrix(3, 4, 0.0)), Matrix(3, 4, 0.0)));

    Matrix x = Matrix::from_rows({{1, 2}, {3, 4}});
    Matrix y = Matrix::from_rows({{2, 2}, {0, 1}});
    Matrix expect = Matrix::from_rows({{2, 4}, {0, 4}});
    CHECK(exactly_equal(hadamard(x, y), expect));

    CHECK_THROWS_AS(hadamard(x, Matrix(3, 2)), ShapeError);
}

TEST_CASE("finite-value guard") {
    Matrix a(2, 2, 1.0);
    a.at(0, 1) = std::numeric_limits<double>::infinity();
    CHECK_FALSE(a.all_finite());
    CHECK_THROWS_AS(a.require_finite("test"), NumericError);
}

TEST_CASE("take_rows and column gather") {
    Matrix a = Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
    Matrix picked = take_rows(a, {2, 0});
    CHECK(picked.at(0, 0) == 5.0);
    CHECK(picked.at(1, 1) == 2.0);
    std::vector<double> col = column(a, 1);
    CHECK(col == std::vector<double>{2, 4, 6});
}
