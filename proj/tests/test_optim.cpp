#include <doctest.h>

#include <cmath>

#include "emoladder/errors.hpp"
#include "emoladder/optim.hpp"
#include "emoladder/rng.hpp"

using namespace emoladder;

namespace {

struct Scalar {
    Matrix theta{1, 1};
    Matrix grad{1, 1};
    NadamState state;

    Scalar() { state.init({&theta}); }

    void step(double g) {
        grad.at(0, 0) = g;
        std::vector<Matrix*> p{&theta};
        std::vector<const Matrix*> gr{&grad};
        nadam_step(p, gr, state);
    }
};

} // namespace

TEST_CASE("zero gradient is a fixed point") {
    Scalar s;
    s.theta.at(0, 0) = 0.731;
    for (int i = 0; i < 5; ++i) s.step(0.0);
    CHECK(s.theta.at(0, 0) == 0.731);
}

TEST_CASE("first-step update with unit gradient and defaults") {
    Scalar s;
    s.step(1.0);
    // m_hat = 1, v_hat = 1, step = (0.9 + 0.1/0.1) / (1 + 1e-8)
    CHECK(std::abs(s.theta.at(0, 0) - (-9.5e-5)) < 1e-9);
}

TEST_CASE("identical inputs give identical trajectories") {
    Scalar a, b;
    Rng rng(13);
    std::vector<double> gs;
    for (int i = 0; i < 50; ++i) gs.push_back(rng.gaussian());
    for (double g : gs) {
        a.step(g);
        b.step(g);
    }
    CHECK(a.theta.at(0, 0) == b.theta.at(0, 0));
    CHECK(a.state.t == 50);
}

TEST_CASE("per-step update magnitude matches the closed-form bound") {
    // Oracle: an independent recomputation of m, v and the per-step bound
    //   |dtheta| <= lr * (b1*|m_hat| + (1-b1)*|g_hat|) / (sqrt(v_hat) + eps)
    Scalar s;
    const NadamConfig c = s.state.config;
    double m = 0.0, v = 0.0;
    Rng rng(29);
    double theta_prev = s.theta.at(0, 0);
    for (int t = 1; t <= 200; ++t) {
        const double g = 3.0 * rng.gaussian();
        s.step(g);
        m = c.beta1 * m + (1 - c.beta1) * g;
        v = c.beta2 * v + (1 - c.beta2) * g * g;
        const double bc1 = 1.0 - std::pow(c.beta1, t);
        const double bc2 = 1.0 - std::pow(c.beta2, t);
        const double bound = c.learning_rate *
                             (c.beta1 * std::abs(m / bc1) + (1 - c.beta1) * std::abs(g / bc1)) /
                             (std::sqrt(v / bc2) + c.epsilon);
        const double dtheta = std::abs(s.theta.at(0, 0) - theta_prev);
        CHECK(dtheta <= bound + 1e-18);
        theta_prev = s.theta.at(0, 0);
    }
}

TEST_CASE("shape and finiteness guards") {
    Scalar s;
    Matrix bad_grad(2, 1, 1.0);
    std::vector<Matrix*> p{&s.theta};
    std::vector<const Matrix*> g{&bad_grad};
    CHECK_THROWS_AS(nadam_step(p, g, s.state), ShapeError);

    Matrix nan_grad(1, 1, std::numeric_limits<double>::quiet_NaN());
    std::vector<const Matrix*> g2{&nan_grad};
    CHECK_THROWS_AS(nadam_step(p, g2, s.state), NumericError);
}
