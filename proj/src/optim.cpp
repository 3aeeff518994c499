#include "emoladder/optim.hpp"

#include <cmath>

#include "emoladder/errors.hpp"

namespace emoladder {

void NadamState::init(const std::vector<const Matrix*>& params) {
    m.clear();
    v.clear();
    m.reserve(params.size());
    v.reserve(params.size());
    for (const Matrix* p : params) {
        m.emplace_back(p->rows(), p->cols());
        v.emplace_back(p->rows(), p->cols());
    }
    t = 0;
}

void nadam_step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads,
                NadamState& state) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw ShapeError("nadam_step: parameter/gradient/state count mismatch");
    }
    state.t += 1;
    const NadamConfig& c = state.config;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Matrix& theta = *params[k];
        const Matrix& g = *grads[k];
        if (!theta.same_shape(g) || !theta.same_shape(state.m[k])) {
            throw ShapeError("nadam_step: tensor " + std::to_string(k) + " shape mismatch");
        }
        if (!g.all_finite()) {
            throw NumericError("nadam_step: non-finite gradient in tensor " + std::to_string(k));
        }
        Matrix& mk = state.m[k];
        Matrix& vk = state.v[k];
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double gi = g.data()[i];
            mk.data()[i] = c.beta1 * mk.data()[i] + (1.0 - c.beta1) * gi;
            vk.data()[i] = c.beta2 * vk.data()[i] + (1.0 - c.beta2) * gi * gi;
            const double m_hat = mk.data()[i] / bc1;
            const double v_hat = vk.data()[i] / bc2;
            const double step = c.beta1 * m_hat + (1.0 - c.beta1) * gi / bc1;
            theta.data()[i] -= c.learning_rate * step / (std::sqrt(v_hat) + c.epsilon);
        }
    }
}

} // namespace emoladder
