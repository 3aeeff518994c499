#include "emoladder/losses.hpp"

#include <cmath>
#include <cstddef>

#include "emoladder/errors.hpp"

namespace emoladder {

void MtlWeights::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0) ||
        !(alpha + beta <= 1.0)) {
        throw ArgumentError("MtlWeights: need 0 < alpha < 1, 0 < beta < 1, alpha + beta <= 1");
    }
}

double LossBreakdown::recompute_total() const {
    return ladder_total(supervised, reconstruction, lambda);
}

namespace {

struct CccMoments {
    double mean_x, mean_y, var_x, var_y, cov; // population moments
    double denom;                             // var_x + var_y + (mean_x - mean_y)^2
};

CccMoments ccc_moments(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) {
        throw ArgumentError("ccc: length mismatch");
    }
    if (x.size() < 2) {
        throw ArgumentError("ccc: need length >= 2");
    }
    const double inv_n = 1.0 / static_cast<double>(x.size());
    CccMoments m{0, 0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < x.size(); ++i) {
        m.mean_x += x[i];
        m.mean_y += y[i];
    }
    m.mean_x *= inv_n;
    m.mean_y *= inv_n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - m.mean_x;
        const double dy = y[i] - m.mean_y;
        m.var_x += dx * dx;
        m.var_y += dy * dy;
        m.cov += dx * dy;
    }
    m.var_x *= inv_n;
    m.var_y *= inv_n;
    m.cov *= inv_n;
    const double dm = m.mean_x - m.mean_y;
    m.denom = m.var_x + m.var_y + dm * dm;
    return m;
}

} // namespace

double ccc(const std::vector<double>& pred, const std::vector<double>& target) {
    const CccMoments m = ccc_moments(pred, target);
    if (m.denom == 0.0) {
        return 0.0;
    }
    return 2.0 * m.cov / m.denom;
}

double ccc_loss_and_grad(const std::vector<double>& pred, const std::vector<double>& target,
                         std::vector<double>& grad_pred) {
    const CccMoments m = ccc_moments(pred, target);
    grad_pred.assign(pred.size(), 0.0);
    if (m.denom == 0.0) {
        return 1.0;
    }
    const double n = static_cast<double>(pred.size());
    const double rho = 2.0 * m.cov / m.denom;
    const double dm = m.mean_x - m.mean_y;
    // d(rho)/dx_i = (2/(n*denom^2)) * ((y_i - mu_y)*denom - cov*(2(x_i - mu_x) + 2*dm))
    const double c = 2.0 / (n * m.denom * m.denom);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double drho = c * ((target[i] - m.mean_y) * m.denom -
                                 m.cov * (2.0 * (pred[i] - m.mean_x) + 2.0 * dm));
        grad_pred[i] = -drho; // loss = 1 - rho
    }
    return 1.0 - rho;
}

double mse(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("mse: " + a.shape_str() + " vs " + b.shape_str());
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        acc += d * d;
    }
    return a.size() > 0 ? acc / static_cast<double>(a.size()) : 0.0;
}

double ladder_total(double c_supervised, const std::vector<double>& c_reconstruction,
                    const std::vector<double>& lambda) {
    if (c_reconstruction.size() != lambda.size()) {
        throw ArgumentError("ladder_total: C_d and lambda length mismatch");
    }
    double total = c_supervised;
    for (std::size_t l = 0; l < lambda.size(); ++l) {
        if (!(lambda[l] >= 0.0)) {
            throw ArgumentError("ladder_total: lambda must be >= 0");
        }
        total += lambda[l] * c_reconstruction[l];
    }
    return total;
}

double mtl_loss(double c_aro, double c_val, double c_dom, const MtlWeights& w) {
    w.validate();
    return w.alpha * c_aro + w.beta * c_val + w.dominance() * c_dom;
}

} // namespace emoladder
