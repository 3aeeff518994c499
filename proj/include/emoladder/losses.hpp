#pragma once

#include <vector>

#include "emoladder/matrix.hpp"

namespace emoladder {

// Weights of the three-attribute multi-task loss:
//   alpha * c_arousal + beta * c_valence + (1 - alpha - beta) * c_dominance
// with 0 < alpha < 1, 0 < beta < 1 and alpha + beta <= 1.
struct MtlWeights {
    double alpha = 1.0 / 3.0;
    double beta = 1.0 / 3.0;

    double dominance() const { return 1.0 - alpha - beta; }
    void validate() const;
};

// One training step's composite loss, kept decomposed so the total can be
// re-derived exactly: total == supervised + sum_l lambda[l] * reconstruction[l].
struct LossBreakdown {
    double supervised = 0.0;                 // C_c
    std::vector<double> reconstruction;      // C_d per layer, bottom to top
    std::vector<double> lambda;              // per-layer weight, same length
    double total = 0.0;

    double recompute_total() const;
};

// Concordance correlation coefficient with population (1/N) moments:
//   rho_c = 2*s_xy / (s_x^2 + s_y^2 + (mu_x - mu_y)^2)
// Returns 0 when the denominator is 0 (both inputs constant); result is
// always in [-1, 1]. Inputs must have equal length >= 2.
double ccc(const std::vector<double>& pred, const std::vector<double>& target);

// loss = 1 - ccc(pred, target), with the analytic gradient of the batch-level
// loss with respect to each prediction. At the degenerate zero-denominator
// point the gradient is defined as zero.
double ccc_loss_and_grad(const std::vector<double>& pred, const std::vector<double>& target,
                         std::vector<double>& grad_pred);

// Mean over all entries of squared differences.
double mse(const Matrix& a, const Matrix& b);

// C = C_c + sum_l lambda[l] * C_d[l]; lambda must be elementwise >= 0.
double ladder_total(double c_supervised, const std::vector<double>& c_reconstruction,
                    const std::vector<double>& lambda);

// alpha * c_aro + beta * c_val + (1 - alpha - beta) * c_dom.
double mtl_loss(double c_aro, double c_val, double c_dom, const MtlWeights& w);

} // namespace emoladder
