#include "emoladder/layers.hpp"

#include <cmath>

#include "emoladder/errors.hpp"

namespace emoladder {

namespace {

void take_cache(bool& consumed, const char* what) {
    if (consumed) {
        throw StateError(std::string(what) + ": cache already consumed");
    }
    consumed = true;
}

void accumulate(Matrix& into, const Matrix& delta) {
    if (into.empty()) {
        into = delta;
        return;
    }
    if (!into.same_shape(delta)) {
        throw ShapeError("gradient accumulate: " + into.shape_str() + " vs " + delta.shape_str());
    }
    for (std::size_t i = 0; i < into.size(); ++i) into.data()[i] += delta.data()[i];
}

} // namespace

Matrix dense_forward(const Matrix& x, const DenseParams& p, DenseCache* cache) {
    if (x.cols() != p.w.rows() || p.b.rows() != 1 || p.b.cols() != p.w.cols()) {
        throw ShapeError("dense_forward: x " + x.shape_str() + ", w " + p.w.shape_str() +
                         ", b " + p.b.shape_str());
    }
    Matrix y = add_row_broadcast(matmul(x, p.w), p.b);
    if (cache) {
        cache->x = x;
        cache->consumed = false;
    }
    return y;
}

Matrix dense_backward(const Matrix& grad_out, const DenseParams& p, DenseCache& cache,
                      Matrix& grad_w, Matrix& grad_b) {
    take_cache(cache.consumed, "dense_backward");
    if (grad_out.rows() != cache.x.rows() || grad_out.cols() != p.w.cols()) {
        throw ShapeError("dense_backward: grad " + grad_out.shape_str());
    }
    accumulate(grad_w, matmul(transpose(cache.x), grad_out));
    accumulate(grad_b, col_sum(grad_out));
    return matmul(grad_out, transpose(p.w));
}

Matrix batchnorm_forward(const Matrix& x, BatchNormParams& p, Mode mode,
                         BatchNormCache* cache, bool update_running) {
    const std::size_t n = x.cols();
    if (p.gamma.cols() != n || p.beta.cols() != n || p.running_mean.cols() != n ||
        p.running_var.cols() != n) {
        throw ShapeError("batchnorm_forward: params sized for " +
                         p.gamma.shape_str() + ", input " + x.shape_str());
    }
    if (mode == Mode::infer) {
        if (cache) {
            throw ArgumentError("batchnorm_forward: no cache in infer mode");
        }
        return batchnorm_infer(x, p);
    }

    if (x.rows() < 2) {
        throw ArgumentError("batchnorm_forward: train mode needs batch size >= 2");
    }
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    Matrix mean(1, n), var(1, n);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < n; ++c) mean.at(0, c) += x.at(r, c);
    }
    for (std::size_t c = 0; c < n; ++c) mean.at(0, c) *= inv_n;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const double d = x.at(r, c) - mean.at(0, c);
            var.at(0, c) += d * d;
        }
    }
    for (std::size_t c = 0; c < n; ++c) var.at(0, c) *= inv_n;

    Matrix inv_std(1, n);
    for (std::size_t c = 0; c < n; ++c) inv_std.at(0, c) = 1.0 / std::sqrt(var.at(0, c) + p.epsilon);

    Matrix x_hat(x.rows(), n), y(x.rows(), n);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const double h = (x.at(r, c) - mean.at(0, c)) * inv_std.at(0, c);
            x_hat.at(r, c) = h;
            y.at(r, c) = p.gamma.at(0, c) * h + p.beta.at(0, c);
        }
    }

    if (update_running) {
        for (std::size_t c = 0; c < n; ++c) {
            p.running_mean.at(0, c) =
                p.momentum * p.running_mean.at(0, c) + (1.0 - p.momentum) * mean.at(0, c);
            p.running_var.at(0, c) =
                p.momentum * p.running_var.at(0, c) + (1.0 - p.momentum) * var.at(0, c);
        }
    }
    if (cache) {
        cache->x_hat = x_hat;
        cache->inv_std = inv_std;
        cache->consumed = false;
    }
    return y;
}

Matrix batchnorm_infer(const Matrix& x, const BatchNormParams& p) {
    const std::size_t n = x.cols();
    if (p.gamma.cols() != n) {
        throw ShapeError("batchnorm_infer: params sized for " + p.gamma.shape_str() +
                         ", input " + x.shape_str());
    }
    Matrix y(x.rows(), n);
    for (std::size_t c = 0; c < n; ++c) {
        const double inv = 1.0 / std::sqrt(p.running_var.at(0, c) + p.epsilon);
        const double g = p.gamma.at(0, c), b = p.beta.at(0, c), m = p.running_mean.at(0, c);
        for (std::size_t r = 0; r < x.rows(); ++r) {
            y.at(r, c) = g * (x.at(r, c) - m) * inv + b;
        }
    }
    return y;
}

Matrix batchnorm_backward(const Matrix& grad_out, const BatchNormParams& p,
                          BatchNormCache& cache, Matrix& grad_gamma, Matrix& grad_beta) {
    take_cache(cache.consumed, "batchnorm_backward");
    const Matrix& x_hat = cache.x_hat;
    if (!grad_out.same_shape(x_hat)) {
        throw ShapeError("batchnorm_backward: grad " + grad_out.shape_str());
    }
    const std::size_t rows = x_hat.rows(), n = x_hat.cols();
    const double inv_n = 1.0 / static_cast<double>(rows);

    Matrix dgamma(1, n), dbeta(1, n), sum_dxhat(1, n), sum_dxhat_xhat(1, n);
    Matrix dxhat(rows, n);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const double go = grad_out.at(r, c);
            dgamma.at(0, c) += go * x_hat.at(r, c);
            dbeta.at(0, c) += go;
            const double dh = go * p.gamma.at(0, c);
            dxhat.at(r, c) = dh;
            sum_dxhat.at(0, c) += dh;
            sum_dxhat_xhat.at(0, c) += dh * x_hat.at(r, c);
        }
    }
    Matrix dx(rows, n);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            dx.at(r, c) = cache.inv_std.at(0, c) * inv_n *
                          (static_cast<double>(rows) * dxhat.at(r, c) - sum_dxhat.at(0, c) -
                           x_hat.at(r, c) * sum_dxhat_xhat.at(0, c));
        }
    }
    accumulate(grad_gamma, dgamma);
    accumulate(grad_beta, dbeta);
    return dx;
}

Matrix colnorm_forward(const Matrix& x, double epsilon, ColnormCache* cache) {
    if (x.rows() < 2) {
        throw ArgumentError("colnorm_forward: needs batch size >= 2");
    }
    const std::size_t rows = x.rows(), n = x.cols();
    const double inv_n = 1.0 / static_cast<double>(rows);
    Matrix mean(1, n), var(1, n);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < n; ++c) mean.at(0, c) += x.at(r, c);
    }
    for (std::size_t c = 0; c < n; ++c) mean.at(0, c) *= inv_n;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const double d = x.at(r, c) - mean.at(0, c);
            var.at(0, c) += d * d;
        }
    }
    Matrix inv_std(1, n);
    for (std::size_t c = 0; c < n; ++c) {
        inv_std.at(0, c) = 1.0 / std::sqrt(var.at(0, c) * inv_n + epsilon);
    }
    Matrix y(rows, n);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            y.at(r, c) = (x.at(r, c) - mean.at(0, c)) * inv_std.at(0, c);
        }
    }
    if (cache) {
        cache->x_hat = y;
        cache->inv_std = inv_std;
        cache->consumed = false;
    }
    return y;
}

Matrix colnorm_backward(const Matrix& grad_out, ColnormCache& cache) {
    take_cache(cache.consumed, "colnorm_backward");
    const Matrix& x_hat = cache.x_hat;
    if (!grad_out.same_shape(x_hat)) {
        throw ShapeError("colnorm_backward: grad " + grad_out.shape_str());
    }
    const std::size_t rows = x_hat.rows(), n = x_hat.cols();
    const double inv_n = 1.0 / static_cast<double>(rows);
    Matrix sum_d(1, n), sum_dx(1, n);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            sum_d.at(0, c) += grad_out.at(r, c);
            sum_dx.at(0, c) += grad_out.at(r, c) * x_hat.at(r, c);
        }
    }
    Matrix dx(rows, n);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            dx.at(r, c) = cache.inv_std.at(0, c) * inv_n *
                          (static_cast<double>(rows) * grad_out.at(r, c) - sum_d.at(0, c) -
                           x_hat.at(r, c) * sum_dx.at(0, c));
        }
    }
    return dx;
}

Matrix relu_forward(const Matrix& x, ReluCache* cache) {
    Matrix y(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) {
        y.data()[i] = x.data()[i] > 0.0 ? x.data()[i] : 0.0;
    }
    if (cache) {
        cache->x = x;
        cache->consumed = false;
    }
    return y;
}

Matrix relu_backward(const Matrix& grad_out, ReluCache& cache) {
    take_cache(cache.consumed, "relu_backward");
    if (!grad_out.same_shape(cache.x)) {
        throw ShapeError("relu_backward: grad " + grad_out.shape_str());
    }
    Matrix dx(grad_out.rows(), grad_out.cols());
    for (std::size_t i = 0; i < dx.size(); ++i) {
        dx.data()[i] = cache.x.data()[i] > 0.0 ? grad_out.data()[i] : 0.0;
    }
    return dx;
}

Matrix dropout_forward(const Matrix& x, double p_drop, Rng& rng, Mode mode,
                       DropoutCache* cache) {
    if (!(p_drop >= 0.0) || p_drop >= 1.0) {
        throw ArgumentError("dropout_forward: p_drop must be in [0, 1)");
    }
    if (mode == Mode::infer) {
        if (cache) {
            throw ArgumentError("dropout_forward: no cache in infer mode");
        }
        return x;
    }
    const double keep_scale = 1.0 / (1.0 - p_drop);
    Matrix mask(x.rows(), x.cols());
    for (std::size_t i = 0; i < mask.size(); ++i) {
        mask.data()[i] = rng.uniform() >= p_drop ? keep_scale : 0.0;
    }
    Matrix y = hadamard(x, mask);
    if (cache) {
        cache->mask = std::move(mask);
        cache->consumed = false;
    }
    return y;
}

Matrix dropout_backward(const Matrix& grad_out, DropoutCache& cache) {
    take_cache(cache.consumed, "dropout_backward");
    return hadamard(grad_out, cache.mask);
}

DenseParams init_dense_he(std::size_t in_dim, std::size_t out_dim, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(in_dim));
    DenseParams p{Matrix(in_dim, out_dim), Matrix(1, out_dim)};
    for (std::size_t i = 0; i < p.w.size(); ++i) {
        p.w.data()[i] = (2.0 * rng.uniform() - 1.0) * limit;
    }
    return p;
}

DenseParams init_dense_xavier(std::size_t in_dim, std::size_t out_dim, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
    DenseParams p{Matrix(in_dim, out_dim), Matrix(1, out_dim)};
    for (std::size_t i = 0; i < p.w.size(); ++i) {
        p.w.data()[i] = (2.0 * rng.uniform() - 1.0) * limit;
    }
    return p;
}

BatchNormParams init_batchnorm(std::size_t n) {
    BatchNormParams p;
    p.gamma = Matrix(1, n, 1.0);
    p.beta = Matrix(1, n, 0.0);
    p.running_mean = Matrix(1, n, 0.0);
    p.running_var = Matrix(1, n, 1.0);
    return p;
}

} // namespace emoladder
