#include "emoladder/matrix.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "emoladder/errors.hpp"

namespace emoladder {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (data_.size() != rows_ * cols_) {
        throw ShapeError("Matrix: value count " + std::to_string(data_.size()) +
                         " does not equal " + std::to_string(rows_) + "x" +
                         std::to_string(cols_));
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Matrix();
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols()) {
            throw ShapeError("Matrix::from_rows: ragged row " + std::to_string(r));
        }
        for (std::size_t c = 0; c < m.cols(); ++c) m.at(r, c) = rows[r][c];
    }
    return m;
}

std::string Matrix::shape_str() const {
    std::ostringstream os;
    os << rows_ << "x" << cols_;
    return os.str();
}

bool Matrix::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void Matrix::require_finite(const std::string& context) const {
    if (!all_finite()) {
        throw NumericError("non-finite value in " + context);
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: " + a.shape_str() + " x " + b.shape_str());
    }
    Matrix out(a.rows(), b.cols());
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    // i-k-j order keeps the inner loop contiguous in both b and out.
    for (std::size_t i = 0; i < n; ++i) {
        const double* arow = a.data() + i * k;
        double* orow = out.data() + i * m;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            if (av == 0.0) continue;
            const double* brow = b.data() + kk * m;
            for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    }
    out.require_finite("matmul result");
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("hadamard: " + a.shape_str() + " vs " + b.shape_str());
    }
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) out.at(c, r) = a.at(r, c);
    }
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("add: " + a.shape_str() + " vs " + b.shape_str());
    }
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] + b.data()[i];
    return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("sub: " + a.shape_str() + " vs " + b.shape_str());
    }
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] - b.data()[i];
    return out;
}

Matrix scale(const Matrix& a, double s) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * s;
    return out;
}

Matrix add_row_broadcast(const Matrix& a, const Matrix& row) {
    if (row.rows() != 1 || row.cols() != a.cols()) {
        throw ShapeError("add_row_broadcast: " + a.shape_str() + " vs " + row.shape_str());
    }
    Matrix out(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) out.at(r, c) = a.at(r, c) + row.at(0, c);
    }
    return out;
}

Matrix col_sum(const Matrix& a) {
    Matrix out(1, a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) out.at(0, c) += a.at(r, c);
    }
    return out;
}

Matrix col_mean(const Matrix& a) {
    Matrix s = col_sum(a);
    return scale(s, a.rows() > 0 ? 1.0 / static_cast<double>(a.rows()) : 0.0);
}

Matrix take_rows(const Matrix& a, const std::vector<std::size_t>& indices) {
    Matrix out(indices.size(), a.cols());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        if (indices[r] >= a.rows()) {
            throw ArgumentError("take_rows: index out of range");
        }
        for (std::size_t c = 0; c < a.cols(); ++c) out.at(r, c) = a.at(indices[r], c);
    }
    return out;
}

std::vector<double> column(const Matrix& a, std::size_t c) {
    if (c >= a.cols()) {
        throw ArgumentError("column: index out of range");
    }
    std::vector<double> v(a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) v[r] = a.at(r, c);
    return v;
}

bool approx_equal(const Matrix& a, const Matrix& b, double tol) {
    if (!a.same_shape(b)) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a.data()[i] - b.data()[i]) > tol) return false;
    }
    return true;
}

bool exactly_equal(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.data()[i] != b.data()[i]) return false;
    }
    return true;
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double v = std::abs(a.data()[i]);
        if (v > m) m = v;
    }
    return m;
}

} // namespace emoladder
