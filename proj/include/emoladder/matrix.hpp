#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace emoladder {

// Dense row-major matrix of doubles. The single numeric carrier of the
// project: features, activations, parameters and gradients are all Matrix.
// Instances are plain values; operations return new matrices and never
// alias their inputs.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    static Matrix identity(std::size_t n);
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    const std::vector<double>& values() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    std::string shape_str() const;

    bool all_finite() const;
    // Throws NumericError mentioning `context` if any entry is NaN/Inf.
    void require_finite(const std::string& context) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Standard matrix product; a.cols must equal b.rows.
Matrix matmul(const Matrix& a, const Matrix& b);

// Elementwise product of same-shape matrices.
Matrix hadamard(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);

// y[r][c] = a[r][c] + row[0][c]; row must be 1 x a.cols.
Matrix add_row_broadcast(const Matrix& a, const Matrix& row);

// 1 x cols sums/means over rows.
Matrix col_sum(const Matrix& a);
Matrix col_mean(const Matrix& a);

// Gather of whole rows / single column.
Matrix take_rows(const Matrix& a, const std::vector<std::size_t>& indices);
std::vector<double> column(const Matrix& a, std::size_t c);

bool approx_equal(const Matrix& a, const Matrix& b, double tol);
bool exactly_equal(const Matrix& a, const Matrix& b);

double max_abs(const Matrix& a);

} // namespace emoladder
