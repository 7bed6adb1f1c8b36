#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace alphadrop {

// Dense row-major 2-D array of doubles. The only tensor type in the
// library; activations, weights and gradients are all Matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    bool all_finite() const;

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// a (M x K) times b (K x L) -> (M x L). Throws std::invalid_argument on
// dimension mismatch.
Matrix matmul(const Matrix& a, const Matrix& b);

// aT (K x M becomes M x K) times b: matmul(transpose(a), b) without the copy.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

// a times bT: matmul(a, transpose(b)) without the copy.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);

// Adds the length-cols vector to every row in place.
void add_row_vector(Matrix& a, std::span<const double> v);

// Sum over rows -> vector of length cols.
std::vector<double> column_sums(const Matrix& a);

}  // namespace alphadrop
