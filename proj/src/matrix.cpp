#include "alphadrop/matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace alphadrop {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw std::invalid_argument("Matrix: data length " + std::to_string(data_.size()) +
                                    " != rows*cols " + std::to_string(rows_ * cols_));
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw std::invalid_argument("Matrix: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool Matrix::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

namespace {

void check_inner(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw std::invalid_argument(std::string(what) + ": inner dimensions " +
                                    std::to_string(a) + " vs " + std::to_string(b));
    }
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_inner(a.cols(), b.rows(), "matmul");
    Matrix out(a.rows(), b.cols());
    const std::size_t M = a.rows(), K = a.cols(), L = b.cols();
    // i-k-j order keeps the inner loop contiguous in b and out.
    for (std::size_t i = 0; i < M; ++i) {
        double* orow = out.data() + i * L;
        const double* arow = a.data() + i * K;
        for (std::size_t k = 0; k < K; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.data() + k * L;
            for (std::size_t j = 0; j < L; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    check_inner(a.rows(), b.rows(), "matmul_tn");
    Matrix out(a.cols(), b.cols());
    const std::size_t M = a.rows(), K = a.cols(), L = b.cols();
    for (std::size_t i = 0; i < M; ++i) {
        const double* arow = a.data() + i * K;
        const double* brow = b.data() + i * L;
        for (std::size_t k = 0; k < K; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            double* orow = out.data() + k * L;
            for (std::size_t j = 0; j < L; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    check_inner(a.cols(), b.cols(), "matmul_nt");
    Matrix out(a.rows(), b.rows());
    const std::size_t M = a.rows(), K = a.cols(), N = b.rows();
    for (std::size_t i = 0; i < M; ++i) {
        const double* arow = a.data() + i * K;
        for (std::size_t j = 0; j < N; ++j) {
            const double* brow = b.data() + j * K;
            double s = 0.0;
            for (std::size_t k = 0; k < K; ++k) s += arow[k] * brow[k];
            out(i, j) = s;
        }
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (!a.same_shape(b)) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

}  // namespace

Matrix hadamard(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "hadamard");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.data()[i];
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "add");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "subtract");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
    return out;
}

Matrix scale(const Matrix& a, double s) {
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= s;
    return out;
}

void add_row_vector(Matrix& a, std::span<const double> v) {
    if (v.size() != a.cols()) throw std::invalid_argument("add_row_vector: length mismatch");
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* row = a.data() + i * a.cols();
        for (std::size_t j = 0; j < a.cols(); ++j) row[j] += v[j];
    }
}

std::vector<double> column_sums(const Matrix& a) {
    std::vector<double> out(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* row = a.data() + i * a.cols();
        for (std::size_t j = 0; j < a.cols(); ++j) out[j] += row[j];
    }
    return out;
}

}  // namespace alphadrop
