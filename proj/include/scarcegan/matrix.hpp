#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace scarcegan {

// Dense row-major matrix of doubles. Rows are samples, columns are features.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    static Matrix zeros(std::size_t r, std::size_t c) { return Matrix(r, c, 0.0); }

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row_ptr(std::size_t i) { return data.data() + i * cols; }
    const double* row_ptr(std::size_t i) const { return data.data() + i * cols; }

    bool empty() const { return rows == 0 || cols == 0; }

    std::string shape_str() const;
};

// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A^T * B
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
// C = A * B^T
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

void add_rowwise(Matrix& m, const std::vector<double>& bias);
std::vector<double> col_sum(const Matrix& m);
std::vector<double> col_mean(const Matrix& m);
Matrix transpose(const Matrix& m);

// out = a - b, shapes must match
Matrix subtract(const Matrix& a, const Matrix& b);
// elementwise product
Matrix hadamard(const Matrix& a, const Matrix& b);
void scale_inplace(Matrix& m, double s);
void add_inplace(Matrix& dst, const Matrix& src);

bool all_finite(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);

// selects the given rows of m, in order
Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& idx);
// appends the rows of src to dst (dst adopts src's width when empty)
void append_rows(Matrix& dst, const Matrix& src);

}  // namespace scarcegan
