#include "scarcegan/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scarcegan {

std::string Matrix::shape_str() const {
    return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
}

static void check_mul(const Matrix& a, const Matrix& b, std::size_t inner_a, std::size_t inner_b,
                      const char* what) {
    if (inner_a != inner_b) {
        throw std::invalid_argument(std::string(what) + ": inner dimensions differ, " +
                                    a.shape_str() + " vs " + b.shape_str());
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_mul(a, b, a.cols, b.rows, "matmul");
    Matrix c(a.rows, b.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ai = a.row_ptr(i);
        double* ci = c.row_ptr(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = ai[k];
            if (aik == 0.0) continue;
            const double* bk = b.row_ptr(k);
            for (std::size_t j = 0; j < b.cols; ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    check_mul(a, b, a.rows, b.rows, "matmul_at_b");
    Matrix c(a.cols, b.cols, 0.0);
    for (std::size_t k = 0; k < a.rows; ++k) {
        const double* ak = a.row_ptr(k);
        const double* bk = b.row_ptr(k);
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double aki = ak[i];
            if (aki == 0.0) continue;
            double* ci = c.row_ptr(i);
            for (std::size_t j = 0; j < b.cols; ++j) ci[j] += aki * bk[j];
        }
    }
    return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    check_mul(a, b, a.cols, b.cols, "matmul_a_bt");
    Matrix c(a.rows, b.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ai = a.row_ptr(i);
        double* ci = c.row_ptr(i);
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* bj = b.row_ptr(j);
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) s += ai[k] * bj[k];
            ci[j] = s;
        }
    }
    return c;
}

void add_rowwise(Matrix& m, const std::vector<double>& bias) {
    if (bias.size() != m.cols) {
        throw std::invalid_argument("add_rowwise: bias width " + std::to_string(bias.size()) +
                                    " does not match " + m.shape_str());
    }
    for (std::size_t i = 0; i < m.rows; ++i) {
        double* mi = m.row_ptr(i);
        for (std::size_t j = 0; j < m.cols; ++j) mi[j] += bias[j];
    }
}

std::vector<double> col_sum(const Matrix& m) {
    std::vector<double> s(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* mi = m.row_ptr(i);
        for (std::size_t j = 0; j < m.cols; ++j) s[j] += mi[j];
    }
    return s;
}

std::vector<double> col_mean(const Matrix& m) {
    std::vector<double> s = col_sum(m);
    if (m.rows > 0) {
        for (double& v : s) v /= static_cast<double>(m.rows);
    }
    return s;
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
    return t;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols) {
        throw std::invalid_argument("subtract: shape mismatch " + a.shape_str() + " vs " +
                                    b.shape_str());
    }
    Matrix c(a.rows, a.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) c.data[i] = a.data[i] - b.data[i];
    return c;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols) {
        throw std::invalid_argument("hadamard: shape mismatch " + a.shape_str() + " vs " +
                                    b.shape_str());
    }
    Matrix c(a.rows, a.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) c.data[i] = a.data[i] * b.data[i];
    return c;
}

void scale_inplace(Matrix& m, double s) {
    for (double& v : m.data) v *= s;
}

void add_inplace(Matrix& dst, const Matrix& src) {
    if (dst.rows != src.rows || dst.cols != src.cols) {
        throw std::invalid_argument("add_inplace: shape mismatch " + dst.shape_str() + " vs " +
                                    src.shape_str());
    }
    for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
}

bool all_finite(const Matrix& m) {
    for (double v : m.data)
        if (!std::isfinite(v)) return false;
    return true;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols) {
        throw std::invalid_argument("max_abs_diff: shape mismatch " + a.shape_str() + " vs " +
                                    b.shape_str());
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& idx) {
    Matrix out(idx.size(), m.cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= m.rows) throw std::out_of_range("take_rows: row index out of range");
        const double* src = m.row_ptr(idx[i]);
        double* dst = out.row_ptr(i);
        for (std::size_t j = 0; j < m.cols; ++j) dst[j] = src[j];
    }
    return out;
}

void append_rows(Matrix& dst, const Matrix& src) {
    if (dst.empty() && dst.rows == 0) {
        dst = src;
        return;
    }
    if (dst.cols != src.cols) {
        throw std::invalid_argument("append_rows: width mismatch " + dst.shape_str() + " vs " +
                                    src.shape_str());
    }
    dst.data.insert(dst.data.end(), src.data.begin(), src.data.end());
    dst.rows += src.rows;
}

}  // namespace scarcegan
