#include "rtd3/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rtd3/error.hpp"
#include "rtd3/kernels.hpp"

namespace rtd3 {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols) {
    throw ContractViolation("Matrix: " + std::to_string(data_.size()) +
                            " values for a " + std::to_string(rows) + "x" +
                            std::to_string(cols) + " matrix");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::assign_zero(std::size_t rows, std::size_t cols) {
  rows_ = rows;
  cols_ = cols;
  data_.assign(rows * cols, 0.0);
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix affine(ConstMatrixView x, ConstMatrixView weight,
              std::span<const double> bias) {
  if (x.cols != weight.cols) {
    throw ContractViolation("affine: input has " + std::to_string(x.cols) +
                            " columns, weight expects " +
                            std::to_string(weight.cols));
  }
  if (!bias.empty() && bias.size() != weight.rows) {
    throw ContractViolation("affine: bias length mismatch");
  }
  Matrix y(x.rows, weight.rows);
  if (!bias.empty()) {
    for (std::size_t r = 0; r < x.rows; ++r) {
      std::copy(bias.begin(), bias.end(), y.row(r).begin());
    }
  }
  kernels::gemm_nt(x.data, weight.data, y.data(), x.rows, weight.rows, x.cols,
                   !bias.empty());
  return y;
}

ConstMatrixView row_block(ConstMatrixView m, std::size_t first,
                          std::size_t count) {
  return {m.data + first * m.cols, count, m.cols};
}

MatrixView row_block(MatrixView m, std::size_t first, std::size_t count) {
  return {m.data + first * m.cols, count, m.cols};
}

Matrix hconcat(ConstMatrixView a, ConstMatrixView b) {
  if (a.rows != b.rows) throw ContractViolation("hconcat: row mismatch");
  Matrix out(a.rows, a.cols + b.cols);
  for (std::size_t r = 0; r < a.rows; ++r) {
    std::copy(a.row(r), a.row(r) + a.cols, out.row(r).begin());
    std::copy(b.row(r), b.row(r) + b.cols, out.row(r).begin() + a.cols);
  }
  return out;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

double max_abs_diff(ConstMatrixView a, ConstMatrixView b) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw ContractViolation("max_abs_diff: shape mismatch");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a.data[i] - b.data[i]));
  }
  return worst;
}

}  // namespace rtd3
