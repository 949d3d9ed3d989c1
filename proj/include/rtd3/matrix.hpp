#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rtd3 {

// Non-owning row-major views. Parameter blocks live in one flat buffer per
// network and are handed to layers through these.
struct ConstMatrixView {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  const double* row(std::size_t r) const { return data + r * cols; }
  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
};

struct MatrixView {
  double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  double* row(std::size_t r) const { return data + r * cols; }
  double& operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
  operator ConstMatrixView() const { return {data, rows, cols}; }
};

// Dense 64-bit row-major matrix with value semantics.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  MatrixView view() { return {data_.data(), rows_, cols_}; }
  ConstMatrixView view() const { return {data_.data(), rows_, cols_}; }
  operator ConstMatrixView() const { return view(); }

  // Resizes, zero-filling every element.
  void assign_zero(std::size_t rows, std::size_t cols);
  void fill(double v);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// y = x W^T (+ bias per row). x: (n x in), W: (out x in).
Matrix affine(ConstMatrixView x, ConstMatrixView weight,
              std::span<const double> bias);

// Rows [first, first + count) of m as a view.
ConstMatrixView row_block(ConstMatrixView m, std::size_t first,
                          std::size_t count);
MatrixView row_block(MatrixView m, std::size_t first, std::size_t count);

// Horizontal concatenation [a | b]; both must have the same row count.
Matrix hconcat(ConstMatrixView a, ConstMatrixView b);

bool all_finite(std::span<const double> v);
double max_abs_diff(ConstMatrixView a, ConstMatrixView b);

}  // namespace rtd3
