#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gnnanatomy {

/// Row-major matrix of 64-bit reals. Node embeddings, weights and gradients
/// all live in this type.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void fill(double value);
  bool all_finite() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// a * b
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// a^T * b
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
// a * b^T
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);

void add_inplace(DenseMatrix& dst, const DenseMatrix& src);
// Adds the 1 x cols bias to every row.
void add_row_bias(DenseMatrix& m, const DenseMatrix& bias);
// Column sums as a 1 x cols matrix.
DenseMatrix column_sums(const DenseMatrix& m);

void relu_inplace(DenseMatrix& m);
// Zeroes grad wherever the pre-activation was <= 0.
void relu_backward_inplace(DenseMatrix& grad, const DenseMatrix& pre_activation);

DenseMatrix gather_rows(const DenseMatrix& m, std::span<const std::size_t> rows);

}  // namespace gnnanatomy
