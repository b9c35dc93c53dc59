// Copyright 2026 The gradrev Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GRADREV_MATRIX_HPP
#define GRADREV_MATRIX_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace gradrev {

/// Dense row-major matrix of doubles. The one carrier used for batches,
/// activations, gradients, parameters and images-as-arrays.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  /// 1 x n row vector from an initializer-style vector.
  static DenseMatrix row(const std::vector<double>& values);
  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
  const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const DenseMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  /// Bitwise equality of shape and every entry.
  bool bit_equal(const DenseMatrix& other) const;

  bool all_finite() const;

  /// Rows of this matrix selected by index, in the given order.
  DenseMatrix gather_rows(const std::vector<std::size_t>& idx) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// a * b. Throws DimensionError on mismatch; `context` names the caller.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b,
                   const std::string& context = "matmul");
/// transpose(a) * b without forming the transpose.
DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b,
                        const std::string& context = "matmul_at_b");
/// a * transpose(b) without forming the transpose.
DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b,
                        const std::string& context = "matmul_a_bt");

DenseMatrix transpose(const DenseMatrix& a);
void add_in_place(DenseMatrix& a, const DenseMatrix& b);
void scale_in_place(DenseMatrix& a, double s);
/// Adds `bias` (length == a.cols()) to every row of `a`.
void add_row_broadcast(DenseMatrix& a, const std::vector<double>& bias);
/// Column sums as a vector of length a.cols().
std::vector<double> column_sums(const DenseMatrix& a);

double max_abs(const DenseMatrix& a);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

/// Least-squares solve of A x = b via column-pivoted Householder QR, for
/// tall-thin A (rows >= cols). Columns whose pivot falls below the rank
/// tolerance are dropped and their solution entries set to zero (the basic
/// solution). Several right-hand sides are solved against one
/// factorization: b has A.rows() rows and one column per system; the result
/// is cols x nrhs. When `rank` is non-null it receives the numerical rank.
DenseMatrix lsq_solve(const DenseMatrix& a, const DenseMatrix& b,
                      std::size_t* rank = nullptr);

}  // namespace gradrev

#endif  // GRADREV_MATRIX_HPP
