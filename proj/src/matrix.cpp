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

#include "gradrev/matrix.hpp"

#include <cmath>
#include <cstring>
#include <utility>

#include "gradrev/errors.hpp"

namespace gradrev {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols,
                         std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("DenseMatrix: data length " +
                         std::to_string(data_.size()) + " != " +
                         std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

DenseMatrix DenseMatrix::row(const std::vector<double>& values) {
  return DenseMatrix(1, values.size(), values);
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

bool DenseMatrix::bit_equal(const DenseMatrix& other) const {
  if (!same_shape(other)) return false;
  if (data_.empty()) return true;
  return std::memcmp(data_.data(), other.data_.data(),
                     data_.size() * sizeof(double)) == 0;
}

bool DenseMatrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

DenseMatrix DenseMatrix::gather_rows(const std::vector<std::size_t>& idx) const {
  DenseMatrix out(idx.size(), cols_);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= rows_) {
      throw DimensionError("gather_rows: index " + std::to_string(idx[i]) +
                           " out of " + std::to_string(rows_) + " rows");
    }
    std::memcpy(out.row_ptr(i), row_ptr(idx[i]), cols_ * sizeof(double));
  }
  return out;
}

namespace {

void require(bool ok, const std::string& context, const std::string& detail) {
  if (!ok) throw DimensionError(context + ": " + detail);
}

std::string shape_str(const DenseMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b,
                   const std::string& context) {
  require(a.cols() == b.rows(), context,
          "cannot multiply " + shape_str(a) + " by " + shape_str(b));
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.row_ptr(k);
      double* orow = out.row_ptr(i);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b,
                        const std::string& context) {
  require(a.rows() == b.rows(), context,
          "cannot multiply " + shape_str(a) + "^T by " + shape_str(b));
  DenseMatrix out(a.cols(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* arow = a.row_ptr(r);
    const double* brow = b.row_ptr(r);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double ari = arow[i];
      if (ari == 0.0) continue;
      double* orow = out.row_ptr(i);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += ari * brow[j];
    }
  }
  return out;
}

DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b,
                        const std::string& context) {
  require(a.cols() == b.cols(), context,
          "cannot multiply " + shape_str(a) + " by " + shape_str(b) + "^T");
  DenseMatrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* arow = a.row_ptr(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* brow = b.row_ptr(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += arow[k] * brow[k];
      out.at(i, j) = acc;
    }
  }
  return out;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out.at(j, i) = a.at(i, j);
  }
  return out;
}

void add_in_place(DenseMatrix& a, const DenseMatrix& b) {
  require(a.same_shape(b), "add_in_place",
          shape_str(a) + " vs " + shape_str(b));
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += b.data()[i];
}

void scale_in_place(DenseMatrix& a, double s) {
  for (double& v : a.data()) v *= s;
}

void add_row_broadcast(DenseMatrix& a, const std::vector<double>& bias) {
  require(bias.size() == a.cols(), "add_row_broadcast",
          "bias length " + std::to_string(bias.size()) + " vs " +
              std::to_string(a.cols()) + " cols");
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* row = a.row_ptr(i);
    for (std::size_t j = 0; j < a.cols(); ++j) row[j] += bias[j];
  }
}

std::vector<double> column_sums(const DenseMatrix& a) {
  std::vector<double> sums(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* row = a.row_ptr(i);
    for (std::size_t j = 0; j < a.cols(); ++j) sums[j] += row[j];
  }
  return sums;
}

double max_abs(const DenseMatrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::fabs(v));
  return m;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  if (!a.same_shape(b)) {
    throw DimensionError("max_abs_diff: " + shape_str(a) + " vs " +
                         shape_str(b));
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
  }
  return m;
}

DenseMatrix lsq_solve(const DenseMatrix& a, const DenseMatrix& b,
                      std::size_t* rank) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n) throw FitError("lsq_solve: system is underdetermined");
  if (b.rows() != m) {
    throw DimensionError("lsq_solve: rhs has " + std::to_string(b.rows()) +
                         " rows, expected " + std::to_string(m));
  }

  DenseMatrix r = a;
  DenseMatrix qtb = b;
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 0; j < n; ++j) perm[j] = j;

  double max_col_norm = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += r.at(i, j) * r.at(i, j);
    max_col_norm = std::max(max_col_norm, std::sqrt(s));
  }
  const double tol = std::max(1e-10 * max_col_norm, 1e-14);

  // Column-pivoted Householder QR, applying each reflector to every
  // right-hand side as it is built.
  std::size_t effective_rank = 0;
  for (std::size_t k = 0; k < n; ++k) {
    // Pivot: bring the column with the largest remaining norm to slot k.
    std::size_t best = k;
    double best_norm = -1.0;
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += r.at(i, j) * r.at(i, j);
      if (s > best_norm) {
        best_norm = s;
        best = j;
      }
    }
    if (best != k) {
      for (std::size_t i = 0; i < m; ++i) std::swap(r.at(i, k), r.at(i, best));
      std::swap(perm[k], perm[best]);
    }
    const double col_norm = std::sqrt(std::max(0.0, best_norm));
    if (col_norm <= tol) break;  // remaining columns are numerically null
    effective_rank = k + 1;

    const double alpha = (r.at(k, k) >= 0.0) ? -col_norm : col_norm;
    std::vector<double> v(m - k, 0.0);
    v[0] = r.at(k, k) - alpha;
    for (std::size_t i = k + 1; i < m; ++i) v[i - k] = r.at(i, k);
    double vnorm2 = 0.0;
    for (double x : v) vnorm2 += x * x;
    if (vnorm2 == 0.0) continue;
    for (std::size_t j = k; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < m; ++i) dot += v[i - k] * r.at(i, j);
      const double f = 2.0 * dot / vnorm2;
      for (std::size_t i = k; i < m; ++i) r.at(i, j) -= f * v[i - k];
    }
    for (std::size_t j = 0; j < qtb.cols(); ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < m; ++i) dot += v[i - k] * qtb.at(i, j);
      const double f = 2.0 * dot / vnorm2;
      for (std::size_t i = k; i < m; ++i) qtb.at(i, j) -= f * v[i - k];
    }
  }
  if (rank != nullptr) *rank = effective_rank;
  if (effective_rank == 0) {
    throw FitError("lsq_solve: design matrix is numerically zero");
  }

  // Back substitution over the pivoted leading block; dropped columns keep
  // a zero coefficient.
  DenseMatrix x(n, b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t ii = effective_rank; ii-- > 0;) {
      double acc = qtb.at(ii, j);
      for (std::size_t kk = ii + 1; kk < effective_rank; ++kk) {
        acc -= r.at(ii, kk) * x.at(perm[kk], j);
      }
      x.at(perm[ii], j) = acc / r.at(ii, ii);
    }
  }
  return x;
}

}  // namespace gradrev
