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

#include <doctest.h>

#include "gradrev/errors.hpp"
#include "gradrev/rng.hpp"

using namespace gradrev;

TEST_CASE("matmul against hand filled entries") {
  DenseMatrix a(2, 3, {1, 2, 3, 4, 5, 6});
  DenseMatrix b(3, 2, {7, 8, 9, 10, 11, 12});
  const DenseMatrix c = matmul(a, b);
  CHECK(c.rows() == 2);
  CHECK(c.cols() == 2);
  CHECK(c.at(0, 0) == 58.0);
  CHECK(c.at(0, 1) == 64.0);
  CHECK(c.at(1, 0) == 139.0);
  CHECK(c.at(1, 1) == 154.0);
}

TEST_CASE("matmul shape mismatch names the context") {
  DenseMatrix a(2, 3);
  DenseMatrix b(2, 3);
  CHECK_THROWS_AS(matmul(a, b, "forward layer 1"), DimensionError);
  try {
    matmul(a, b, "forward layer 1");
  } catch (const DimensionError& e) {
    CHECK(std::string(e.what()).find("forward layer 1") != std::string::npos);
  }
}

TEST_CASE("transposed products agree with explicit transpose") {
  Rng rng(3);
  DenseMatrix a(4, 3);
  DenseMatrix b(4, 5);
  for (double& v : a.data()) v = rng.normal();
  for (double& v : b.data()) v = rng.normal();
  CHECK(max_abs_diff(matmul_at_b(a, b), matmul(transpose(a), b)) < 1e-15);

  DenseMatrix c(5, 3);
  for (double& v : c.data()) v = rng.normal();
  CHECK(max_abs_diff(matmul_a_bt(a, c), matmul(a, transpose(c))) < 1e-15);
}

TEST_CASE("gather_rows picks rows in order") {
  DenseMatrix a(3, 2, {1, 2, 3, 4, 5, 6});
  const DenseMatrix g = a.gather_rows({2, 0});
  CHECK(g.at(0, 0) == 5.0);
  CHECK(g.at(1, 1) == 2.0);
  CHECK_THROWS_AS(a.gather_rows({3}), DimensionError);
}

TEST_CASE("bit_equal detects the last bit") {
  DenseMatrix a(1, 2, {1.0, 2.0});
  DenseMatrix b = a;
  CHECK(a.bit_equal(b));
  b.at(0, 1) = std::nextafter(2.0, 3.0);
  CHECK(!a.bit_equal(b));
}

TEST_CASE("lsq_solve recovers a planted solution") {
  Rng rng(11);
  DenseMatrix a(9, 4);
  for (double& v : a.data()) v = rng.normal();
  DenseMatrix truth(4, 2);
  for (double& v : truth.data()) v = rng.uniform(-5.0, 5.0);
  const DenseMatrix b = matmul(a, truth);
  const DenseMatrix x = lsq_solve(a, b);
  CHECK(max_abs_diff(x, truth) < 1e-10);
}

TEST_CASE("lsq_solve minimizes the residual against perturbation probes") {
  Rng rng(12);
  DenseMatrix a(9, 3);
  DenseMatrix b(9, 1);
  for (double& v : a.data()) v = rng.normal();
  for (double& v : b.data()) v = rng.normal();
  const DenseMatrix x = lsq_solve(a, b);

  auto residual = [&](const DenseMatrix& sol) {
    const DenseMatrix pred = matmul(a, sol);
    double s = 0.0;
    for (std::size_t i = 0; i < pred.rows(); ++i) {
      const double d = pred.at(i, 0) - b.at(i, 0);
      s += d * d;
    }
    return s;
  };
  const double base = residual(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (double delta : {1e-4, -1e-4}) {
      DenseMatrix probe = x;
      probe.data()[i] += delta;
      CHECK(residual(probe) >= base - 1e-12);
    }
  }
}

TEST_CASE("lsq_solve zeroes the coefficient of a null column") {
  // Column 2 is identically zero: a basic solution must not use it.
  DenseMatrix a(6, 3);
  Rng rng(13);
  for (std::size_t i = 0; i < 6; ++i) {
    a.at(i, 0) = rng.normal();
    a.at(i, 1) = rng.normal();
    a.at(i, 2) = 0.0;
  }
  DenseMatrix truth(3, 1, {2.0, -1.0, 0.0});
  const DenseMatrix b = matmul(a, truth);
  std::size_t rank = 0;
  const DenseMatrix x = lsq_solve(a, b, &rank);
  CHECK(rank == 2);
  CHECK(x.at(2, 0) == 0.0);
  CHECK(x.at(0, 0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(x.at(1, 0) == doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("lsq_solve rejects underdetermined systems") {
  CHECK_THROWS_AS(lsq_solve(DenseMatrix(2, 4), DenseMatrix(2, 1)), FitError);
}
