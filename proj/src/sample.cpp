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

#include "gradrev/sample.hpp"

#include <cstring>

#include "gradrev/errors.hpp"

namespace gradrev {

DenseMatrix stack_inputs(const std::vector<Sample>& samples) {
  if (samples.empty()) return DenseMatrix();
  const std::size_t dim = samples.front().input.size();
  DenseMatrix out(samples.size(), dim);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].input.size() != dim) {
      throw DimensionError("stack_inputs: sample '" + samples[i].id +
                           "' has dim " +
                           std::to_string(samples[i].input.size()) +
                           ", expected " + std::to_string(dim));
    }
    std::memcpy(out.row_ptr(i), samples[i].input.data(), dim * sizeof(double));
  }
  return out;
}

const char* domain_name(Domain d) {
  return d == Domain::kSource ? "source" : "target";
}

const char* origin_name(Origin o) {
  return o == Origin::kReal ? "real" : "virtual";
}

}  // namespace gradrev
