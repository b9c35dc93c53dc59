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

#ifndef GRADREV_SAMPLE_HPP
#define GRADREV_SAMPLE_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gradrev/matrix.hpp"

namespace gradrev {

enum class Domain { kSource, kTarget };
enum class Origin { kReal, kVirtual };

/// One training or evaluation item. Image samples carry their pixels
/// flattened into `input`.
struct Sample {
  std::string id;
  std::vector<double> input;
  std::optional<std::size_t> label;
  Domain domain = Domain::kSource;
  Origin origin = Origin::kReal;
  std::string origin_id;  // gallery sample a virtual one was synthesized from
};

/// Stacks sample inputs into a batch matrix (one row per sample).
DenseMatrix stack_inputs(const std::vector<Sample>& samples);

const char* domain_name(Domain d);
const char* origin_name(Origin o);

}  // namespace gradrev

#endif  // GRADREV_SAMPLE_HPP
