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

#ifndef GRADREV_CLI_HPP
#define GRADREV_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace gradrev {

/// Runs one CLI invocation. `args` excludes the program name. Exit codes:
/// 0 success, 1 runtime or check failure, 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace gradrev

#endif  // GRADREV_CLI_HPP
