// Copyright 2026 the miasched authors
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

#ifndef MIASCHED_CLI_HPP
#define MIASCHED_CLI_HPP

namespace miasched {

inline constexpr const char* kToolVersion = "0.1.0";

// Entry point shared by the binary and the tests. Exit codes: 0 success,
// 1 validation or run failure, 2 usage error.
int cli_run(int argc, const char* const* argv);

}  // namespace miasched

#endif  // MIASCHED_CLI_HPP
