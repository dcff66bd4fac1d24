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

#ifndef MIASCHED_ERRORS_HPP
#define MIASCHED_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace miasched {

// A caller broke a documented precondition. These indicate bugs in the
// calling code, not recoverable runtime conditions.
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// A sample-path queue bound was exceeded. The bound is deterministic, so a
// violation means the controller itself is broken; the message carries a dump
// of the offending frame.
class QueueBoundViolation : public std::logic_error {
 public:
  explicit QueueBoundViolation(const std::string& what) : std::logic_error(what) {}
};

// Brute-force enumeration would exceed the configured policy-count guard.
class EnumerationGuardError : public std::runtime_error {
 public:
  explicit EnumerationGuardError(const std::string& what) : std::runtime_error(what) {}
};

// Scenario file could not be read or parsed into a model + config.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace miasched

#endif  // MIASCHED_ERRORS_HPP
