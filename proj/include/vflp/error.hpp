/*
 * Copyright 2026 The vflp Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef VFLP_ERROR_HPP_
#define VFLP_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace vflp {

// Bad input: wrong dimensions, non-finite entries, malformed files.
class InvalidArgument : public std::invalid_argument {
 public:
  explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

// An iterative solver hit its cap or a numerical routine broke down. The
// message carries the residual/gap diagnostics at the point of failure.
class SolverFailure : public std::runtime_error {
 public:
  explicit SolverFailure(const std::string& what) : std::runtime_error(what) {}
};

// Experiment configuration problems (unknown method names, missing seed...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vflp

#endif  // VFLP_ERROR_HPP_
