// Copyright 2026 The normlab Authors
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

#ifndef NORMLAB_ERRORS_HPP_
#define NORMLAB_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace normlab {

/// Base class for all normlab errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Shape or size mismatch between tensors, kernels, or parameter vectors.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

/// Invalid or inconsistent configuration value.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Layer state misuse, e.g. eval forward before any statistics exist.
class StateError : public Error {
 public:
  explicit StateError(const std::string& msg) : Error(msg) {}
};

/// API contract violation, e.g. backward called with a stale forward cache.
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& msg) : Error(msg) {}
};

/// Malformed file content (bad record length, bad magic, truncated data).
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& msg) : Error(msg) {}
};

/// Filesystem failure; message carries the offending path.
class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace normlab

#endif  // NORMLAB_ERRORS_HPP_
