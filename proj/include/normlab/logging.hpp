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

#ifndef NORMLAB_LOGGING_HPP_
#define NORMLAB_LOGGING_HPP_

#include <string>

namespace normlab {

/// Write a warning line to stderr (suppressed when quiet mode is on).
void warn(const std::string& msg);

/// Write an info line to stderr (suppressed when quiet mode is on).
void info(const std::string& msg);

void set_quiet_logging(bool quiet);

}  // namespace normlab

#endif  // NORMLAB_LOGGING_HPP_
