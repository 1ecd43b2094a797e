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

#include "normlab/logging.hpp"

#include <atomic>
#include <cstdio>

namespace normlab {

namespace {
std::atomic<bool> g_quiet{false};
}

void warn(const std::string& msg) {
  if (!g_quiet.load(std::memory_order_relaxed))
    std::fprintf(stderr, "[normlab] warning: %s\n", msg.c_str());
}

void info(const std::string& msg) {
  if (!g_quiet.load(std::memory_order_relaxed))
    std::fprintf(stderr, "[normlab] %s\n", msg.c_str());
}

void set_quiet_logging(bool quiet) {
  g_quiet.store(quiet, std::memory_order_relaxed);
}

}  // namespace normlab
