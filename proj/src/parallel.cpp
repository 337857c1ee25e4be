// Copyright 2026 The synther Authors.
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

#include "synther/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace synther {

unsigned worker_threads(unsigned requested) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SYNTHER_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0) return std::min<unsigned>(static_cast<unsigned>(cap), hw);
  }
  return hw;
}

}  // namespace synther
