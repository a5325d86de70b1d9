// Copyright 2026 The ulab Authors.
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

#include "ulab/scheduler.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

namespace ulab {

void ParallelFor(std::size_t count, std::size_t parallelism,
                 const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  const std::size_t workers = std::clamp<std::size_t>(parallelism, 1, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      body(i);
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
}

std::size_t ResolveThreads(std::optional<long> flag) {
  if (flag.has_value()) {
    if (*flag < 1) throw UsageError("--threads must be at least 1");
    return static_cast<std::size_t>(*flag);
  }
  if (const char* env = std::getenv("ULAB_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) {
      throw UsageError("ULAB_THREADS must be a positive integer");
    }
    return static_cast<std::size_t>(n);
  }
  return 1;
}

}  // namespace ulab
