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

#ifndef ULAB_SCHEDULER_H_
#define ULAB_SCHEDULER_H_

#include <cstddef>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ulab/errors.h"

namespace ulab {

// Runs body(0) ... body(count - 1) on up to `parallelism` threads. Jobs are
// claimed in index order from a shared counter; body must not throw.
void ParallelFor(std::size_t count, std::size_t parallelism,
                 const std::function<void(std::size_t)>& body);

template <typename T>
struct JobOutcome {
  std::optional<T> value;
  std::string error;
  bool diverged = false;

  bool ok() const { return value.has_value(); }
};

// Executes independent jobs keyed by index. Results land in their own slot,
// so the returned vector does not depend on completion order or thread
// count. An exception in one job is recorded in that slot only.
template <typename T, typename Job>
std::vector<JobOutcome<T>> ScheduleJobs(std::size_t count, Job&& job,
                                        std::size_t parallelism) {
  std::vector<JobOutcome<T>> out(count);
  ParallelFor(count, parallelism, [&](std::size_t i) {
    try {
      out[i].value.emplace(job(i));
    } catch (const NumericDivergenceError& e) {
      out[i].error = e.what();
      out[i].diverged = true;
    } catch (const std::exception& e) {
      out[i].error = e.what();
    } catch (...) {
      out[i].error = "unknown failure";
    }
  });
  return out;
}

// --threads value if given, else ULAB_THREADS, else 1.
std::size_t ResolveThreads(std::optional<long> flag);

}  // namespace ulab

#endif  // ULAB_SCHEDULER_H_
