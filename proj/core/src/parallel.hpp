// Copyright 2026 The Segfuse Authors.
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

#ifndef SEGFUSE_SRC_PARALLEL_HPP_
#define SEGFUSE_SRC_PARALLEL_HPP_

#include <cstddef>

#include <tbb/blocked_range.h>
#include <tbb/global_control.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include "segfuse/fusion.hpp"

namespace segfuse::internal {

// Calls body(i) for i in [0, n). Work is spread over exec.threads workers
// in a private arena; with one thread it runs inline in index order.
template <typename Body>
void ParallelFor(std::size_t n, const ExecutionOptions& exec, Body&& body) {
  if (exec.threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  // The requested worker count is honoured even above the core count;
  // results do not depend on it.
  tbb::global_control limit(tbb::global_control::max_allowed_parallelism,
                            static_cast<std::size_t>(exec.threads));
  tbb::task_arena arena(exec.threads);
  arena.execute([&] {
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n),
                      [&](const tbb::blocked_range<std::size_t>& r) {
                        for (std::size_t i = r.begin(); i < r.end(); ++i) {
                          body(i);
                        }
                      });
  });
}

}  // namespace segfuse::internal

#endif  // SEGFUSE_SRC_PARALLEL_HPP_
