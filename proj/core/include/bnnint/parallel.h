/*
 * Copyright 2026 The bnnint Authors.
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


// Index-parallel loops over a small worker pool.

#ifndef BNNINT_PARALLEL_H_
#define BNNINT_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace bnnint {

// Environment variable holding the worker count.
inline constexpr char kWorkersEnv[] = "BNNINT_WORKERS";

// BNNINT_WORKERS if set to a positive integer, else the hardware concurrency.
size_t DefaultWorkerCount();

// Calls body(i) for every i in [0, n). Each index runs exactly once; results
// must go to per-index slots so the outcome does not depend on scheduling.
// If any call throws, the exception from the lowest failing index is
// rethrown after all workers finish. workers == 0 means DefaultWorkerCount().
void ParallelFor(size_t n, const std::function<void(size_t)>& body,
                 size_t workers = 0);

}  // namespace bnnint

#endif  // BNNINT_PARALLEL_H_
