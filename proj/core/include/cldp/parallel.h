// Copyright 2026 The CLDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal fork-join helper for embarrassingly parallel loops.

#ifndef CLDP_PARALLEL_H_
#define CLDP_PARALLEL_H_

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace cldp {

// Worker count from CLDP_THREADS, else the hardware concurrency (at least 1).
int default_threads();

// Calls body(i) for every i in [0, count) on up to `threads` workers
// (threads <= 0 means default_threads()). Indices are claimed dynamically,
// so body must not depend on execution order. The first exception thrown by
// any body is rethrown on the calling thread after all workers stop.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace cldp

#endif  // CLDP_PARALLEL_H_
