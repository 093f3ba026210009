/*
Copyright 2026 The volreg Authors
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <cstddef>
#include <vector>

namespace volreg {

// Worker thread bound for all voxel loops. Defaults to the VOLREG_THREADS
// environment variable when set, otherwise the hardware concurrency.
void set_thread_count(int threads);
int thread_count();

// Runs body(i) for i in [begin, end). Iterations must write disjoint outputs.
template <class Body>
void parallel_for(int begin, int end, Body&& body) {
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (int i = begin; i < end; ++i) {
    body(i);
  }
}

// Neumaier-compensated sum, evaluated in index order.
double ordered_sum(const std::vector<double>& parts);

// Deterministic reduction: per-chunk partials are computed in parallel and
// combined in chunk order, so the result does not depend on thread count.
template <class Partial>
double parallel_sum(int chunks, Partial&& partial) {
  std::vector<double> parts(static_cast<std::size_t>(chunks), 0.0);
  parallel_for(0, chunks, [&](int c) { parts[static_cast<std::size_t>(c)] = partial(c); });
  return ordered_sum(parts);
}

}  // namespace volreg
