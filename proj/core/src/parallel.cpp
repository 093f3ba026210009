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

#include "volreg/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>

namespace volreg {
namespace {

int initial_threads() {
  if (const char* env = std::getenv("VOLREG_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  const int n = omp_get_num_procs();
  return n > 0 ? n : 1;
}

std::atomic<int>& thread_setting() {
  static std::atomic<int> value{initial_threads()};
  return value;
}

}  // namespace

void set_thread_count(int threads) { thread_setting().store(threads > 0 ? threads : initial_threads()); }

int thread_count() { return thread_setting().load(); }

double ordered_sum(const std::vector<double>& parts) {
  double sum = 0.0;
  double comp = 0.0;
  for (double v : parts) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

}  // namespace volreg
