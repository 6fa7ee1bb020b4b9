// Copyright 2026 The teamsolve Authors.
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

#include "teamsolve/common.h"

#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace teamsolve {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kDegenerateSimplex: return "degenerate-simplex";
    case ErrorCode::kPointOutsideComplex: return "point-outside-complex";
    case ErrorCode::kSupportOutsideBasis: return "support-outside-basis";
    case ErrorCode::kBudgetNonpositive: return "budget-nonpositive";
    case ErrorCode::kLpInfeasible: return "infeasible";
    case ErrorCode::kLpUnbounded: return "unbounded";
    case ErrorCode::kLpIterationLimit: return "lp-iteration-limit";
    case ErrorCode::kMissingDecomposition:
      return "cost-model-lacks-piece-decomposition";
    case ErrorCode::kWrongCostModel: return "wrong-cost-model";
    case ErrorCode::kUnboundedRelaxation:
      return "unbounded-initial-relaxation";
    case ErrorCode::kMaxIterations: return "max-iterations-exceeded";
    case ErrorCode::kMetricMismatch: return "metric-mismatch";
    case ErrorCode::kCellMassMismatch: return "cell-mass-mismatch";
    case ErrorCode::kDegenerateCell: return "degenerate-cell";
    case ErrorCode::kUnsupportedMeasure: return "unsupported-measure-class";
    case ErrorCode::kIndexOutOfRange: return "index-out-of-range";
    case ErrorCode::kConfig: return "config-parse";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

Error::Error(ErrorCode code, std::string module, const std::string& message)
    : std::runtime_error(module + ": " + ErrorCodeName(code) + ": " + message),
      code_(code),
      module_(std::move(module)) {}

Rng MakeRng(uint64_t seed, uint64_t index) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(index),
                    static_cast<uint32_t>(index >> 32)};
  return Rng(seq);
}

int DefaultThreadCount() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

void ParallelFor(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0) threads = DefaultThreadCount();
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string FormatDouble(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace teamsolve
