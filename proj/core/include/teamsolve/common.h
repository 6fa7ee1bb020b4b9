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

#ifndef TEAMSOLVE_COMMON_H_
#define TEAMSOLVE_COMMON_H_

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace teamsolve {

// Points live in low-dimensional spaces; the inline capacity keeps them off
// the heap in the sampling loops.
inline constexpr int kMaxDim = 8;
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor,
                            kMaxDim, 1>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

inline constexpr double kTolGeom = 1e-9;
inline constexpr double kTolLp = 1e-9;

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kDegenerateSimplex,
  kPointOutsideComplex,
  kSupportOutsideBasis,
  kBudgetNonpositive,
  kLpInfeasible,
  kLpUnbounded,
  kLpIterationLimit,
  kMissingDecomposition,
  kWrongCostModel,
  kUnboundedRelaxation,
  kMaxIterations,
  kMetricMismatch,
  kCellMassMismatch,
  kDegenerateCell,
  kUnsupportedMeasure,
  kIndexOutOfRange,
  kConfig,
  kIo,
};

const char* ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception. `module` names
// the component that raised it so that the command line tool can attribute
// the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, const std::string& message);

  ErrorCode code() const { return code_; }
  const std::string& module() const { return module_; }

 private:
  ErrorCode code_;
  std::string module_;
};

// Deterministic stream for worker `index` under master seed `seed`.
Rng MakeRng(uint64_t seed, uint64_t index);

// Runs fn(0..n-1) on up to `threads` workers. Work items are claimed in
// order; exceptions are rethrown on the calling thread (first one wins).
void ParallelFor(int n, int threads, const std::function<void(int)>& fn);

// Number of worker threads used when the caller asks for 0.
int DefaultThreadCount();

std::string FormatDouble(double value);

}  // namespace teamsolve

#endif  // TEAMSOLVE_COMMON_H_
