// Copyright 2026 The z3sim Authors
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


#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "z3sim/operator.hpp"

namespace z3sim {

inline constexpr std::int64_t kDenseDimLimit = 4000;
/// Below this the dense path is always taken.
inline constexpr std::int64_t kDenseCrossoverDim = 800;

struct EigenPairs {
  Eigen::VectorXd values;  // ascending
  DenseMat vectors;        // columns, empty when not requested
  std::vector<double> residuals;
  std::string method;
  int iterations = 0;
};

/// Lowest k eigenpairs of a dense Hermitian matrix (LAPACK zheevr).
EigenPairs dense_eigh(const DenseMat& h, int k, bool want_vectors = true);
/// All eigenpairs.
EigenPairs dense_eigh(const DenseMat& h);

struct LanczosOptions {
  int block_size = 0;  // 0 picks 4
  int max_basis = 0;   // 0 picks max(8 * block, 6 * k + 4 * block)
  int max_restarts = 2000;
  double tol = 1e-10;  // residual norm per pair
  int converge_count = 0;  // leading pairs held to tol, 0 for all k
  std::uint64_t seed = 0x5eed;
  DenseMat start;  // optional initial block, leading columns used, random fill
};

/// Lowest k eigenpairs of a sparse Hermitian matrix by thick-restart block
/// Lanczos with full reorthogonalization. Throws ConvergenceError.
EigenPairs lanczos_eigh(const SparseMat& h, int k, const LanczosOptions& opts = {});

/// Dense path up to kDenseCrossoverDim, or up to kDenseDimLimit when 20 k >= dim;
/// Lanczos otherwise.
EigenPairs lowest_eigenpairs(const SparseMat& h, int k, bool want_vectors, const LanczosOptions& opts = {});

}  // namespace z3sim
