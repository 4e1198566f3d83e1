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

#include <string>
#include <vector>

#include "z3sim/operator.hpp"

namespace z3sim {

/// Subset of basis states, kept sorted. `position` maps a full-space index
/// to its slot in the subset or -1.
class Sector {
 public:
  Sector() = default;
  Sector(const SpaceLayout& layout, std::vector<std::int64_t> indices);

  /// All basis states whose digits satisfy `keep`.
  template <typename Pred>
  static Sector where(const SpaceLayout& layout, Pred keep) {
    std::vector<std::int64_t> idx;
    std::vector<int> digits(layout.num_factors());
    for (std::int64_t s = 0; s < layout.total_dim(); ++s) {
      layout.decode(s, digits);
      if (keep(std::span<const int>(digits))) idx.push_back(s);
    }
    return Sector(layout, std::move(idx));
  }

  const SpaceLayout& layout() const { return layout_; }
  std::int64_t size() const { return static_cast<std::int64_t>(indices_.size()); }
  const std::vector<std::int64_t>& indices() const { return indices_; }
  int position(std::int64_t full_index) const { return position_[full_index]; }

  DenseVec restrict(const DenseVec& full) const;
  DenseVec expand(const DenseVec& sub) const;

 private:
  SpaceLayout layout_;
  std::vector<std::int64_t> indices_;
  std::vector<int> position_;
};

struct LocalFactorOp {
  std::size_t factor;
  SparseMat matrix;
};

struct ProductTerm {
  cplx coef;
  std::vector<LocalFactorOp> factors;  // distinct factors, any order
};

/// Sum of tensor-product terms, assembled lazily into CSC form.
class TermSum {
 public:
  explicit TermSum(SpaceLayout layout) : layout_(std::move(layout)) {}

  const SpaceLayout& layout() const { return layout_; }
  const std::vector<ProductTerm>& terms() const { return terms_; }

  /// Adds coef * (ops[0] on labels[0]) (x) ... ; repeated labels are multiplied
  /// in the given order.
  TermSum& add(cplx coef, const std::vector<std::pair<std::string, SparseMat>>& ops);
  TermSum& add(cplx coef, const std::string& label, const SparseMat& op);
  TermSum& add_identity(cplx coef);
  TermSum& append(const TermSum& other);

  SparseMat assemble() const;
  /// Matrix restricted to `sector`. Throws std::invalid_argument if a term
  /// maps a sector state outside the sector.
  SparseMat assemble(const Sector& sector) const;

  SparseOperator build(bool hermitian) const;

 private:
  SpaceLayout layout_;
  std::vector<ProductTerm> terms_;
};

/// Worker count from Z3SIM_THREADS, else hardware concurrency.
int worker_count();

}  // namespace z3sim
