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


#include "z3sim/term_sum.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <limits>
#include <thread>

namespace z3sim {

int worker_count() {
  int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("Z3SIM_THREADS")) {
    int n = 0;
    auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), n);
    if (ec == std::errc() && n > 0) return std::min(n, hw);
  }
  return hw;
}

Sector::Sector(const SpaceLayout& layout, std::vector<std::int64_t> indices)
    : layout_(layout), indices_(std::move(indices)) {
  if (!std::is_sorted(indices_.begin(), indices_.end()) ||
      std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    throw std::invalid_argument("sector indices must be strictly increasing");
  }
  if (!indices_.empty() && (indices_.front() < 0 || indices_.back() >= layout_.total_dim())) {
    throw std::invalid_argument("sector index out of range");
  }
  position_.assign(layout_.total_dim(), -1);
  for (std::size_t i = 0; i < indices_.size(); ++i) position_[indices_[i]] = static_cast<int>(i);
}

DenseVec Sector::restrict(const DenseVec& full) const {
  if (full.size() != layout_.total_dim()) throw std::invalid_argument("restrict: dimension mismatch");
  DenseVec sub(size());
  for (std::int64_t i = 0; i < size(); ++i) sub(i) = full(indices_[i]);
  return sub;
}

DenseVec Sector::expand(const DenseVec& sub) const {
  if (sub.size() != size()) throw std::invalid_argument("expand: dimension mismatch");
  DenseVec full = DenseVec::Zero(layout_.total_dim());
  for (std::int64_t i = 0; i < size(); ++i) full(indices_[i]) = sub(i);
  return full;
}

TermSum& TermSum::add(cplx coef, const std::vector<std::pair<std::string, SparseMat>>& ops) {
  ProductTerm term{coef, {}};
  for (const auto& [label, m] : ops) {
    std::size_t f = layout_.index_of(label);
    int d = layout_.factor(f).dim;
    if (m.rows() != d || m.cols() != d) {
      throw std::invalid_argument("local operator on '" + label + "' has wrong dimension");
    }
    auto it = std::find_if(term.factors.begin(), term.factors.end(),
                           [f](const LocalFactorOp& lf) { return lf.factor == f; });
    if (it == term.factors.end()) {
      term.factors.push_back({f, m});
    } else {
      it->matrix = SparseMat(it->matrix * m);
    }
  }
  for (auto& lf : term.factors) lf.matrix.makeCompressed();
  terms_.push_back(std::move(term));
  return *this;
}

TermSum& TermSum::add(cplx coef, const std::string& label, const SparseMat& op) {
  return add(coef, {{label, op}});
}

TermSum& TermSum::add_identity(cplx coef) {
  terms_.push_back({coef, {}});
  return *this;
}

TermSum& TermSum::append(const TermSum& other) {
  if (!(other.layout_ == layout_)) throw std::invalid_argument("append: layout mismatch");
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  return *this;
}

namespace {

struct ColumnChunk {
  std::vector<int> rows;
  std::vector<cplx> values;
  std::vector<int> counts;
};

class ColumnBuilder {
 public:
  ColumnBuilder(const SpaceLayout& layout, const std::vector<ProductTerm>& terms)
      : layout_(layout), terms_(terms), digits_(layout.num_factors()) {}

  // Fills `out` with (full row index, value) for full-space column s.
  void column(std::int64_t s, std::vector<std::pair<std::int64_t, cplx>>& out) {
    out.clear();
    layout_.decode(s, digits_);
    for (const auto& t : terms_) {
      if (t.coef == cplx(0.0)) continue;
      recurse(t, 0, s, t.coef, out);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t w = 0;
    for (std::size_t r = 0; r < out.size(); ++r) {
      if (w > 0 && out[w - 1].first == out[r].first) {
        out[w - 1].second += out[r].second;
      } else {
        out[w++] = out[r];
      }
    }
    out.resize(w);
    std::erase_if(out, [](const auto& e) { return std::abs(e.second) <= kPruneTol; });
  }

 private:
  void recurse(const ProductTerm& t, std::size_t k, std::int64_t idx, cplx amp,
               std::vector<std::pair<std::int64_t, cplx>>& out) const {
    if (k == t.factors.size()) {
      out.emplace_back(idx, amp);
      return;
    }
    const auto& lf = t.factors[k];
    int d = digits_[lf.factor];
    std::int64_t stride = layout_.stride(lf.factor);
    for (SparseMat::InnerIterator it(lf.matrix, d); it; ++it) {
      recurse(t, k + 1, idx + (it.row() - d) * stride, amp * it.value(), out);
    }
  }

  const SpaceLayout& layout_;
  const std::vector<ProductTerm>& terms_;
  std::vector<int> digits_;
};

SparseMat assemble_impl(const SpaceLayout& layout, const std::vector<ProductTerm>& terms, const Sector* sector) {
  const std::int64_t n = sector ? sector->size() : layout.total_dim();
  const int nthreads = static_cast<int>(std::min<std::int64_t>(worker_count(), std::max<std::int64_t>(1, n / 4096)));
  std::vector<ColumnChunk> chunks(nthreads);
  std::vector<std::string> errors(nthreads);

  auto work = [&](int tid) {
    std::int64_t begin = n * tid / nthreads;
    std::int64_t end = n * (tid + 1) / nthreads;
    ColumnBuilder builder(layout, terms);
    std::vector<std::pair<std::int64_t, cplx>> col;
    auto& chunk = chunks[tid];
    chunk.counts.reserve(end - begin);
    try {
      for (std::int64_t c = begin; c < end; ++c) {
        std::int64_t s = sector ? sector->indices()[c] : c;
        builder.column(s, col);
        int count = 0;
        for (const auto& [row, v] : col) {
          int r = static_cast<int>(row);
          if (sector) {
            r = sector->position(row);
            if (r < 0) throw std::invalid_argument("operator does not preserve the sector");
          }
          chunk.rows.push_back(r);
          chunk.values.push_back(v);
          ++count;
        }
        chunk.counts.push_back(count);
      }
    } catch (const std::exception& e) {
      errors[tid] = e.what();
    }
  };

  if (nthreads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(work, t);
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw std::invalid_argument(e);
  }

  std::int64_t nnz = 0;
  for (const auto& c : chunks) nnz += static_cast<std::int64_t>(c.rows.size());
  if (nnz > std::numeric_limits<int>::max()) throw std::invalid_argument("too many nonzeros");

  SparseMat m(n, n);
  m.resizeNonZeros(nnz);
  int* outer = m.outerIndexPtr();
  int* inner = m.innerIndexPtr();
  cplx* values = m.valuePtr();
  std::int64_t col = 0;
  std::int64_t pos = 0;
  outer[0] = 0;
  for (const auto& c : chunks) {
    std::copy(c.rows.begin(), c.rows.end(), inner + pos);
    std::copy(c.values.begin(), c.values.end(), values + pos);
    for (int cnt : c.counts) {
      pos += cnt;
      outer[++col] = static_cast<int>(pos);
    }
  }
  return m;
}

}  // namespace

SparseMat TermSum::assemble() const { return assemble_impl(layout_, terms_, nullptr); }

SparseMat TermSum::assemble(const Sector& sector) const {
  if (!(sector.layout() == layout_)) throw std::invalid_argument("assemble: sector layout mismatch");
  return assemble_impl(layout_, terms_, &sector);
}

SparseOperator TermSum::build(bool hermitian) const { return SparseOperator(layout_, assemble(), hermitian); }

}  // namespace z3sim
