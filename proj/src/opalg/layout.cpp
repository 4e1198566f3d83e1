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


#include "z3sim/layout.hpp"

#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace z3sim {

std::string to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::Qutrit:
      return "qutrit";
    case FactorKind::Qubit:
      return "qubit";
    case FactorKind::Boson:
      return "boson";
  }
  return "unknown";
}

SpaceLayout::SpaceLayout(std::vector<Factor> factors) : factors_(std::move(factors)) { rebuild(); }

SpaceLayout SpaceLayout::qutrit(const std::string& label) {
  return SpaceLayout({{label, FactorKind::Qutrit, 3}});
}

SpaceLayout SpaceLayout::qubit(const std::string& label) {
  return SpaceLayout({{label, FactorKind::Qubit, 2}});
}

SpaceLayout SpaceLayout::boson(int cutoff, const std::string& label) {
  return SpaceLayout({{label, FactorKind::Boson, cutoff}});
}

SpaceLayout& SpaceLayout::add_qutrit(const std::string& label) {
  factors_.push_back({label, FactorKind::Qutrit, 3});
  rebuild();
  return *this;
}

SpaceLayout& SpaceLayout::add_qubit(const std::string& label) {
  factors_.push_back({label, FactorKind::Qubit, 2});
  rebuild();
  return *this;
}

SpaceLayout& SpaceLayout::add_boson(const std::string& label, int cutoff) {
  factors_.push_back({label, FactorKind::Boson, cutoff});
  rebuild();
  return *this;
}

void SpaceLayout::rebuild() {
  std::unordered_set<std::string> seen;
  for (const auto& f : factors_) {
    if (!seen.insert(f.label).second) {
      throw std::invalid_argument("duplicate factor label '" + f.label + "'");
    }
    switch (f.kind) {
      case FactorKind::Qutrit:
        if (f.dim != 3) throw std::invalid_argument("qutrit '" + f.label + "' must have dim 3");
        break;
      case FactorKind::Qubit:
        if (f.dim != 2) throw std::invalid_argument("qubit '" + f.label + "' must have dim 2");
        break;
      case FactorKind::Boson:
        if (f.dim < 2) throw std::invalid_argument("boson '" + f.label + "' needs cutoff >= 2");
        break;
    }
  }
  // Sparse matrices are indexed with 32-bit integers.
  constexpr std::int64_t kMaxDim = std::numeric_limits<int>::max();
  strides_.assign(factors_.size(), 1);
  total_dim_ = 1;
  for (std::size_t i = factors_.size(); i-- > 0;) {
    strides_[i] = total_dim_;
    if (total_dim_ > kMaxDim / factors_[i].dim) {
      throw std::invalid_argument("layout dimension exceeds addressable index range");
    }
    total_dim_ *= factors_[i].dim;
  }
}

std::size_t SpaceLayout::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].label == label) return i;
  }
  throw std::invalid_argument("unknown factor label '" + label + "'");
}

bool SpaceLayout::has(const std::string& label) const {
  for (const auto& f : factors_) {
    if (f.label == label) return true;
  }
  return false;
}

void SpaceLayout::decode(std::int64_t index, std::span<int> digits) const {
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    digits[i] = static_cast<int>(index / strides_[i]);
    index -= digits[i] * strides_[i];
  }
}

std::vector<int> SpaceLayout::decode(std::int64_t index) const {
  std::vector<int> digits(factors_.size());
  decode(index, digits);
  return digits;
}

std::int64_t SpaceLayout::encode(std::span<const int> digits) const {
  std::int64_t index = 0;
  for (std::size_t i = 0; i < factors_.size(); ++i) index += digits[i] * strides_[i];
  return index;
}

}  // namespace z3sim
