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
#include <span>
#include <string>
#include <vector>

namespace z3sim {

enum class FactorKind { Qutrit, Qubit, Boson };

std::string to_string(FactorKind kind);

struct Factor {
  std::string label;
  FactorKind kind;
  int dim;  // 3 for qutrits, 2 for qubits, Fock cutoff for bosons

  bool operator==(const Factor&) const = default;
};

/// Ordered tensor-product structure of a composite Hilbert space.
///
/// Factor 0 is the most significant digit of the flat basis index, so the
/// matrix of `A0 (x) A1 (x) ...` is the ordinary Kronecker product in
/// declaration order.
class SpaceLayout {
 public:
  SpaceLayout() = default;
  explicit SpaceLayout(std::vector<Factor> factors);

  static SpaceLayout qutrit(const std::string& label = "q");
  static SpaceLayout qubit(const std::string& label = "s");
  static SpaceLayout boson(int cutoff, const std::string& label = "b");

  SpaceLayout& add_qutrit(const std::string& label);
  SpaceLayout& add_qubit(const std::string& label);
  SpaceLayout& add_boson(const std::string& label, int cutoff);

  std::size_t num_factors() const { return factors_.size(); }
  const std::vector<Factor>& factors() const { return factors_; }
  const Factor& factor(std::size_t i) const { return factors_.at(i); }

  /// Index of the factor with this label; throws std::invalid_argument.
  std::size_t index_of(const std::string& label) const;
  bool has(const std::string& label) const;

  std::int64_t total_dim() const { return total_dim_; }
  std::int64_t stride(std::size_t factor) const { return strides_.at(factor); }

  void decode(std::int64_t index, std::span<int> digits) const;
  std::vector<int> decode(std::int64_t index) const;
  std::int64_t encode(std::span<const int> digits) const;

  bool operator==(const SpaceLayout& other) const { return factors_ == other.factors_; }

 private:
  void rebuild();

  std::vector<Factor> factors_;
  std::vector<std::int64_t> strides_;
  std::int64_t total_dim_ = 1;
};

}  // namespace z3sim
