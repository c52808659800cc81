#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "fusionlm/tensor.hpp"

namespace fusionlm {

// Gradient clipping buckets: LSTM kernels/biases/projections vs everything
// else.
inline constexpr const char* kGroupLstm = "lstm";
inline constexpr const char* kGroupOther = "other";

struct NamedTensor {
  std::string name;
  std::string group;
  Tensor value;
};

// Ordered collection of named, grouped tensors. Iteration order is the
// insertion order and is part of the determinism contract (norms,
// serialization and gradient flattening all follow it). Also used for
// gradient stores, which mirror the parameter layout.
class ParamSet {
 public:
  void add(std::string name, std::string group, Tensor value);

  bool has(const std::string& name) const { return index_.count(name) != 0; }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  const std::string& group_of(const std::string& name) const;

  std::size_t count() const { return items_.size(); }
  std::size_t total_parameters() const;

  std::vector<NamedTensor>& items() { return items_; }
  const std::vector<NamedTensor>& items() const { return items_; }

  // Same names/groups/shapes, all values zero.
  ParamSet zeros_like() const;

 private:
  std::vector<NamedTensor> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

using GradStore = ParamSet;

}  // namespace fusionlm
