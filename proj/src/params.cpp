#include "fusionlm/params.hpp"

#include "fusionlm/errors.hpp"

namespace fusionlm {

void ParamSet::add(std::string name, std::string group, Tensor value) {
  if (has(name)) throw ConfigError("duplicate tensor name: " + name);
  index_.emplace(name, items_.size());
  items_.push_back(NamedTensor{std::move(name), std::move(group), std::move(value)});
}

Tensor& ParamSet::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw IndexError("unknown tensor: " + name);
  return items_[it->second].value;
}

const Tensor& ParamSet::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw IndexError("unknown tensor: " + name);
  return items_[it->second].value;
}

const std::string& ParamSet::group_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw IndexError("unknown tensor: " + name);
  return items_[it->second].group;
}

std::size_t ParamSet::total_parameters() const {
  std::size_t n = 0;
  for (const auto& item : items_) n += item.value.size();
  return n;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto& item : items_) {
    out.add(item.name, item.group, Tensor(item.value.shape()));
  }
  return out;
}

}  // namespace fusionlm
