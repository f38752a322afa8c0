#include "ace/parameters.hpp"

#include <stdexcept>

namespace ace {

void ParameterSet::add(std::string name, Tensor tensor) {
    if (find(name)) throw std::invalid_argument("duplicate parameter name " + name);
    if (!tensor.requires_grad()) {
        throw std::invalid_argument("parameter " + name + " does not require gradients");
    }
    items_.push_back({std::move(name), std::move(tensor)});
}

const NamedTensor* ParameterSet::find(const std::string& name) const {
    for (const auto& item : items_) {
        if (item.name == name) return &item;
    }
    return nullptr;
}

Tensor& ParameterSet::at(const std::string& name) {
    for (auto& item : items_) {
        if (item.name == name) return item.tensor;
    }
    throw std::out_of_range("no parameter named " + name);
}

std::size_t ParameterSet::value_count() const {
    std::size_t n = 0;
    for (const auto& item : items_) n += item.tensor.size();
    return n;
}

void ParameterSet::zero_grad() {
    for (auto& item : items_) item.tensor.zero_grad();
}

}  // namespace ace
