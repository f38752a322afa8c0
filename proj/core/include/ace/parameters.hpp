#pragma once

#include <string>
#include <vector>

#include "ace/tensor.hpp"

namespace ace {

struct NamedTensor {
    std::string name;
    Tensor tensor;
};

// Ordered collection of trainable leaves. Order is registration order and is
// the order used by the optimiser and by checkpoints.
class ParameterSet {
public:
    void add(std::string name, Tensor tensor);

    const NamedTensor* find(const std::string& name) const;
    Tensor& at(const std::string& name);

    std::size_t size() const { return items_.size(); }
    std::size_t value_count() const;
    void zero_grad();

    auto begin() { return items_.begin(); }
    auto end() { return items_.end(); }
    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }
    const NamedTensor& operator[](std::size_t i) const { return items_[i]; }

private:
    std::vector<NamedTensor> items_;
};

}  // namespace ace
