#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ace {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

class Tensor;

namespace detail {

struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;  // empty until something is accumulated
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    // Reads this node's grad and accumulates into the parents.
    std::function<void(const Node&)> backward;

    std::vector<double>& grad_buffer();
};

}  // namespace detail

// Dense row-major array of doubles that records the operations producing it.
//
// A Tensor is a handle; copies share the same storage. Leaves created with
// requires_grad act as trainable parameters: their values may be mutated in
// place by an optimizer and their gradients persist across backward() calls
// until zero_grad(). Intermediate nodes are released together with the last
// handle referencing the graph root.
class Tensor {
public:
    Tensor() = default;
    Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const;
    std::size_t rank() const { return shape().size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t size() const;

    std::span<const double> values() const;
    // In-place access for initialisation and optimiser updates. Mutating a
    // tensor that already participates in a recorded graph invalidates it.
    std::span<double> mutable_values();
    double item() const;
    double operator[](std::size_t i) const { return values()[i]; }

    bool requires_grad() const;
    bool has_grad() const;
    // Empty span when no gradient has been accumulated.
    std::span<const double> grad() const;
    void zero_grad();

    // Reverse sweep seeded with d(self)/d(self) = 1. Requires a scalar.
    void backward() const;
    // Reverse sweep seeded with an explicit output gradient.
    void backward(std::span<const double> seed) const;

    // Same values, cut from the graph.
    Tensor detach() const;
    Tensor reshape(Shape shape) const;

    // Shares storage: true when both handles refer to the same node.
    bool same_node(const Tensor& other) const { return node_ == other.node_; }

    // Builds a graph node. The callback receives the output gradient and the
    // node's parents, in the order given. When no parent requires a gradient
    // the callback is dropped and the result is a constant.
    using Backward = std::function<void(std::span<const double> out_grad,
                                        std::span<const std::shared_ptr<detail::Node>> parents)>;
    static Tensor make(Shape shape, std::vector<double> values, std::vector<Tensor> parents,
                       Backward backward);

    // Gradient accumulator of a parent node, allocated on first use. Returns
    // nullptr for parents that do not require gradients.
    static double* grad_target(const std::shared_ptr<detail::Node>& node);

private:
    explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
    const detail::Node& node() const;

    std::shared_ptr<detail::Node> node_;
};

// While alive, operations on this thread record no graph: results are
// constants even when their inputs require gradients.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

}  // namespace ace
