#include "ace/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace ace {

namespace {
thread_local bool recording_enabled = true;
}

NoGradGuard::NoGradGuard() : previous_(recording_enabled) { recording_enabled = false; }
NoGradGuard::~NoGradGuard() { recording_enabled = previous_; }

std::size_t shape_size(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

std::string shape_string(const Shape& shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out << 'x';
        out << shape[i];
    }
    out << ']';
    return out.str();
}

std::vector<double>& detail::Node::grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
    if (shape_size(shape) != values.size()) {
        throw std::invalid_argument("tensor shape " + shape_string(shape) + " does not match " +
                                    std::to_string(values.size()) + " values");
    }
    node_ = std::make_shared<detail::Node>();
    node_->shape = std::move(shape);
    node_->value = std::move(values);
    node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    const std::size_t n = shape_size(shape);
    return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return Tensor(Shape{}, std::vector<double>{value}, requires_grad);
}

const detail::Node& Tensor::node() const {
    if (!node_) throw std::logic_error("use of an undefined tensor");
    return *node_;
}

const Shape& Tensor::shape() const { return node().shape; }

std::size_t Tensor::dim(std::size_t axis) const {
    const Shape& s = shape();
    if (axis >= s.size()) {
        throw std::out_of_range("axis " + std::to_string(axis) + " out of range for shape " +
                                shape_string(s));
    }
    return s[axis];
}

std::size_t Tensor::size() const { return node().value.size(); }

std::span<const double> Tensor::values() const { return node().value; }

std::span<double> Tensor::mutable_values() {
    node();
    return node_->value;
}

double Tensor::item() const {
    if (size() != 1) {
        throw std::invalid_argument("item() on tensor of shape " + shape_string(shape()));
    }
    return node().value[0];
}

bool Tensor::requires_grad() const { return node().requires_grad; }

bool Tensor::has_grad() const { return !node().grad.empty(); }

std::span<const double> Tensor::grad() const { return node().grad; }

void Tensor::zero_grad() {
    node();
    std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

void Tensor::backward() const {
    if (size() != 1) {
        throw std::invalid_argument("backward() without a seed needs a scalar, got shape " +
                                    shape_string(shape()));
    }
    const double one = 1.0;
    backward(std::span<const double>(&one, 1));
}

void Tensor::backward(std::span<const double> seed) const {
    if (seed.size() != size()) {
        throw std::invalid_argument("backward seed has " + std::to_string(seed.size()) +
                                    " values for shape " + shape_string(shape()));
    }
    if (!node().requires_grad) return;

    // Iterative post-order DFS gives a topological order of the subgraph.
    std::vector<detail::Node*> order;
    std::unordered_set<detail::Node*> visited;
    std::vector<std::pair<detail::Node*, std::size_t>> stack;
    stack.emplace_back(node_.get(), 0);
    visited.insert(node_.get());
    while (!stack.empty()) {
        auto& [n, next] = stack.back();
        if (next < n->parents.size()) {
            detail::Node* p = n->parents[next++].get();
            if (p->requires_grad && !visited.contains(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }

    std::vector<double>& g = node_->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += seed[i];

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::Node* n = *it;
        if (n->backward && !n->grad.empty()) n->backward(*n);
    }
}

Tensor Tensor::detach() const { return Tensor(shape(), node().value, false); }

Tensor Tensor::reshape(Shape new_shape) const {
    if (shape_size(new_shape) != size()) {
        throw std::invalid_argument("cannot reshape " + shape_string(shape()) + " to " +
                                    shape_string(new_shape));
    }
    return make(std::move(new_shape), node().value, {*this},
                [](std::span<const double> g, std::span<const std::shared_ptr<detail::Node>> p) {
                    if (double* t = grad_target(p[0])) {
                        for (std::size_t i = 0; i < g.size(); ++i) t[i] += g[i];
                    }
                });
}

Tensor Tensor::make(Shape shape, std::vector<double> values, std::vector<Tensor> parents,
                    Backward backward) {
    Tensor out(std::move(shape), std::move(values), false);
    const bool needs = recording_enabled && std::any_of(parents.begin(), parents.end(),
                                   [](const Tensor& t) { return t.requires_grad(); });
    if (!needs) return out;
    out.node_->requires_grad = true;
    out.node_->parents.reserve(parents.size());
    for (auto& p : parents) out.node_->parents.push_back(p.node_);
    out.node_->backward = [fn = std::move(backward)](const detail::Node& self) {
        fn(self.grad, self.parents);
    };
    return out;
}

double* Tensor::grad_target(const std::shared_ptr<detail::Node>& node) {
    if (!node->requires_grad) return nullptr;
    return node->grad_buffer().data();
}

}  // namespace ace
