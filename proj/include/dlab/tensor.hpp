#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dlab/errors.hpp"

namespace dlab {

using Index = std::int64_t;

inline Index shape_product(const std::vector<Index>& shape) {
    Index n = 1;
    for (const Index d : shape) n *= d;
    return n;
}

inline std::string shape_str(const std::vector<Index>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

// Dense tensor with shared storage. A tensor that requires grad owns a
// same-shape grad buffer for its whole lifetime; grads accumulate until
// zero_grad(). Copying a Tensor copies the handle, not the storage.
template <class T>
class Tensor {
  public:
    Tensor() = default;

    static Tensor zeros(std::vector<Index> shape, bool requires_grad = false) {
        Tensor t;
        t.d_ = std::make_shared<Data>();
        t.d_->shape = std::move(shape);
        const Index n = shape_product(t.d_->shape);
        if (n < 0) throw ShapeError("tensor shape " + shape_str(t.d_->shape) + " has a negative dimension");
        t.d_->values.assign(static_cast<std::size_t>(n), T(0));
        t.d_->requires_grad = requires_grad;
        if (requires_grad) t.d_->grad.assign(static_cast<std::size_t>(n), T(0));
        return t;
    }

    static Tensor from(std::vector<Index> shape, std::vector<T> values, bool requires_grad = false) {
        if (shape_product(shape) != static_cast<Index>(values.size())) {
            throw ShapeError("tensor shape " + shape_str(shape) + " does not match " +
                             std::to_string(values.size()) + " values");
        }
        Tensor t = zeros(std::move(shape), requires_grad);
        t.d_->values = std::move(values);
        return t;
    }

    static Tensor scalar(T v, bool requires_grad = false) {
        return from({1}, {v}, requires_grad);
    }

    bool defined() const { return d_ != nullptr; }
    const std::vector<Index>& shape() const { return d_->shape; }
    int ndim() const { return static_cast<int>(d_->shape.size()); }
    Index dim(int i) const { return d_->shape[static_cast<std::size_t>(i)]; }
    Index size() const { return static_cast<Index>(d_->values.size()); }
    bool requires_grad() const { return d_ && d_->requires_grad; }

    std::span<T> v() { return {d_->values.data(), d_->values.size()}; }
    std::span<const T> v() const { return {d_->values.data(), d_->values.size()}; }

    std::span<T> g() {
        if (!requires_grad()) throw Error("tensor has no grad buffer (requires_grad is false)");
        return {d_->grad.data(), d_->grad.size()};
    }
    std::span<const T> g() const {
        if (!requires_grad()) throw Error("tensor has no grad buffer (requires_grad is false)");
        return {d_->grad.data(), d_->grad.size()};
    }

    void zero_grad() {
        if (requires_grad()) std::fill(d_->grad.begin(), d_->grad.end(), T(0));
    }

    T item() const {
        if (size() != 1) throw ShapeError("item() on tensor of size " + std::to_string(size()));
        return d_->values[0];
    }

    bool same_storage(const Tensor& o) const { return d_ == o.d_; }

  private:
    struct Data {
        std::vector<Index> shape;
        std::vector<T> values;
        std::vector<T> grad;
        bool requires_grad = false;
    };
    std::shared_ptr<Data> d_;
};

}  // namespace dlab
