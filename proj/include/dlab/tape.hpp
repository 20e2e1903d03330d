#pragma once

#include <functional>
#include <vector>

#include "dlab/tensor.hpp"

namespace dlab {

// Reverse-mode tape. Ops record themselves in execution order, which is a
// topological order by construction, so backward() is a reverse sweep.
// Grads are write-once per step: a second backward() without reset_grads()
// is an error, because it would silently double-accumulate.
template <class T>
class Tape {
  public:
    void record(const char* op, std::vector<Tensor<T>> tensors, std::function<void()> backward_fn) {
        nodes_.push_back(Node{op, std::move(tensors), std::move(backward_fn)});
    }

    void backward(const Tensor<T>& loss) {
        if (!loss.defined() || loss.size() != 1) {
            throw Error("backward requires a scalar loss tensor");
        }
        if (!loss.requires_grad()) {
            throw Error("backward on a loss that does not require grad (no parameters on the tape)");
        }
        if (backward_done_) {
            throw Error("backward already ran on this tape; grads are write-once per step, call reset_grads() first");
        }
        backward_done_ = true;
        loss.g()[0] += T(1);
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
            it->backward_fn();
        }
    }

    // Zeroes grads of every tensor the tape touched (including leaves) and
    // re-arms backward. Parameters shared with other tapes are zeroed too.
    void reset_grads() {
        for (auto& node : nodes_) {
            for (auto& t : node.tensors) t.zero_grad();
        }
        backward_done_ = false;
    }

    bool backward_done() const { return backward_done_; }
    std::size_t num_nodes() const { return nodes_.size(); }

    // Replays the recorded forward pass; used to check that re-execution is
    // bit-identical (fixed reduction order).
    void clear() {
        nodes_.clear();
        backward_done_ = false;
    }

  private:
    struct Node {
        const char* op;
        std::vector<Tensor<T>> tensors;
        std::function<void()> backward_fn;
    };
    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

}  // namespace dlab
