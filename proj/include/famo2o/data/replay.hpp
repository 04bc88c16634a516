#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "famo2o/data/transition.hpp"
#include "famo2o/numkit/rng.hpp"

namespace famo2o {
namespace data {

/// Fixed-capacity ring buffer with FIFO eviction and uniform sampling with
/// replacement. Offline data loaded first is only displaced once the buffer
/// has grown past capacity.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer: zero capacity");
    items_.reserve(capacity);
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }

  void push(Transition t) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(t));
    } else {
      items_[head_] = std::move(t);
      head_ = (head_ + 1) % capacity_;
    }
  }

  void pushAll(const std::vector<Transition>& ts) {
    for (const Transition& t : ts) push(t);
  }

  const Transition& at(std::size_t i) const { return items_.at(i); }

  /// Uniform minibatch indices with replacement.
  std::vector<std::size_t> sampleIndices(std::size_t m, numkit::Rng& rng) const {
    if (items_.empty()) throw std::runtime_error("ReplayBuffer: sample from empty buffer");
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) {
      idx[i] = static_cast<std::size_t>(
          rng.uniformInt(0, static_cast<std::int64_t>(items_.size()) - 1));
    }
    return idx;
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // next eviction slot once full
  std::vector<Transition> items_;
};

}  // namespace data
}  // namespace famo2o
