#pragma once

#include <stdexcept>
#include <vector>

#include "cbfrl/rng.hpp"
#include "cbfrl/types.hpp"

namespace cbfrl {

/// Fixed-capacity ring buffer of transitions with uniform sampling over
/// the current contents.
class ReplayBuffer {
public:
    explicit ReplayBuffer(int capacity) : capacity_(capacity) {
        if (capacity <= 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
        data_.reserve(capacity);
    }

    void push(Transition t) {
        if (size() < capacity_) {
            data_.push_back(std::move(t));
        } else {
            data_[static_cast<std::size_t>(inserted_ % capacity_)] = std::move(t);
        }
        ++inserted_;
    }

    int size() const { return static_cast<int>(data_.size()); }
    long inserted() const { return inserted_; }
    int capacity() const { return capacity_; }

    const Transition& at(int i) const { return data_.at(i); }

    const Transition& sample(RngStream& rng) const {
        if (data_.empty()) throw std::logic_error("ReplayBuffer: sample from empty buffer");
        return data_[rng.uniform_int(size())];
    }

private:
    std::vector<Transition> data_;
    int capacity_;
    long inserted_ = 0;
};

} // namespace cbfrl
