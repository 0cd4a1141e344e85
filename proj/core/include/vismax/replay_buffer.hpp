#pragma once

#include "vismax/mdp.hpp"

#include <vector>

namespace vismax {

/// Fixed-capacity FIFO store of N-step segments with uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(NStepSegment segment);
  void push(std::vector<NStepSegment> segments);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return size_ == 0; }

  /// i-th oldest stored segment.
  const NStepSegment& at(std::size_t i) const;
  const NStepSegment& sample(Rng& rng) const;
  /// Indices (into at()) of `count` uniform draws with replacement.
  std::vector<std::size_t> sample_indices(std::size_t count, Rng& rng) const;

  /// Total pushes since construction, including evicted ones.
  std::size_t total_pushed() const { return pushed_; }

 private:
  std::size_t capacity_;
  std::vector<NStepSegment> ring_;
  std::size_t head_ = 0;  // slot of the oldest segment
  std::size_t size_ = 0;
  std::size_t pushed_ = 0;
};

}  // namespace vismax
