#include "vismax/replay_buffer.hpp"

#include <stdexcept>

namespace vismax {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("replay buffer capacity must be positive");
}

void ReplayBuffer::push(NStepSegment segment) {
  ++pushed_;
  if (size_ < capacity_) {
    ring_.push_back(std::move(segment));
    ++size_;
    return;
  }
  ring_[head_] = std::move(segment);
  head_ = (head_ + 1) % capacity_;
}

void ReplayBuffer::push(std::vector<NStepSegment> segments) {
  for (auto& s : segments) push(std::move(s));
}

const NStepSegment& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay buffer index out of range");
  return ring_[(head_ + i) % size_];
}

const NStepSegment& ReplayBuffer::sample(Rng& rng) const {
  if (size_ == 0) throw std::logic_error("cannot sample from an empty replay buffer");
  return ring_[uniform_index(size_, rng)];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t count, Rng& rng) const {
  if (size_ == 0) throw std::logic_error("cannot sample from an empty replay buffer");
  std::vector<std::size_t> out(count);
  for (auto& i : out) i = uniform_index(size_, rng);
  return out;
}

}  // namespace vismax
