#ifndef VSHIFT_MEMORY_TRACKER_H_
#define VSHIFT_MEMORY_TRACKER_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <new>

namespace vshift {

// Process-wide counter of bytes held by the pipeline's bulk buffers (images,
// depth maps, point clouds, z-buffers, masks). Used to assert that streaming
// dataset generation keeps a working set independent of sequence length.
namespace memory_tracker {

void OnAllocate(std::size_t bytes);
void OnDeallocate(std::size_t bytes);

std::int64_t CurrentBytes();
std::int64_t PeakBytes();

// Sets the peak to the current value.
void ResetPeak();

}  // namespace memory_tracker

// std::allocator replacement that reports to memory_tracker.
template <typename T>
struct TrackedAllocator {
  using value_type = T;

  TrackedAllocator() noexcept = default;
  template <typename U>
  TrackedAllocator(const TrackedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    if (n > std::numeric_limits<std::size_t>::max() / sizeof(T)) {
      throw std::bad_array_new_length();
    }
    T* p = static_cast<T*>(::operator new(n * sizeof(T)));
    memory_tracker::OnAllocate(n * sizeof(T));
    return p;
  }

  void deallocate(T* p, std::size_t n) noexcept {
    memory_tracker::OnDeallocate(n * sizeof(T));
    ::operator delete(p);
  }

  template <typename U>
  bool operator==(const TrackedAllocator<U>&) const noexcept {
    return true;
  }
};

}  // namespace vshift

#endif  // VSHIFT_MEMORY_TRACKER_H_
