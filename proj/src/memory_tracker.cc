#include "vshift/memory_tracker.h"

#include <atomic>

namespace vshift {
namespace memory_tracker {
namespace {

std::atomic<std::int64_t> g_current{0};
std::atomic<std::int64_t> g_peak{0};

}  // namespace

void OnAllocate(std::size_t bytes) {
  const std::int64_t now =
      g_current.fetch_add(static_cast<std::int64_t>(bytes)) +
      static_cast<std::int64_t>(bytes);
  std::int64_t peak = g_peak.load();
  while (now > peak && !g_peak.compare_exchange_weak(peak, now)) {
  }
}

void OnDeallocate(std::size_t bytes) {
  g_current.fetch_sub(static_cast<std::int64_t>(bytes));
}

std::int64_t CurrentBytes() { return g_current.load(); }
std::int64_t PeakBytes() { return g_peak.load(); }

void ResetPeak() { g_peak.store(g_current.load()); }

}  // namespace memory_tracker
}  // namespace vshift
