#ifndef CHROMATIC_EPOCH_HPP
#define CHROMATIC_EPOCH_HPP

#include <cstdint>

#include "chromatic/thread_context.hpp"

/// \file
/// Epoch-based deferred reclamation. Every operation that dereferences
/// shared records runs inside an EpochGuard. A retired object is freed once
/// the global epoch has advanced three times past its retirement epoch;
/// helpers of an in-flight SCX may touch records the SCX owner protects,
/// which is one epoch more than plain traversals need.

namespace chromatic {

inline constexpr std::uint64_t kReclaimLag = 3;

class EpochGuard {
 public:
  EpochGuard();
  explicit EpochGuard(ThreadContext& ctx);
  ~EpochGuard();
  EpochGuard(const EpochGuard&) = delete;
  EpochGuard& operator=(const EpochGuard&) = delete;

 private:
  ThreadContext& ctx_;
};

void retire(void* object, void (*deleter)(void*));

template <class T>
void retire_object(T* object) {
  retire(object, [](void* p) { delete static_cast<T*>(p); });
}

[[nodiscard]] std::uint64_t current_epoch() noexcept;

// Advances the epoch as far as the active threads allow and frees what
// became safe, for every context. Intended for quiescent points in tests and
// at the end of benchmark trials.
void epoch_collect_all();

struct EpochStats {
  std::uint64_t retired = 0;
  std::uint64_t freed = 0;
};
[[nodiscard]] EpochStats epoch_stats() noexcept;

}  // namespace chromatic

#endif  // CHROMATIC_EPOCH_HPP
