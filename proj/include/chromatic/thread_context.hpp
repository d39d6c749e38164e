#ifndef CHROMATIC_THREAD_CONTEXT_HPP
#define CHROMATIC_THREAD_CONTEXT_HPP

#include <atomic>
#include <cstdint>
#include <deque>

#include "chromatic/config.hpp"

namespace chromatic {

// Deferred deallocation entry owned by the epoch reclaimer.
struct RetiredObject {
  void* object;
  void (*deleter)(void*);
  std::uint64_t epoch;
};

/// Per-thread state shared by the primitives and the reclaimer. One context
/// exists per registered thread id; an OS thread acquires one lazily on first
/// use and releases it at exit. The schedule explorer runs several logical
/// threads on one OS thread and switches contexts explicitly.
struct alignas(64) ThreadContext {
  std::uint32_t tid = 0;

  // Epoch announcement: (epoch << 1) | active.
  std::atomic<std::uint64_t> announced{0};
  std::uint32_t guard_depth = 0;
  std::uint32_t retires_since_scan = 0;
  std::deque<RetiredObject> limbo;

  std::uint64_t next_record_serial = 1;

  // Number of Insert/Delete operations this thread has invoked but not yet
  // returned from. Read by stop-the-world samplers in the test harness.
  std::atomic<std::uint32_t> updates_in_flight{0};
};

// Context of the calling (logical) thread; registers on first use.
[[nodiscard]] ThreadContext& this_thread_context();

// Explicit registration, for harnesses that multiplex logical threads.
[[nodiscard]] ThreadContext* acquire_thread_context();
void release_thread_context(ThreadContext* ctx) noexcept;

/// Makes `ctx` the calling OS thread's current context until destroyed.
class ScopedThreadContext {
 public:
  explicit ScopedThreadContext(ThreadContext* ctx) noexcept;
  ~ScopedThreadContext();
  ScopedThreadContext(const ScopedThreadContext&) = delete;
  ScopedThreadContext& operator=(const ScopedThreadContext&) = delete;

 private:
  ThreadContext* previous_;
};

// Low-level switch used by fiber schedulers; returns the previous override.
ThreadContext* swap_current_thread_context(ThreadContext* ctx) noexcept;

// All context slots, for scans by the reclaimer and samplers.
[[nodiscard]] ThreadContext& thread_context_at(std::uint32_t tid) noexcept;
[[nodiscard]] bool thread_context_in_use(std::uint32_t tid) noexcept;
[[nodiscard]] std::uint32_t thread_context_high_water() noexcept;

// Temporarily claims an idle slot so another thread can drain its limbo list.
[[nodiscard]] bool try_claim_idle_thread_context(std::uint32_t tid) noexcept;
void unclaim_thread_context(std::uint32_t tid) noexcept;

}  // namespace chromatic

#endif  // CHROMATIC_THREAD_CONTEXT_HPP
