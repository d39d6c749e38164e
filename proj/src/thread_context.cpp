#include "chromatic/thread_context.hpp"

#include <array>
#include <cassert>
#include <stdexcept>

#include "chromatic/instrument.hpp"

namespace chromatic {

namespace {

std::array<ThreadContext, kMaxThreads> g_contexts;
std::array<std::atomic<bool>, kMaxThreads> g_in_use{};
std::atomic<std::uint32_t> g_high_water{0};

thread_local ThreadContext* t_override = nullptr;

struct OsThreadRegistration {
  ThreadContext* ctx = nullptr;
  ~OsThreadRegistration() {
    if (ctx != nullptr) release_thread_context(ctx);
  }
};

thread_local OsThreadRegistration t_registration;

}  // namespace

ThreadContext* acquire_thread_context() {
  for (std::uint32_t i = 0; i < kMaxThreads; ++i) {
    bool expected = false;
    if (!g_in_use[i].load(std::memory_order_relaxed) &&
        g_in_use[i].compare_exchange_strong(expected, true)) {
      auto& ctx = g_contexts[i];
      ctx.tid = i;
      ctx.guard_depth = 0;
      ctx.announced.store(0);
      ctx.updates_in_flight.store(0);
      std::uint32_t hw = g_high_water.load();
      while (hw < i + 1 && !g_high_water.compare_exchange_weak(hw, i + 1)) {
      }
      return &ctx;
    }
  }
  throw std::runtime_error("chromatic: thread context table exhausted");
}

void release_thread_context(ThreadContext* ctx) noexcept {
  assert(ctx->guard_depth == 0);
  ctx->announced.store(0);
  // Limbo entries stay with the slot and are drained by its next owner.
  g_in_use[ctx->tid].store(false, std::memory_order_release);
}

ThreadContext& this_thread_context() {
  if (t_override != nullptr) return *t_override;
  if (t_registration.ctx == nullptr) t_registration.ctx = acquire_thread_context();
  return *t_registration.ctx;
}

ThreadContext* swap_current_thread_context(ThreadContext* ctx) noexcept {
  ThreadContext* prev = t_override;
  t_override = ctx;
  return prev;
}

ScopedThreadContext::ScopedThreadContext(ThreadContext* ctx) noexcept
    : previous_(swap_current_thread_context(ctx)) {}

ScopedThreadContext::~ScopedThreadContext() {
  swap_current_thread_context(previous_);
}

ThreadContext& thread_context_at(std::uint32_t tid) noexcept {
  return g_contexts[tid];
}

bool thread_context_in_use(std::uint32_t tid) noexcept {
  return g_in_use[tid].load(std::memory_order_acquire);
}

std::uint32_t thread_context_high_water() noexcept {
  return g_high_water.load(std::memory_order_acquire);
}

bool try_claim_idle_thread_context(std::uint32_t tid) noexcept {
  bool expected = false;
  return g_in_use[tid].compare_exchange_strong(expected, true);
}

void unclaim_thread_context(std::uint32_t tid) noexcept {
  g_in_use[tid].store(false, std::memory_order_release);
}

std::string_view to_string(SchedPoint p) noexcept {
  switch (p) {
    case SchedPoint::kLlxReadMarked: return "llx.read_marked";
    case SchedPoint::kLlxReadInfo: return "llx.read_info";
    case SchedPoint::kLlxReadState: return "llx.read_state";
    case SchedPoint::kLlxReadChildren: return "llx.read_children";
    case SchedPoint::kLlxRecheckInfo: return "llx.recheck_info";
    case SchedPoint::kScxPublish: return "scx.publish";
    case SchedPoint::kFreeze: return "scx.freeze";
    case SchedPoint::kFreezeCheck: return "scx.freeze_check";
    case SchedPoint::kAllFrozen: return "scx.all_frozen";
    case SchedPoint::kMark: return "scx.mark";
    case SchedPoint::kUpdateField: return "scx.update_field";
    case SchedPoint::kCommit: return "scx.commit";
    case SchedPoint::kAbort: return "scx.abort";
    case SchedPoint::kVlxCheck: return "vlx.check";
    case SchedPoint::kReadChild: return "read_child";
    case SchedPoint::kOpBegin: return "op.begin";
    case SchedPoint::kOpEnd: return "op.end";
  }
  return "?";
}

}  // namespace chromatic
