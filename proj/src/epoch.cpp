#include "chromatic/epoch.hpp"

#include <atomic>
#include <cassert>
#include <mutex>

namespace chromatic {

namespace {

constexpr std::uint32_t kScanInterval = 64;

std::atomic<std::uint64_t> g_epoch{1};
std::atomic<std::uint64_t> g_retired{0};
std::atomic<std::uint64_t> g_freed{0};
std::mutex g_collect_mutex;

constexpr std::uint64_t announce_value(std::uint64_t epoch) {
  return (epoch << 1) | 1U;
}

bool try_advance() {
  const std::uint64_t epoch = g_epoch.load();
  const std::uint32_t n = thread_context_high_water();
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint64_t a = thread_context_at(i).announced.load();
    if ((a & 1U) != 0 && (a >> 1) != epoch) return false;
  }
  std::uint64_t expected = epoch;
  g_epoch.compare_exchange_strong(expected, epoch + 1);
  return true;
}

void free_safe(ThreadContext& ctx) {
  const std::uint64_t epoch = g_epoch.load();
  std::uint64_t freed = 0;
  while (!ctx.limbo.empty() && ctx.limbo.front().epoch + kReclaimLag <= epoch) {
    const RetiredObject r = ctx.limbo.front();
    ctx.limbo.pop_front();
    r.deleter(r.object);
    ++freed;
  }
  if (freed != 0) g_freed.fetch_add(freed, std::memory_order_relaxed);
}

}  // namespace

EpochGuard::EpochGuard() : EpochGuard(this_thread_context()) {}

EpochGuard::EpochGuard(ThreadContext& ctx) : ctx_(ctx) {
  if (ctx_.guard_depth++ != 0) return;
  std::uint64_t epoch = g_epoch.load();
  for (;;) {
    ctx_.announced.store(announce_value(epoch));
    const std::uint64_t now = g_epoch.load();
    if (now == epoch) break;
    epoch = now;
  }
}

EpochGuard::~EpochGuard() {
  assert(ctx_.guard_depth > 0);
  if (--ctx_.guard_depth != 0) return;
  ctx_.announced.store(ctx_.announced.load(std::memory_order_relaxed) & ~1ULL,
                       std::memory_order_release);
}

void retire(void* object, void (*deleter)(void*)) {
  ThreadContext& ctx = this_thread_context();
  ctx.limbo.push_back({object, deleter, g_epoch.load()});
  g_retired.fetch_add(1, std::memory_order_relaxed);
  if (++ctx.retires_since_scan >= kScanInterval) {
    ctx.retires_since_scan = 0;
    try_advance();
    free_safe(ctx);
  }
}

std::uint64_t current_epoch() noexcept { return g_epoch.load(); }

void epoch_collect_all() {
  std::lock_guard lock(g_collect_mutex);
  for (std::uint64_t i = 0; i <= kReclaimLag; ++i) {
    if (!try_advance()) break;
  }
  // Contexts owned by other live threads drain themselves on retire.
  const std::uint32_t n = thread_context_high_water();
  ThreadContext& self = this_thread_context();
  free_safe(self);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (i == self.tid || !try_claim_idle_thread_context(i)) continue;
    free_safe(thread_context_at(i));
    unclaim_thread_context(i);
  }
}

EpochStats epoch_stats() noexcept {
  return {g_retired.load(std::memory_order_relaxed),
          g_freed.load(std::memory_order_relaxed)};
}

}  // namespace chromatic
