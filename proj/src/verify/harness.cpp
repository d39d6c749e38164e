#include "chromatic/verify/harness.hpp"

#include "chromatic/thread_context.hpp"

namespace chromatic::verify {

namespace {
thread_local StopTheWorld* t_world = nullptr;
}  // namespace

void StallInjector::at(SchedPoint point) {
  if (point != point_ || this_thread_context().tid != victim_) return;
  if (++hits_ != occurrence_) return;
  std::unique_lock lock(mutex_);
  parked_.store(true);
  cv_.notify_all();
  cv_.wait(lock, [&] { return released_; });
}

void StallInjector::release() {
  std::lock_guard lock(mutex_);
  released_ = true;
  cv_.notify_all();
}

void StallInjector::wait_parked_or_done() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return parked_.load() || done_; });
}

void StallInjector::victim_finished() {
  std::lock_guard lock(mutex_);
  done_ = true;
  cv_.notify_all();
}

StopTheWorld::WorkerScope::WorkerScope(StopTheWorld& world) : world_(world) {
  std::lock_guard lock(world_.mutex_);
  ++world_.live_;
  t_world = &world_;
}

StopTheWorld::WorkerScope::~WorkerScope() {
  std::lock_guard lock(world_.mutex_);
  --world_.live_;
  t_world = nullptr;
  world_.cv_.notify_all();
}

void StopTheWorld::at(SchedPoint) {
  if (t_world != this || !stopping_.load(std::memory_order_acquire)) return;
  std::unique_lock lock(mutex_);
  if (!stopping_.load()) return;
  const std::uint64_t gen = generation_;
  ++parked_;
  cv_.notify_all();
  cv_.wait(lock, [&] { return generation_ != gen; });
}

void StopTheWorld::stop() {
  std::unique_lock lock(mutex_);
  stopping_.store(true, std::memory_order_release);
  cv_.wait(lock, [&] { return parked_ == live_; });
}

void StopTheWorld::resume() {
  std::lock_guard lock(mutex_);
  stopping_.store(false);
  parked_ = 0;
  ++generation_;
  cv_.notify_all();
}

}  // namespace chromatic::verify
