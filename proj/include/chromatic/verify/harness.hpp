#ifndef CHROMATIC_VERIFY_HARNESS_HPP
#define CHROMATIC_VERIFY_HARNESS_HPP

#include <array>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <mutex>

#include "chromatic/instrument.hpp"

namespace chromatic::verify {

/// Parks one thread when it reaches the `occurrence`-th hit of `point`,
/// until release() is called. Other threads pass through untouched.
class StallInjector final : public SchedHook {
 public:
  StallInjector(std::uint32_t victim_tid, SchedPoint point, std::uint64_t occurrence)
      : victim_(victim_tid), point_(point), occurrence_(occurrence) {}

  void at(SchedPoint point) override;

  void release();
  [[nodiscard]] bool parked() const noexcept { return parked_.load(); }
  // Blocks until the victim parks or finishes (see victim_finished()).
  void wait_parked_or_done();
  void victim_finished();

 private:
  std::uint32_t victim_;
  SchedPoint point_;
  std::uint64_t occurrence_;
  std::uint64_t hits_ = 0;  // touched by the victim only
  std::atomic<bool> parked_{false};
  std::mutex mutex_;
  std::condition_variable cv_;
  bool released_ = false;
  bool done_ = false;
};

/// Counts instrumentation points reached by the calling threads, per kind.
class PointCounter final : public SchedHook {
 public:
  void at(SchedPoint point) override {
    counts_[static_cast<std::size_t>(point)].fetch_add(1, std::memory_order_relaxed);
  }
  [[nodiscard]] std::uint64_t count(SchedPoint p) const noexcept {
    return counts_[static_cast<std::size_t>(p)].load();
  }

 private:
  std::array<std::atomic<std::uint64_t>, kSchedPointCount> counts_{};
};

/// Stop-the-world barrier for sampling a running map. Worker threads enter
/// a WorkerScope; when stop() is called every worker parks at its next
/// instrumentation point, and stop() returns once all live workers are
/// parked. resume() lets them continue. Non-worker threads pass through the
/// hook, so the sampler may read the structure while the world is stopped.
class StopTheWorld final : public SchedHook {
 public:
  class WorkerScope {
   public:
    explicit WorkerScope(StopTheWorld& world);
    ~WorkerScope();
    WorkerScope(const WorkerScope&) = delete;
    WorkerScope& operator=(const WorkerScope&) = delete;

   private:
    StopTheWorld& world_;
  };

  void at(SchedPoint point) override;

  void stop();
  void resume();

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::atomic<bool> stopping_{false};
  std::uint32_t live_ = 0;
  std::uint32_t parked_ = 0;
  std::uint64_t generation_ = 0;
};

}  // namespace chromatic::verify

#endif  // CHROMATIC_VERIFY_HARNESS_HPP
