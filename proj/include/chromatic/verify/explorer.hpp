#ifndef CHROMATIC_VERIFY_EXPLORER_HPP
#define CHROMATIC_VERIFY_EXPLORER_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace chromatic::verify {

struct ExplorerOptions {
  std::size_t preemption_bound = 4;
  // Stop after this many runs (0 = run until the space is exhausted).
  std::uint64_t max_runs = 0;
  std::size_t fiber_stack_bytes = 256 * 1024;
};

struct ExplorationStats {
  std::uint64_t runs = 0;
  std::uint64_t max_choice_points = 0;
  std::uint64_t max_steps = 0;
  // True when every schedule within the bound was run.
  bool exhausted = false;
  // Set when a run's check failed; the schedule is the thread chosen at
  // each choice point of that run.
  bool failed = false;
  std::vector<std::uint32_t> failing_schedule;
  std::string failure;
};

/// Runs logical threads as fibers on the calling OS thread and switches
/// between them only at instrumentation points, so every run is one
/// deterministic interleaving. explore() enumerates the interleavings
/// depth-first: at each point where more than one thread can run it tries
/// continuing the current thread first, then each other thread, counting a
/// switch away from a runnable thread against the preemption bound.
///
/// Requires the instrumented build; each logical thread gets its own
/// ThreadContext for the duration of explore().
class ScheduleExplorer {
 public:
  struct Program {
    std::size_t threads = 2;
    // Runs before each schedule, outside any fiber, with no hook installed.
    std::function<void()> setup;
    // Body of logical thread i.
    std::function<void(std::uint32_t)> body;
    // Runs after each schedule; return a non-empty string to report failure
    // and stop.
    std::function<std::string()> check;
  };

  explicit ScheduleExplorer(ExplorerOptions options = {});
  ~ScheduleExplorer();
  ScheduleExplorer(const ScheduleExplorer&) = delete;
  ScheduleExplorer& operator=(const ScheduleExplorer&) = delete;

  ExplorationStats explore(const Program& program);

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace chromatic::verify

#endif  // CHROMATIC_VERIFY_EXPLORER_HPP
