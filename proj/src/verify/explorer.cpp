#include "chromatic/verify/explorer.hpp"

#include <ucontext.h>

#include <algorithm>
#include <array>
#include <exception>
#include <stdexcept>

#include "chromatic/instrument.hpp"
#include "chromatic/thread_context.hpp"

namespace chromatic::verify {

namespace {

constexpr std::size_t kMaxFibers = 8;

struct Options {
  std::array<std::uint32_t, kMaxFibers> ids{};
  std::size_t size = 0;

  void push_back(std::uint32_t id) noexcept { ids[size++] = id; }
  friend bool operator==(const Options& a, const Options& b) noexcept {
    return a.size == b.size && std::equal(a.ids.begin(), a.ids.begin() + static_cast<std::ptrdiff_t>(a.size), b.ids.begin());
  }
};

struct ChoicePoint {
  Options options;
  std::size_t next = 0;
};

}  // namespace

// Scheduling decisions are taken inside the hook on the running fiber; a
// context switch happens only when a different thread is chosen.
class ScheduleExplorer::Impl final : public SchedHook {
 public:
  explicit Impl(ExplorerOptions options) : options_(options) {}

  ~Impl() override {
    for (ThreadContext* ctx : contexts_) release_thread_context(ctx);
  }

  ExplorationStats explore(const Program& program) {
    if (!kInstrumented)
      throw std::logic_error("schedule exploration needs the instrumented build");
    prepare(program.threads);
    ExplorationStats stats;
    tree_.clear();
    for (;;) {
      if (program.setup) program.setup();
      run_once(program);
      ++stats.runs;
      stats.max_choice_points = std::max<std::uint64_t>(stats.max_choice_points, depth_);
      stats.max_steps = std::max(stats.max_steps, steps_);
      std::string failure = program.check ? program.check() : std::string{};
      if (failure.empty() && !error_.empty()) failure = error_;
      if (!failure.empty()) {
        stats.failed = true;
        stats.failing_schedule = taken_;
        stats.failure = std::move(failure);
        return stats;
      }
      while (!tree_.empty() && tree_.back().next + 1 >= tree_.back().options.size)
        tree_.pop_back();
      if (tree_.empty()) {
        stats.exhausted = true;
        return stats;
      }
      ++tree_.back().next;
      if (options_.max_runs != 0 && stats.runs >= options_.max_runs) return stats;
    }
  }

  void at(SchedPoint) override {
    if (current_ < 0) return;
    ++steps_;
    const int next = decide();
    if (next != current_) switch_from(current_, next);
  }

 private:
  struct Fiber {
    ucontext_t context{};
    std::vector<char> stack;
    bool finished = true;
  };

  void prepare(std::size_t threads) {
    if (threads == 0 || threads > kMaxFibers)
      throw std::invalid_argument("explorer supports 1 to 8 threads");
    while (contexts_.size() < threads) contexts_.push_back(acquire_thread_context());
    fibers_.resize(threads);
    for (Fiber& f : fibers_) f.stack.resize(options_.fiber_stack_bytes);
  }

  // Picks the thread to run next, replaying or extending the choice tree.
  // Returns -1 when every thread has finished.
  int decide() {
    Options options;
    const bool last_runnable = current_ >= 0 && !fibers_[static_cast<std::size_t>(current_)].finished;
    if (last_runnable) options.push_back(static_cast<std::uint32_t>(current_));
    if (!last_runnable || preemptions_ < options_.preemption_bound) {
      for (std::uint32_t i = 0; i < fibers_.size(); ++i)
        if (!fibers_[i].finished && static_cast<int>(i) != current_) options.push_back(i);
    }
    if (options.size == 0) return -1;
    std::uint32_t chosen = options.ids[0];
    if (options.size > 1) {
      if (depth_ == tree_.size()) tree_.push_back({options, 0});
      ChoicePoint& cp = tree_[depth_];
      if (!(cp.options == options)) {
        if (error_.empty()) error_ = "schedule replay diverged";
        cp = {options, 0};
      }
      chosen = cp.options.ids[cp.next];
      taken_.push_back(chosen);
      ++depth_;
    }
    if (last_runnable && static_cast<int>(chosen) != current_) ++preemptions_;
    return static_cast<int>(chosen);
  }

  // Leaves fiber `from` (or the scheduler when from < 0) for `to` (or the
  // scheduler when to < 0).
  void switch_from(int from, int to) {
    ucontext_t* save = from < 0 ? &scheduler_ : &fibers_[static_cast<std::size_t>(from)].context;
    current_ = to;
    if (to < 0) {
      swap_current_thread_context(outer_);
      swapcontext(save, &scheduler_);
      return;
    }
    swap_current_thread_context(contexts_[static_cast<std::size_t>(to)]);
    swapcontext(save, &fibers_[static_cast<std::size_t>(to)].context);
  }

  static void trampoline(unsigned hi, unsigned lo) {
    auto* self = reinterpret_cast<Impl*>((static_cast<std::uintptr_t>(hi) << 32) |
                                         static_cast<std::uintptr_t>(lo));
    const int index = self->current_;
    try {
      self->program_->body(static_cast<std::uint32_t>(index));
    } catch (const std::exception& e) {
      if (self->error_.empty()) self->error_ = std::string("thread body threw: ") + e.what();
    }
    self->fibers_[static_cast<std::size_t>(index)].finished = true;
    self->switch_from(index, self->decide());
  }

  void run_once(const Program& program) {
    program_ = &program;
    error_.clear();
    taken_.clear();
    depth_ = 0;
    preemptions_ = 0;
    steps_ = 0;
    const auto self = reinterpret_cast<std::uintptr_t>(this);
    for (Fiber& f : fibers_) {
      getcontext(&f.context);
      f.context.uc_stack.ss_sp = f.stack.data();
      f.context.uc_stack.ss_size = f.stack.size();
      f.context.uc_link = nullptr;
      makecontext(&f.context, reinterpret_cast<void (*)()>(&Impl::trampoline), 2,
                  static_cast<unsigned>(self >> 32), static_cast<unsigned>(self & 0xffffffffU));
      f.finished = false;
    }
    SchedHook* previous_hook = set_sched_hook(this);
    outer_ = swap_current_thread_context(nullptr);
    swap_current_thread_context(outer_);
    current_ = -1;
    const int first = decide();
    switch_from(-1, first);
    set_sched_hook(previous_hook);
  }

  ExplorerOptions options_;
  std::vector<ThreadContext*> contexts_;
  std::vector<Fiber> fibers_;
  ucontext_t scheduler_{};
  ThreadContext* outer_ = nullptr;
  const Program* program_ = nullptr;

  std::vector<ChoicePoint> tree_;
  std::vector<std::uint32_t> taken_;
  std::size_t depth_ = 0;
  std::size_t preemptions_ = 0;
  std::uint64_t steps_ = 0;
  int current_ = -1;
  std::string error_;
};

ScheduleExplorer::ScheduleExplorer(ExplorerOptions options)
    : impl_(std::make_unique<Impl>(options)) {}

ScheduleExplorer::~ScheduleExplorer() = default;

ExplorationStats ScheduleExplorer::explore(const Program& program) {
  return impl_->explore(program);
}

}  // namespace chromatic::verify
