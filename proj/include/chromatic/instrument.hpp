#ifndef CHROMATIC_INSTRUMENT_HPP
#define CHROMATIC_INSTRUMENT_HPP

#include <atomic>
#include <cstdint>
#include <string_view>

#include "chromatic/config.hpp"

/// \file
/// Scheduling hook invoked before every shared-memory step of the
/// primitives and the tree operations. Compiled in only when
/// CHROMATIC_INSTRUMENTED is set; release builds pay nothing.

namespace chromatic {

enum class SchedPoint : std::uint8_t {
  kLlxReadMarked,
  kLlxReadInfo,
  kLlxReadState,
  kLlxReadChildren,
  kLlxRecheckInfo,
  kScxPublish,
  kFreeze,
  kFreezeCheck,
  kAllFrozen,
  kMark,
  kUpdateField,
  kCommit,
  kAbort,
  kVlxCheck,
  kReadChild,
  kOpBegin,
  kOpEnd,
};

inline constexpr std::size_t kSchedPointCount =
    static_cast<std::size_t>(SchedPoint::kOpEnd) + 1;

[[nodiscard]] std::string_view to_string(SchedPoint p) noexcept;

class SchedHook {
 public:
  virtual ~SchedHook() = default;
  virtual void at(SchedPoint point) = 0;
};

namespace detail {
inline std::atomic<SchedHook*> g_sched_hook{nullptr};
}  // namespace detail

// Installs the process-wide hook; returns the previous one. Passing nullptr
// uninstalls. The caller keeps ownership.
inline SchedHook* set_sched_hook(SchedHook* hook) noexcept {
  return detail::g_sched_hook.exchange(hook);
}

inline void sched_point([[maybe_unused]] SchedPoint p) {
  if constexpr (kInstrumented) {
    if (auto* h = detail::g_sched_hook.load(std::memory_order_acquire))
      h->at(p);
  }
}

}  // namespace chromatic

#endif  // CHROMATIC_INSTRUMENT_HPP
