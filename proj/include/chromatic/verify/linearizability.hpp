#ifndef CHROMATIC_VERIFY_LINEARIZABILITY_HPP
#define CHROMATIC_VERIFY_LINEARIZABILITY_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "chromatic/verify/oracle.hpp"

namespace chromatic::verify {

using Timestamp = std::uint64_t;
inline constexpr Timestamp kPending = std::numeric_limits<Timestamp>::max();

template <class V>
struct HistoryEvent {
  std::uint32_t thread = 0;
  Operation<V> op;
  Timestamp invoke = 0;
  Timestamp response = kPending;
  OpResult<V> result;
};

template <class V>
using History = std::vector<HistoryEvent<V>>;

/// Collects events from concurrently running threads against one logical
/// clock. invoke() and respond() bracket each operation.
template <class V>
class HistoryRecorder {
 public:
  std::size_t invoke(std::uint32_t thread, const Operation<V>& op) {
    std::lock_guard lock(mutex_);
    events_.push_back({thread, op, clock_++, kPending, {}});
    return events_.size() - 1;
  }
  void respond(std::size_t event, OpResult<V> result) {
    std::lock_guard lock(mutex_);
    events_[event].response = clock_++;
    events_[event].result = std::move(result);
  }
  [[nodiscard]] History<V> take() {
    std::lock_guard lock(mutex_);
    clock_ = 0;
    return std::exchange(events_, {});
  }

 private:
  std::mutex mutex_;
  Timestamp clock_ = 0;
  History<V> events_;
};

// Checks each thread's events are sequential and complete.
template <class V>
[[nodiscard]] bool well_formed(const History<V>& h) {
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i].response == kPending || h[i].response <= h[i].invoke) return false;
    for (std::size_t j = i + 1; j < h.size(); ++j) {
      if (h[i].thread != h[j].thread) continue;
      const bool disjoint = h[i].response < h[j].invoke || h[j].response < h[i].invoke;
      if (!disjoint) return false;
    }
  }
  return true;
}

struct CheckLimits {
  std::size_t max_threads = 4;
  std::size_t max_events = 48;
};

enum class Verdict : std::uint8_t { kLinearizable, kNotLinearizable, kScopeExceeded, kMalformed };

struct LinearizabilityResult {
  Verdict verdict = Verdict::kMalformed;
  // Event indices in a valid linearization order (kLinearizable only).
  std::vector<std::size_t> witness;
  std::string message;
  std::uint64_t states_explored = 0;

  [[nodiscard]] bool ok() const noexcept { return verdict == Verdict::kLinearizable; }
};

/// Exhaustive search for a linearization: an order of all events that
/// respects real-time precedence and replays on OracleMap with identical
/// results. Depth-first over the minimal pending events, memoizing visited
/// (linearized set, oracle state) pairs. The map starts as `initial`.
template <class V>
[[nodiscard]] LinearizabilityResult check_linearizable(const History<V>& h,
                                                       const OracleMap<V>& initial = {},
                                                       CheckLimits limits = {}) {
  LinearizabilityResult out;
  if (!well_formed(h)) {
    out.message = "history is not well formed";
    return out;
  }
  std::set<std::uint32_t> threads;
  for (const auto& e : h) threads.insert(e.thread);
  if (h.size() > limits.max_events || h.size() > 64 || threads.size() > limits.max_threads) {
    out.verdict = Verdict::kScopeExceeded;
    out.message = "history exceeds the exhaustive scope; use sampled checking instead";
    return out;
  }

  const std::size_t n = h.size();
  const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  std::set<std::pair<std::uint64_t, OracleMap<V>>> dead;
  std::vector<std::size_t> order;

  auto search = [&](auto& self, std::uint64_t done, const OracleMap<V>& state) -> bool {
    if (done == all) return true;
    if (dead.contains({done, state})) return false;
    ++out.states_explored;
    Timestamp horizon = kPending;
    for (std::size_t i = 0; i < n; ++i)
      if (!(done >> i & 1)) horizon = std::min(horizon, h[i].response);
    for (std::size_t i = 0; i < n; ++i) {
      if ((done >> i & 1) || h[i].invoke > horizon) continue;
      OracleMap<V> next = state;
      if (!(next.apply(h[i].op) == h[i].result)) continue;
      order.push_back(i);
      if (self(self, done | std::uint64_t{1} << i, next)) return true;
      order.pop_back();
    }
    dead.insert({done, state});
    return false;
  };

  if (search(search, 0, initial)) {
    out.verdict = Verdict::kLinearizable;
    out.witness = std::move(order);
  } else {
    out.verdict = Verdict::kNotLinearizable;
    out.message = "no linearization exists";
  }
  return out;
}

template <class V>
[[nodiscard]] std::string describe(const History<V>& h) {
  std::ostringstream os;
  for (const auto& e : h) {
    os << "t" << e.thread << " [" << e.invoke << "," << e.response << "] "
       << to_string(e.op.kind) << '(' << e.op.key;
    if (e.op.kind == OpKind::kInsert) {
      if constexpr (requires { os << e.op.value; }) os << ',' << e.op.value;
    }
    os << ") -> " << e.result << '\n';
  }
  return os.str();
}

}  // namespace chromatic::verify

#endif  // CHROMATIC_VERIFY_LINEARIZABILITY_HPP
