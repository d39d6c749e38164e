#ifndef CHROMATIC_VERIFY_SIMULATOR_HPP
#define CHROMATIC_VERIFY_SIMULATOR_HPP

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "chromatic/chromatic_map.hpp"
#include "chromatic/verify/oracle.hpp"

namespace chromatic::verify {

template <class V>
struct SimulationResult {
  std::string snapshot;
  MapStats stats;
  std::vector<OpResult<V>> results;
  // Updates that changed the key set.
  std::uint64_t inserted = 0;
  std::uint64_t deleted = 0;
  std::uint64_t violations_remaining = 0;
};

/// Runs the script single-threaded against a fresh map with violation
/// threshold k and returns the final tree and counters.
template <class V>
[[nodiscard]] SimulationResult<V> simulate_sequential(std::span<const Operation<V>> script,
                                                      std::uint32_t k) {
  SimulationResult<V> out;
  ChromaticMap<V> map({k, Reclamation::kEpoch});
  out.results.reserve(script.size());
  for (const Operation<V>& op : script) out.results.push_back(apply_to(map, op));
  out.stats = map.stats();
  out.inserted = out.stats.inserted_keys;
  out.deleted = out.stats.deleted_keys;
  out.violations_remaining = map.count_violations();
  out.snapshot = map.snapshot_text();
  return out;
}

struct ScriptMix {
  unsigned insert_pct = 50;
  unsigned delete_pct = 50;
  unsigned get_pct = 0;
  unsigned successor_pct = 0;  // predecessor takes the remainder
};

// Random script over keys [0, key_range); values are the op index.
[[nodiscard]] inline std::vector<Operation<std::int64_t>> random_script(std::size_t length,
                                                                        Key key_range,
                                                                        ScriptMix mix,
                                                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Key> key(0, key_range - 1);
  std::uniform_int_distribution<unsigned> pct(0, 99);
  std::vector<Operation<std::int64_t>> out;
  out.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    const unsigned roll = pct(rng);
    OpKind kind = OpKind::kPredecessor;
    unsigned edge = mix.insert_pct;
    if (roll < edge) kind = OpKind::kInsert;
    else if (roll < (edge += mix.delete_pct)) kind = OpKind::kDelete;
    else if (roll < (edge += mix.get_pct)) kind = OpKind::kGet;
    else if (roll < (edge += mix.successor_pct)) kind = OpKind::kSuccessor;
    out.push_back({kind, key(rng), static_cast<std::int64_t>(i)});
  }
  return out;
}

struct ViolCheck {
  bool ok = true;
  std::uint64_t steps = 0;
  std::string message;
};

/// Runs cleanup(key) one pass at a time on a quiescent map and checks after
/// every pass that no violation left the search path for key without being
/// eliminated: when the path is clear afterwards, the tree-wide count must
/// have dropped by at least the number the path held before. The tree-wide
/// count must never grow.
template <class V>
[[nodiscard]] ViolCheck check_viol_property(ChromaticMap<V>& map, Key key) {
  ViolCheck out;
  for (;;) {
    const std::uint64_t on_path = map.search(key).violations;
    const std::uint64_t total = map.count_violations();
    if (!map.cleanup_pass(key)) {
      if (on_path != 0) {
        out.ok = false;
        out.message = "cleanup stopped with violations on the path";
      }
      return out;
    }
    ++out.steps;
    const std::uint64_t on_path_after = map.search(key).violations;
    const std::uint64_t total_after = map.count_violations();
    if (total_after > total) {
      out.ok = false;
      out.message = "a step increased the violation count";
      return out;
    }
    if (on_path_after == 0 && total_after + on_path > total) {
      out.ok = false;
      out.message = "a violation left the search path without being eliminated";
      return out;
    }
  }
}

/// Applies the script with cleanup disabled, so violations pile up, then
/// clears them key by key through check_viol_property.
template <class V>
[[nodiscard]] ViolCheck simulate_with_pending_violations(std::span<const Operation<V>> script) {
  ChromaticMap<V> map({std::numeric_limits<std::uint32_t>::max(), Reclamation::kEpoch});
  for (const Operation<V>& op : script) apply_to(map, op);
  ViolCheck out;
  for (const Operation<V>& op : script) {
    if (!is_update(op.kind)) continue;
    ViolCheck one = check_viol_property(map, op.key);
    out.steps += one.steps;
    if (!one.ok) return {false, out.steps, one.message};
  }
  map.drain_violations();
  if (map.count_violations() != 0) return {false, out.steps, "violations remain after draining"};
  return out;
}

}  // namespace chromatic::verify

#endif  // CHROMATIC_VERIFY_SIMULATOR_HPP
