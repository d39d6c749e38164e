#ifndef CHROMATIC_VERIFY_ORACLE_HPP
#define CHROMATIC_VERIFY_ORACLE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string_view>
#include <utility>

#include "chromatic/chromatic_map.hpp"
#include "chromatic/node.hpp"

namespace chromatic::verify {

enum class OpKind : std::uint8_t { kGet, kInsert, kDelete, kSuccessor, kPredecessor };

[[nodiscard]] constexpr std::string_view to_string(OpKind k) noexcept {
  switch (k) {
    case OpKind::kGet: return "get";
    case OpKind::kInsert: return "insert";
    case OpKind::kDelete: return "delete";
    case OpKind::kSuccessor: return "successor";
    case OpKind::kPredecessor: return "predecessor";
  }
  return "?";
}

[[nodiscard]] constexpr bool is_update(OpKind k) noexcept {
  return k == OpKind::kInsert || k == OpKind::kDelete;
}

template <class V>
struct Operation {
  OpKind kind = OpKind::kGet;
  Key key = 0;
  V value{};  // insert only

  friend bool operator==(const Operation&, const Operation&) = default;
};

/// Result of one dictionary operation. Get, Insert and Delete report the
/// (previous) value; Successor and Predecessor report a key and its value.
template <class V>
struct OpResult {
  std::optional<Key> key;
  std::optional<V> value;

  friend bool operator==(const OpResult&, const OpResult&) = default;
};

template <class V>
std::ostream& operator<<(std::ostream& os, const OpResult<V>& r) {
  if (!r.value) return os << "absent";
  if (r.key) os << *r.key << ':';
  if constexpr (requires { os << *r.value; }) os << *r.value;
  return os;
}

/// Sequential reference dictionary: the sorted (key, value) sequence and
/// the five operations over it.
template <class V>
class OracleMap {
 public:
  OpResult<V> apply(const Operation<V>& op) {
    OpResult<V> out;
    switch (op.kind) {
      case OpKind::kGet:
        if (auto it = entries_.find(op.key); it != entries_.end()) out.value = it->second;
        break;
      case OpKind::kInsert: {
        auto [it, added] = entries_.try_emplace(op.key, op.value);
        if (!added) {
          out.value = std::exchange(it->second, op.value);
        }
        break;
      }
      case OpKind::kDelete:
        if (auto it = entries_.find(op.key); it != entries_.end()) {
          out.value = std::move(it->second);
          entries_.erase(it);
        }
        break;
      case OpKind::kSuccessor:
        if (auto it = entries_.upper_bound(op.key); it != entries_.end()) {
          out.key = it->first;
          out.value = it->second;
        }
        break;
      case OpKind::kPredecessor:
        if (auto it = entries_.lower_bound(op.key); it != entries_.begin()) {
          --it;
          out.key = it->first;
          out.value = it->second;
        }
        break;
    }
    return out;
  }

  [[nodiscard]] const std::map<Key, V>& entries() const noexcept { return entries_; }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

  friend bool operator==(const OracleMap&, const OracleMap&) = default;
  friend auto operator<=>(const OracleMap& a, const OracleMap& b) {
    return a.entries_ <=> b.entries_;
  }

 private:
  std::map<Key, V> entries_;
};

// Pure form: the state after op, and op's result.
template <class V>
[[nodiscard]] std::pair<OracleMap<V>, OpResult<V>> oracle_apply(OracleMap<V> state,
                                                                const Operation<V>& op) {
  OpResult<V> r = state.apply(op);
  return {std::move(state), std::move(r)};
}

// Runs op against the concurrent map.
template <class V>
OpResult<V> apply_to(ChromaticMap<V>& map, const Operation<V>& op) {
  OpResult<V> out;
  switch (op.kind) {
    case OpKind::kGet: out.value = map.get(op.key); break;
    case OpKind::kInsert: out.value = map.insert(op.key, op.value); break;
    case OpKind::kDelete: out.value = map.erase(op.key); break;
    case OpKind::kSuccessor:
    case OpKind::kPredecessor: {
      auto kv = op.kind == OpKind::kSuccessor ? map.successor(op.key)
                                              : map.predecessor(op.key);
      if (kv) {
        out.key = kv->first;
        out.value = std::move(kv->second);
      }
      break;
    }
  }
  return out;
}

}  // namespace chromatic::verify

#endif  // CHROMATIC_VERIFY_ORACLE_HPP
