#ifndef CHROMATIC_NODE_HPP
#define CHROMATIC_NODE_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>

#include "chromatic/record.hpp"
#include "chromatic/scx.hpp"

namespace chromatic {

using Key = std::int64_t;

// Reserved top key carried by the sentinels. Dictionary keys are < kInfinity.
inline constexpr Key kInfinity = std::numeric_limits<Key>::max();

using Weight = std::uint32_t;

/// Chromatic tree node: a Record whose two mutable fields are the child
/// links, plus an immutable key, weight and (leaves only) value.
template <class V>
struct Node final : Record {
  Node(Key k, std::optional<V> v, Weight w, Node* l = nullptr,
       Node* r = nullptr)
      : Record(l, r), key(k), value(std::move(v)), weight(w) {}

  const Key key;
  const std::optional<V> value;
  const Weight weight;

  [[nodiscard]] Node* left() const {
    return static_cast<Node*>(read_field(this, 0));
  }
  [[nodiscard]] Node* right() const {
    return static_cast<Node*>(read_field(this, 1));
  }
  [[nodiscard]] Node* child(int dir) const {
    return static_cast<Node*>(read_field(this, static_cast<std::size_t>(dir)));
  }
  // Leaves never gain children, so one read decides.
  [[nodiscard]] bool is_leaf() const { return left() == nullptr; }
  [[nodiscard]] bool is_sentinel() const noexcept { return key == kInfinity; }
};

template <class V>
[[nodiscard]] Node<V>* as_node(Record* r) noexcept {
  return static_cast<Node<V>*>(r);
}

}  // namespace chromatic

#endif  // CHROMATIC_NODE_HPP
