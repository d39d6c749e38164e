#ifndef CHROMATIC_DETAIL_STEP_ENGINE_HPP
#define CHROMATIC_DETAIL_STEP_ENGINE_HPP

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <string_view>

#include "chromatic/node.hpp"
#include "chromatic/step_kind.hpp"
#include "chromatic/update_template.hpp"

namespace chromatic::detail {

inline constexpr int kLeft = 0;
inline constexpr int kRight = 1;

/// Position below the root of a StepContext: `depth` moves, each a bit of
/// `code` (most significant first, 0 = left). Ordering by (depth, code) is
/// left-to-right breadth-first order.
struct Path {
  std::uint8_t depth = 0;
  std::uint32_t code = 0;

  [[nodiscard]] constexpr Path child(int dir) const noexcept {
    return {static_cast<std::uint8_t>(depth + 1),
            (code << 1) | static_cast<std::uint32_t>(dir)};
  }
  [[nodiscard]] constexpr Path parent() const noexcept {
    return {static_cast<std::uint8_t>(depth - 1), code >> 1};
  }
  [[nodiscard]] constexpr int last_dir() const noexcept {
    return static_cast<int>(code & 1U);
  }
  friend constexpr bool operator==(Path, Path) = default;
  friend constexpr bool operator<(Path a, Path b) noexcept {
    return a.depth != b.depth ? a.depth < b.depth : a.code < b.code;
  }
};

/// Snapshots of the nodes around a violation, addressed by path from a
/// fixed top node. Each node is linked (LLX) at most once and only when a
/// step first needs it; a child is always taken from its parent's snapshot.
template <class V>
class StepContext {
 public:
  using NodeT = Node<V>;

  StepContext(TemplateRun& run, NodeT* top) : run_(run), top_(top) {}

  [[nodiscard]] TemplateRun& run() noexcept { return run_; }

  // Snapshot of the node at p, linking it if needed; null on Fail/Finalized
  // or when the node does not exist.
  const LlxResult* snap(Path p) {
    for (const Entry& e : entries_)
      if (e.path == p) return e.link;
    NodeT* n = node(p);
    if (n == nullptr || entries_.size() == entries_.capacity()) return nullptr;
    const LlxResult& link = run_.llx(n);
    if (!link.ok()) return nullptr;
    entries_.push_back({p, &link});
    return &link;
  }

  // The node at p as seen by its parent's snapshot. The parent must already
  // be linked (the top node needs nothing).
  [[nodiscard]] NodeT* node(Path p) const {
    if (p.depth == 0) return top_;
    const Path up = p.parent();
    for (const Entry& e : entries_)
      if (e.path == up) return as_node<V>(e.link->children[p.last_dir()]);
    return nullptr;
  }

 private:
  struct Entry {
    Path path;
    const LlxResult* link;
  };
  TemplateRun& run_;
  NodeT* top_;
  SmallVec<Entry, kMaxSigma> entries_;
};

// Hook for disposing of the records a committed step removed.
template <class V>
struct StepSink {
  virtual void retire_removed(std::span<Record* const> removed) = 0;
  virtual void count_step(StepKind kind) = 0;

 protected:
  ~StepSink() = default;
};

/// Builds and commits one transformation. Paths handed to the helpers are
/// written for the plain orientation relative to ux ("" is ux, "rl" its
/// right child's left child) and reflected when the kind is mirrored.
template <class V>
class StepBuilder {
 public:
  using NodeT = Node<V>;

  StepBuilder(StepContext<V>& ctx, Path u, int ux_dir, bool mirrored)
      : ctx_(ctx), u_(u), ux_(u.child(ux_dir)), ux_dir_(ux_dir),
        mirrored_(mirrored) {}

  [[nodiscard]] Path at(std::string_view rel) const {
    Path p = ux_;
    for (char c : rel) p = p.child((c == 'r') != mirrored_ ? kRight : kLeft);
    return p;
  }
  const LlxResult* snap(std::string_view rel) { return ctx_.snap(at(rel)); }
  [[nodiscard]] NodeT* node(std::string_view rel) const { return ctx_.node(at(rel)); }
  [[nodiscard]] NodeT* u() const { return ctx_.node(u_); }

  // Links every listed node; false if any is missing or not a snapshot.
  bool link_all(std::initializer_list<std::string_view> rels) {
    if (ctx_.snap(u_) == nullptr) return false;
    for (std::string_view rel : rels)
      if (snap(rel) == nullptr) return false;
    return true;
  }

  // Weight of the node at rel, or -1 when it does not exist.
  [[nodiscard]] std::int64_t weight(std::string_view rel) const {
    const NodeT* n = node(rel);
    return n == nullptr ? -1 : static_cast<std::int64_t>(n->weight);
  }
  // New internal node keyed like the node at key_rel, with children given
  // in plain orientation.
  NodeT* make(std::string_view key_rel, Weight w, NodeT* first, NodeT* second) {
    const Key key = node(key_rel)->key;
    return mirrored_ ? ctx_.run().template make<NodeT>(key, std::nullopt, w, second, first)
                     : ctx_.run().template make<NodeT>(key, std::nullopt, w, first, second);
  }

  // Fresh copy of a linked node with a new weight.
  NodeT* copy(std::string_view rel, Weight w) {
    const NodeT* n = node(rel);
    const LlxResult* s = snap(rel);
    return ctx_.run().template make<NodeT>(n->key, n->value, w,
                                           as_node<V>(s->children[0]),
                                           as_node<V>(s->children[1]));
  }

  // Weight for a node replacing ux; the chromatic root keeps weight one.
  [[nodiscard]] Weight top_weight(std::int64_t w) const {
    return u()->is_sentinel() ? 1 : static_cast<Weight>(w);
  }

  bool commit(StepKind kind, std::initializer_list<std::string_view> removed,
              NodeT* new_root, StepSink<V>& sink) {
    SmallVec<Path, kMaxScxRecords> paths;
    paths.push_back(u_);
    for (std::string_view rel : removed) paths.push_back(at(rel));
    std::sort(paths.begin(), paths.end());

    ScxArgumentBundle b;
    for (Path p : paths) {
      NodeT* n = ctx_.node(p);
      b.v.push_back(n);
      if (!(p == u_)) b.r.push_back(n);
    }
    b.parent = u();
    b.slot = static_cast<std::uint8_t>(ux_dir_);
    b.new_root = new_root;
    for (Record* r : ctx_.run().allocated()) b.fresh.push_back(r);
    if (!ctx_.run().commit(b)) return false;
    sink.retire_removed({b.r.data(), b.r.size()});
    sink.count_step(kind);
    return true;
  }

 private:
  StepContext<V>& ctx_;
  Path u_;
  Path ux_;
  int ux_dir_;
  bool mirrored_;
};

/// Applies one transformation with u at path `u` of the context and ux its
/// `ux_dir` child. Returns true iff the step committed. The weight pattern
/// the transformation needs is re-checked on the linked snapshots; false is
/// returned when it does not hold or a link fails.
template <class V>
bool run_step(StepContext<V>& ctx, StepKind kind, Path u, int ux_dir,
              StepSink<V>& sink) {
  using NodeT = Node<V>;
  StepBuilder<V> b(ctx, u, ux_dir, kind.mirrored);
  auto w = [&](std::string_view rel) { return b.weight(rel); };

  switch (kind.shape) {
    case StepShape::kBlk: {
      if (!b.link_all({"", "l", "r"})) return false;
      if (w("") < 1 || w("l") != 0 || w("r") != 0) return false;
      NodeT* n = b.make("", b.top_weight(w("") - 1), b.copy("l", 1), b.copy("r", 1));
      return b.commit(kind, {"", "l", "r"}, n, sink);
    }
    case StepShape::kRb1: {
      if (!b.link_all({"", "l"})) return false;
      if (w("l") != 0 || w("ll") != 0) return false;
      NodeT* nr = b.make("", 0, b.node("lr"), b.node("r"));
      NodeT* n = b.make("l", static_cast<Weight>(w("")), b.node("ll"), nr);
      return b.commit(kind, {"", "l"}, n, sink);
    }
    case StepShape::kRb2: {
      if (!b.link_all({"", "l", "lr"})) return false;
      if (w("l") != 0 || w("lr") != 0) return false;
      NodeT* nl = b.make("l", 0, b.node("ll"), b.node("lrl"));
      NodeT* nr = b.make("", 0, b.node("lrr"), b.node("r"));
      NodeT* n = b.make("lr", static_cast<Weight>(w("")), nl, nr);
      return b.commit(kind, {"", "l", "lr"}, n, sink);
    }
    case StepShape::kPush: {
      if (!b.link_all({"", "l", "r"})) return false;
      if (w("l") < 2 || w("r") != 1 || w("rl") < 1 || w("rr") < 1) return false;
      NodeT* n = b.make("", b.top_weight(w("") + 1),
                        b.copy("l", static_cast<Weight>(w("l") - 1)), b.copy("r", 0));
      return b.commit(kind, {"", "l", "r"}, n, sink);
    }
    case StepShape::kW7: {
      if (!b.link_all({"", "l", "r"})) return false;
      if (w("l") < 2 || w("r") < 2) return false;
      NodeT* n = b.make("", b.top_weight(w("") + 1),
                        b.copy("l", static_cast<Weight>(w("l") - 1)),
                        b.copy("r", static_cast<Weight>(w("r") - 1)));
      return b.commit(kind, {"", "l", "r"}, n, sink);
    }
    case StepShape::kW1:
    case StepShape::kW2: {
      if (!b.link_all({"", "l", "r", "rl"})) return false;
      if (w("") < 1 || w("l") < 2 || w("r") != 0) return false;
      Weight rl_weight = 0;
      if (kind.shape == StepShape::kW1) {
        if (w("rl") < 2) return false;
        rl_weight = static_cast<Weight>(w("rl") - 1);
      } else {
        if (w("rl") != 1 || w("rll") < 1 || w("rlr") < 1) return false;
      }
      NodeT* nl = b.make("", 1, b.copy("l", static_cast<Weight>(w("l") - 1)),
                         b.copy("rl", rl_weight));
      NodeT* n = b.make("r", static_cast<Weight>(w("")), nl, b.node("rr"));
      return b.commit(kind, {"", "l", "r", "rl"}, n, sink);
    }
    case StepShape::kW3: {
      if (!b.link_all({"", "l", "r", "rl", "rll"})) return false;
      if (w("") < 1 || w("l") < 2 || w("r") != 0 || w("rl") != 1 ||
          w("rll") != 0 || w("rlr") < 1)
        return false;
      NodeT* nll = b.make("", 1, b.copy("l", static_cast<Weight>(w("l") - 1)),
                          b.node("rlll"));
      NodeT* nlr = b.make("rl", 1, b.node("rllr"), b.node("rlr"));
      NodeT* nl = b.make("rll", 0, nll, nlr);
      NodeT* n = b.make("r", static_cast<Weight>(w("")), nl, b.node("rr"));
      return b.commit(kind, {"", "l", "r", "rl", "rll"}, n, sink);
    }
    case StepShape::kW4: {
      if (!b.link_all({"", "l", "r", "rl", "rlr"})) return false;
      if (w("") < 1 || w("l") < 2 || w("r") != 0 || w("rl") != 1 || w("rlr") != 0)
        return false;
      NodeT* nl = b.make("", 1, b.copy("l", static_cast<Weight>(w("l") - 1)),
                         b.node("rll"));
      NodeT* nrl = b.make("rlr", 1, b.node("rlrl"), b.node("rlrr"));
      NodeT* nr = b.make("r", 0, nrl, b.node("rr"));
      NodeT* n = b.make("rl", static_cast<Weight>(w("")), nl, nr);
      return b.commit(kind, {"", "l", "r", "rl", "rlr"}, n, sink);
    }
    case StepShape::kW5: {
      if (!b.link_all({"", "l", "r", "rr"})) return false;
      if (w("l") < 2 || w("r") != 1 || w("rr") != 0) return false;
      NodeT* nl = b.make("", 1, b.copy("l", static_cast<Weight>(w("l") - 1)),
                         b.node("rl"));
      NodeT* n = b.make("r", static_cast<Weight>(w("")), nl, b.copy("rr", 1));
      return b.commit(kind, {"", "l", "r", "rr"}, n, sink);
    }
    case StepShape::kW6: {
      if (!b.link_all({"", "l", "r", "rl"})) return false;
      if (w("l") < 2 || w("r") != 1 || w("rl") != 0) return false;
      NodeT* nl = b.make("", 1, b.copy("l", static_cast<Weight>(w("l") - 1)),
                         b.node("rll"));
      NodeT* nr = b.make("r", 1, b.node("rlr"), b.node("rr"));
      NodeT* n = b.make("rl", static_cast<Weight>(w("")), nl, nr);
      return b.commit(kind, {"", "l", "r", "rl"}, n, sink);
    }
  }
  return false;
}

}  // namespace chromatic::detail

#endif  // CHROMATIC_DETAIL_STEP_ENGINE_HPP
