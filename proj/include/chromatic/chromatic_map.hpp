#ifndef CHROMATIC_CHROMATIC_MAP_HPP
#define CHROMATIC_CHROMATIC_MAP_HPP

#include <array>
#include <atomic>
#include <cstdint>
#include <iomanip>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chromatic/detail/step_engine.hpp"
#include "chromatic/epoch.hpp"
#include "chromatic/history_log.hpp"
#include "chromatic/instrument.hpp"
#include "chromatic/node.hpp"
#include "chromatic/step_kind.hpp"
#include "chromatic/thread_context.hpp"
#include "chromatic/update_template.hpp"

namespace chromatic {

enum class Reclamation : std::uint8_t {
  // Removed nodes are freed through the epoch reclaimer.
  kEpoch,
  // Removed nodes are kept until the map is destroyed.
  kRetainUntilDestroy,
};

struct MapOptions {
  // Cleanup runs once an update sees more than this many violations on its
  // search path (0 cleans up after every violation-creating update).
  std::uint32_t violation_threshold = 0;
  Reclamation reclamation = Reclamation::kEpoch;
};

struct MapStats {
  std::array<std::uint64_t, kStepKindCount> steps{};
  std::uint64_t inserted_keys = 0;   // inserts that added a new key
  std::uint64_t replaced_keys = 0;   // inserts that replaced a value
  std::uint64_t deleted_keys = 0;    // deletes that removed a key
  std::uint64_t violations_created = 0;
  std::uint64_t cleanups = 0;
  std::uint64_t update_retries = 0;

  [[nodiscard]] std::uint64_t rebalance_steps() const noexcept {
    std::uint64_t total = 0;
    for (std::uint64_t s : steps) total += s;
    return total;
  }
};

/// Counts one Insert/Delete as in flight for its whole duration.
class UpdateInFlight {
 public:
  UpdateInFlight() : ctx_(this_thread_context()) {
    ctx_.updates_in_flight.fetch_add(1);
  }
  ~UpdateInFlight() { ctx_.updates_in_flight.fetch_sub(1); }
  UpdateInFlight(const UpdateInFlight&) = delete;
  UpdateInFlight& operator=(const UpdateInFlight&) = delete;

 private:
  ThreadContext& ctx_;
};

/// Lock-free ordered map from Key (< kInfinity) to V, kept as a leaf-oriented
/// chromatic tree under two key-infinity sentinels:
///
///     empty:      entry -> (leaf inf)
///     non-empty:  entry -> S(inf) -> { chromatic root, (leaf inf) }
///
/// All public operations are safe to call concurrently. Member functions that
/// take or return raw nodes must run under an EpochGuard.
template <class V>
class ChromaticMap {
 public:
  using NodeT = Node<V>;
  using value_type = V;
  static constexpr int kLeft = detail::kLeft;
  static constexpr int kRight = detail::kRight;

  struct SearchResult {
    NodeT* gp = nullptr;
    NodeT* p = nullptr;
    NodeT* l = nullptr;
    // Violations seen on the path, counting w-1 per overweight node and one
    // per red-red pair.
    std::uint32_t violations = 0;
  };
  struct InsertOutcome {
    bool created_violation = false;
    std::optional<V> old_value;
  };
  struct DeleteOutcome {
    std::optional<V> value;
    bool created_violation = false;
    Weight new_weight = 0;
  };

  explicit ChromaticMap(MapOptions options = {})
      : options_(options), stripes_(std::make_unique<Stripe[]>(kStripes)) {
    auto* sentinel_leaf = new NodeT(kInfinity, std::nullopt, 1);
    entry_ = new NodeT(kInfinity, std::nullopt, 1, sentinel_leaf, nullptr);
    if (history::enabled()) {
      history::note_initial(*entry_);
      history::note_initial(*sentinel_leaf);
    }
  }

  ChromaticMap(const ChromaticMap&) = delete;
  ChromaticMap& operator=(const ChromaticMap&) = delete;

  // Requires quiescence.
  ~ChromaticMap() {
    free_subtree(entry_);
    for (NodeT* n : retained_) delete n;
  }

  [[nodiscard]] const MapOptions& options() const noexcept { return options_; }
  [[nodiscard]] NodeT* entry() const noexcept { return entry_; }

  // ---- queries -----------------------------------------------------------

  [[nodiscard]] std::optional<V> get(Key key) const {
    check_key(key);
    EpochGuard guard;
    sched_point(SchedPoint::kOpBegin);
    const bool log = history::enabled();
    const std::uint64_t begin = log ? history::commit_count() : 0;
    const SearchResult s = search(key);
    if (log) history::note_traversal(s.l->id, begin, history::commit_count());
    std::optional<V> out;
    if (s.l->key == key) out = s.l->value;
    sched_point(SchedPoint::kOpEnd);
    return out;
  }

  [[nodiscard]] bool contains(Key key) const { return get(key).has_value(); }

  // Plain-read BST search. gp is null iff the map is empty.
  [[nodiscard]] SearchResult search(Key key) const {
    SearchResult s;
    NodeT* n = entry_;
    for (;;) {
      NodeT* next = key < n->key ? n->left() : n->right();
      if (next == nullptr) break;
      s.gp = s.p;
      s.p = n;
      if (next->weight > 1) s.violations += next->weight - 1;
      if (next->weight == 0 && n->weight == 0) ++s.violations;
      n = next;
    }
    s.l = n;
    return s;
  }

  // Least key greater than `key`, with its value.
  [[nodiscard]] std::optional<std::pair<Key, V>> successor(Key key) const {
    return neighbour(key, kRight);
  }
  // Greatest key less than `key`, with its value.
  [[nodiscard]] std::optional<std::pair<Key, V>> predecessor(Key key) const {
    return neighbour(key, kLeft);
  }

  // ---- updates -----------------------------------------------------------

  // Returns the previous value of key, if any.
  std::optional<V> insert(Key key, V value) {
    check_key(key);
    UpdateInFlight in_flight;
    EpochGuard guard;
    sched_point(SchedPoint::kOpBegin);
    for (;;) {
      const SearchResult s = search(key);
      std::optional<InsertOutcome> r = try_insert(s.p, s.l, key, value);
      if (!r) {
        stripe().retries.fetch_add(1, std::memory_order_relaxed);
        continue;
      }
      if (r->created_violation) {
        stripe().created.fetch_add(1, std::memory_order_relaxed);
        if (s.violations + 1 > options_.violation_threshold) cleanup(key);
      }
      sched_point(SchedPoint::kOpEnd);
      return std::move(r->old_value);
    }
  }

  // Removes key; returns its value if it was present.
  std::optional<V> erase(Key key) {
    check_key(key);
    UpdateInFlight in_flight;
    EpochGuard guard;
    sched_point(SchedPoint::kOpBegin);
    for (;;) {
      const SearchResult s = search(key);
      if (s.l->key != key || s.gp == nullptr) {
        sched_point(SchedPoint::kOpEnd);
        return std::nullopt;
      }
      std::optional<DeleteOutcome> r = try_delete(s.gp, s.p, s.l, key);
      if (!r) {
        stripe().retries.fetch_add(1, std::memory_order_relaxed);
        continue;
      }
      if (r->created_violation) {
        stripe().created.fetch_add(1, std::memory_order_relaxed);
        if (s.violations + (r->new_weight - 1) > options_.violation_threshold)
          cleanup(key);
      }
      sched_point(SchedPoint::kOpEnd);
      return std::move(r->value);
    }
  }

  /// One template attempt to insert under (p, l), where l was the leaf
  /// reached by a search for key. Returns nullopt on Fail.
  std::optional<InsertOutcome> try_insert(NodeT* p, NodeT* l, Key key,
                                          const V& value) {
    TemplateRun run;
    const LlxResult& sp = run.llx(p);
    if (!sp.ok()) return std::nullopt;
    int dir;
    if (sp.left() == l) dir = kLeft;
    else if (sp.right() == l) dir = kRight;
    else return std::nullopt;
    if (!run.llx(l).ok()) return std::nullopt;

    InsertOutcome out;
    NodeT* fresh;
    if (l->key == key) {
      fresh = run.make<NodeT>(key, value, l->weight);
      out.old_value = l->value;
    } else {
      NodeT* added = run.make<NodeT>(key, value, 1);
      NodeT* kept = run.make<NodeT>(l->key, l->value, 1);
      const Weight w = (l->is_sentinel() || p->is_sentinel()) ? 1 : l->weight - 1;
      fresh = key < l->key
                  ? run.make<NodeT>(l->key, std::nullopt, w, added, kept)
                  : run.make<NodeT>(key, std::nullopt, w, kept, added);
      out.created_violation = w == 0 && p->weight == 0;
    }

    ScxArgumentBundle b;
    b.v = {p, l};
    b.r = {l};
    b.parent = p;
    b.slot = static_cast<std::uint8_t>(dir);
    b.new_root = fresh;
    for (Record* r : run.allocated()) b.fresh.push_back(r);
    if (!run.commit(b)) return std::nullopt;
    retire(l);
    if (l->key == key) stripe().replaced.fetch_add(1, std::memory_order_relaxed);
    else stripe().inserted.fetch_add(1, std::memory_order_relaxed);
    return out;
  }

  /// One template attempt to delete leaf l (key) with parent p and
  /// grandparent gp. Returns nullopt on Fail.
  std::optional<DeleteOutcome> try_delete(NodeT* gp, NodeT* p, NodeT* l, Key key) {
    TemplateRun run;
    const LlxResult& sgp = run.llx(gp);
    if (!sgp.ok()) return std::nullopt;
    int pdir;
    if (sgp.left() == p) pdir = kLeft;
    else if (sgp.right() == p) pdir = kRight;
    else return std::nullopt;
    const LlxResult& sp = run.llx(p);
    if (!sp.ok()) return std::nullopt;
    if (sp.left() != l && sp.right() != l) return std::nullopt;
    NodeT* left = as_node<V>(sp.left());
    NodeT* right = as_node<V>(sp.right());
    NodeT* s = left == l ? right : left;
    // Link p's children left to right, matching the order of V.
    if (!run.llx(left).ok() || !run.llx(right).ok()) return std::nullopt;
    const LlxResult* ss = run.link_for(s);

    DeleteOutcome out;
    out.new_weight = (p->is_sentinel() || gp->is_sentinel()) ? 1 : p->weight + s->weight;
    NodeT* fresh = run.make<NodeT>(s->key, s->value, out.new_weight,
                                   as_node<V>(ss->left()), as_node<V>(ss->right()));
    out.value = l->value;
    out.created_violation = out.new_weight > 1;
    (void)key;

    ScxArgumentBundle b;
    b.v = {gp, p, left, right};
    b.r = {p, left, right};
    b.parent = gp;
    b.slot = static_cast<std::uint8_t>(pdir);
    b.new_root = fresh;
    b.fresh = {fresh};
    if (!run.commit(b)) return std::nullopt;
    retire(p);
    retire(left);
    retire(right);
    stripe().deleted.fetch_add(1, std::memory_order_relaxed);
    return out;
  }

  // ---- rebalancing -------------------------------------------------------

  /// Repeatedly walks the search path for key from the entry and applies a
  /// rebalancing step at the first violation, until a walk reaches a leaf
  /// without finding one.
  void cleanup(Key key) {
    stripe().cleanups.fetch_add(1, std::memory_order_relaxed);
    while (cleanup_pass(key)) {
    }
  }

  // One walk of cleanup(key). Returns false when it reached a leaf without
  // finding a violation; otherwise one rebalancing step was attempted.
  bool cleanup_pass(Key key) {
    EpochGuard guard;
    NodeT* ggp = nullptr;
    NodeT* gp = nullptr;
    NodeT* p = nullptr;
    NodeT* l = entry_;
    for (;;) {
      NodeT* next = key < l->key ? l->left() : l->right();
      if (next == nullptr) return false;
      ggp = gp;
      gp = p;
      p = l;
      l = next;
      if (l->weight > 1 || (p->weight == 0 && l->weight == 0)) {
        try_rebalance(ggp, gp, p, l);
        return true;
      }
    }
  }

  /// Chooses and applies (at most) one rebalancing step for the violation at
  /// l. ggp, gp, p, l must be consecutive on a recent walk.
  void try_rebalance(NodeT* ggp, NodeT* gp, NodeT* p, NodeT* l) {
    if (ggp == nullptr) return;
    TemplateRun run;
    detail::StepContext<V> ctx(run, ggp);
    using detail::Path;
    const Path r{};
    const LlxResult* sr = ctx.snap(r);
    if (sr == nullptr) return;
    int x_dir;
    if (sr->left() == gp) x_dir = kLeft;
    else if (sr->right() == gp) x_dir = kRight;
    else return;
    const Path x = r.child(x_dir);
    const LlxResult* sx = ctx.snap(x);
    if (sx == nullptr) return;
    int xx_dir;
    if (sx->left() == p) xx_dir = kLeft;
    else if (sx->right() == p) xx_dir = kRight;
    else return;
    const Path xx = x.child(xx_dir);
    const LlxResult* sxx = ctx.snap(xx);
    if (sxx == nullptr) return;
    int l_dir;
    if (sxx->left() == l) l_dir = kLeft;
    else if (sxx->right() == l) l_dir = kRight;
    else return;

    if (l->weight > 1) {
      if (ctx.snap(xx.child(l_dir)) == nullptr) return;
      overweight(ctx, r, x_dir, xx_dir, l_dir);
      return;
    }
    // Red-red at l. With p on side A of x: BLK if x's other child is red,
    // else RB1 when l is on the same side A of p, RB2 otherwise.
    const int a = xx_dir;
    const bool mirrored = a == kRight;
    NodeT* sibling = ctx.node(x.child(1 - a));
    if (sibling != nullptr && sibling->weight == 0) {
      step(ctx, {StepShape::kBlk, false}, r, x_dir);
    } else if (l_dir == a) {
      step(ctx, {StepShape::kRb1, mirrored}, r, x_dir);
    } else {
      step(ctx, {StepShape::kRb2, mirrored}, r, x_dir);
    }
  }

  /// Applies `kind` with u and its `ux_dir` child ux. Used directly by tests
  /// that build a configuration for a specific step; returns true iff the
  /// step committed.
  bool apply_rebalance_step(StepKind kind, NodeT* u, int ux_dir) {
    EpochGuard guard;
    TemplateRun run;
    detail::StepContext<V> ctx(run, u);
    return step(ctx, kind, detail::Path{}, ux_dir);
  }

  // Runs cleanup for every key below a violation until none remain. Meant
  // for quiescent points; with a nonzero threshold a quiescent tree may
  // legitimately hold violations.
  void drain_violations() {
    EpochGuard guard;
    for (;;) {
      std::vector<Key> keys;
      collect_violation_keys(entry_, nullptr, keys);
      if (keys.empty()) return;
      for (Key k : keys) cleanup(k);
    }
  }

  // ---- inspection --------------------------------------------------------

  [[nodiscard]] MapStats stats() const {
    MapStats out;
    for (std::size_t i = 0; i < kStripes; ++i) {
      const Stripe& s = stripes_[i];
      for (std::size_t k = 0; k < kStepKindCount; ++k)
        out.steps[k] += s.steps[k].load(std::memory_order_relaxed);
      out.inserted_keys += s.inserted.load(std::memory_order_relaxed);
      out.replaced_keys += s.replaced.load(std::memory_order_relaxed);
      out.deleted_keys += s.deleted.load(std::memory_order_relaxed);
      out.violations_created += s.created.load(std::memory_order_relaxed);
      out.cleanups += s.cleanups.load(std::memory_order_relaxed);
      out.update_retries += s.retries.load(std::memory_order_relaxed);
    }
    return out;
  }

  // Number of keys; requires quiescence.
  [[nodiscard]] std::size_t size() const {
    std::size_t n = 0;
    walk(entry_, [&](const NodeT* x) {
      if (x->is_leaf() && !x->is_sentinel()) ++n;
    });
    return n;
  }

  // Violations in the whole tree, counted as in SearchResult. Exact only
  // when no update is running.
  [[nodiscard]] std::uint64_t count_violations() const {
    std::uint64_t total = 0;
    count_below(entry_, total);
    return total;
  }

  /// Line-oriented dump of the tree in pre-order from the entry:
  ///
  ///     node <id> <key|inf> <weight> <leaf|internal> <left-id> <right-id> [value]
  ///
  /// Child ids are 0 for Null; the value of a leaf is written with
  /// std::quoted when V is streamable. Requires quiescence.
  [[nodiscard]] std::string snapshot_text() const {
    std::ostringstream out;
    walk(entry_, [&](const NodeT* x) {
      const NodeT* l = x->left();
      const NodeT* r = x->right();
      out << "node " << x->id << ' ';
      if (x->is_sentinel()) out << "inf";
      else out << x->key;
      out << ' ' << x->weight << ' ' << (l == nullptr ? "leaf" : "internal") << ' '
          << (l ? l->id : 0) << ' ' << (r ? r->id : 0);
      if constexpr (requires(std::ostream& os, const V& v) { os << v; }) {
        if (x->value) {
          std::ostringstream v;
          v << *x->value;
          out << ' ' << std::quoted(v.str());
        }
      }
      out << '\n';
    });
    return out.str();
  }

  /// Replaces the chromatic subtree (the left child of the upper sentinel)
  /// with `root`, a tree built by the caller from fresh nodes. Test-only;
  /// requires quiescence and a map built with kRetainUntilDestroy or kEpoch.
  void install_chromatic_root(NodeT* root) {
    NodeT* old_top = entry_->left();
    NodeT* upper = root == nullptr
                       ? new NodeT(kInfinity, std::nullopt, 1)
                       : new NodeT(kInfinity, std::nullopt, 1, root,
                                   new NodeT(kInfinity, std::nullopt, 1));
    entry_->Record::child[0].store(upper);
    free_subtree(old_top);
  }

 private:
  static constexpr std::size_t kStripes = 16;

  struct alignas(64) Stripe {
    std::array<std::atomic<std::uint64_t>, kStepKindCount> steps{};
    std::atomic<std::uint64_t> inserted{0};
    std::atomic<std::uint64_t> replaced{0};
    std::atomic<std::uint64_t> deleted{0};
    std::atomic<std::uint64_t> created{0};
    std::atomic<std::uint64_t> cleanups{0};
    std::atomic<std::uint64_t> retries{0};
  };

  class Sink final : public detail::StepSink<V> {
   public:
    explicit Sink(ChromaticMap& map) : map_(map) {}
    void retire_removed(std::span<Record* const> removed) override {
      for (Record* r : removed) map_.retire(as_node<V>(r));
    }
    void count_step(StepKind kind) override {
      map_.stripe().steps[index_of(kind)].fetch_add(1, std::memory_order_relaxed);
    }

   private:
    ChromaticMap& map_;
  };

  static void check_key(Key key) {
    if (key == kInfinity)
      throw std::out_of_range("chromatic map keys must be below kInfinity");
  }

  Stripe& stripe() const noexcept {
    return stripes_[this_thread_context().tid % kStripes];
  }

  void retire(NodeT* n) {
    if (options_.reclamation == Reclamation::kEpoch) {
      retire_object(n);
    } else {
      std::lock_guard lock(retained_mutex_);
      retained_.push_back(n);
    }
  }

  bool step(detail::StepContext<V>& ctx, StepKind kind, detail::Path u, int ux_dir) {
    Sink sink(*this);
    return detail::run_step(ctx, kind, u, ux_dir, sink);
  }

  // Overweight violation at l, the l_dir child of xx, which is the xx_dir
  // child of x, the x_dir child of r. Side A is l's side, B the other.
  void overweight(detail::StepContext<V>& ctx, detail::Path r, int x_dir,
                  int xx_dir, int l_dir) {
    const int a = l_dir;
    const int b = 1 - a;
    const bool m = a == kRight;
    const detail::Path x = r.child(x_dir);
    const detail::Path xx = x.child(xx_dir);
    const detail::Path s = xx.child(b);
    NodeT* xx_node = ctx.node(xx);
    NodeT* sib = ctx.node(s);
    if (sib == nullptr) return;

    if (sib->weight == 0) {
      if (xx_node->weight == 0) {
        NodeT* other = ctx.node(x.child(1 - xx_dir));
        if (other == nullptr) return;
        if (other->weight == 0) {
          step(ctx, {StepShape::kBlk, false}, r, x_dir);
        } else if (xx_dir == a) {
          step(ctx, {StepShape::kRb2, m}, r, x_dir);
        } else {
          step(ctx, {StepShape::kRb1, !m}, r, x_dir);
        }
        return;
      }
      const LlxResult* ss = ctx.snap(s);
      if (ss == nullptr) return;
      const detail::Path sa = s.child(a);
      const LlxResult* ssa = ctx.snap(sa);
      if (ssa == nullptr) return;
      NodeT* sa_node = ctx.node(sa);
      if (sa_node->weight > 1) {
        step(ctx, {StepShape::kW1, m}, x, xx_dir);
      } else if (sa_node->weight == 0) {
        step(ctx, {StepShape::kRb2, !m}, x, xx_dir);
      } else {
        NodeT* sab = ctx.node(sa.child(b));
        if (sab == nullptr) return;
        if (sab->weight == 0) {
          step(ctx, {StepShape::kW4, m}, x, xx_dir);
        } else if (ctx.node(sa.child(a))->weight == 0) {
          step(ctx, {StepShape::kW3, m}, x, xx_dir);
        } else {
          step(ctx, {StepShape::kW2, m}, x, xx_dir);
        }
      }
    } else if (sib->weight == 1) {
      if (ctx.snap(s) == nullptr) return;
      NodeT* sb = ctx.node(s.child(b));
      if (sb == nullptr) return;
      if (sb->weight == 0) {
        step(ctx, {StepShape::kW5, m}, x, xx_dir);
      } else if (ctx.node(s.child(a))->weight == 0) {
        step(ctx, {StepShape::kW6, m}, x, xx_dir);
      } else {
        step(ctx, {StepShape::kPush, m}, x, xx_dir);
      }
    } else {
      step(ctx, {StepShape::kW7, m}, x, xx_dir);
    }
  }

  std::optional<std::pair<Key, V>> neighbour(Key key, int dir) const {
    EpochGuard guard;
    sched_point(SchedPoint::kOpBegin);
    std::optional<std::pair<Key, V>> out;
    while (!try_neighbour(key, dir, out)) {
    }
    sched_point(SchedPoint::kOpEnd);
    return out;
  }

  // dir = kRight: successor; kLeft: predecessor. Returns false to restart.
  // The answer is the search leaf itself when it lies beyond key; otherwise
  // it is found by stepping `dir` at the last node where the search turned
  // the other way and then descending toward `back`. Every internal node on
  // both paths is linked and validated together.
  bool try_neighbour(Key key, int dir, std::optional<std::pair<Key, V>>& out) const {
    const int back = 1 - dir;
    std::vector<LlxResult> links;
    std::size_t turn = SIZE_MAX;
    NodeT* l = entry_;
    for (;;) {
      LlxResult s = chromatic::llx(l);
      if (!s.ok()) return false;
      if (s.left() == nullptr) break;
      const int went = l->is_sentinel() || key < l->key ? kLeft : kRight;
      if (went == back) turn = links.size();
      links.push_back(s);
      l = as_node<V>(s.children[went]);
    }
    out.reset();
    const bool beyond = dir == kRight ? key < l->key : l->key < key;
    NodeT* found = nullptr;
    if (beyond) {
      found = l;
    } else if (turn != SIZE_MAX && links[turn].record != entry_) {
      links.erase(links.begin(), links.begin() + static_cast<std::ptrdiff_t>(turn));
      NodeT* n = as_node<V>(links.front().children[dir]);
      for (;;) {
        LlxResult s = chromatic::llx(n);
        if (!s.ok()) return false;
        if (s.left() == nullptr) break;
        links.push_back(s);
        n = as_node<V>(s.children[back]);
      }
      found = n;
    }
    std::vector<const LlxResult*> ptrs;
    ptrs.reserve(links.size());
    for (const LlxResult& x : links) ptrs.push_back(&x);
    if (!vlx(ptrs)) return false;
    if (found != nullptr && !found->is_sentinel()) out.emplace(found->key, *found->value);
    return true;
  }

  template <class F>
  static void walk(NodeT* root, F&& f) {
    std::vector<NodeT*> stack{root};
    while (!stack.empty()) {
      NodeT* x = stack.back();
      stack.pop_back();
      f(x);
      NodeT* r = x->right();
      NodeT* l = x->left();
      if (r) stack.push_back(r);
      if (l) stack.push_back(l);
    }
  }

  static void count_below(NodeT* root, std::uint64_t& total) {
    std::vector<std::pair<NodeT*, NodeT*>> stack{{root, nullptr}};
    while (!stack.empty()) {
      auto [x, parent] = stack.back();
      stack.pop_back();
      if (x->weight > 1) total += x->weight - 1;
      if (parent && parent->weight == 0 && x->weight == 0) ++total;
      if (NodeT* l = x->left()) stack.push_back({l, x});
      if (NodeT* r = x->right()) stack.push_back({r, x});
    }
  }

  // Pre-order; for each violating node, the key of its leftmost leaf (whose
  // search path passes through it).
  static void collect_violation_keys(NodeT* root, NodeT*, std::vector<Key>& keys) {
    std::vector<std::pair<NodeT*, NodeT*>> stack{{root, nullptr}};
    while (!stack.empty()) {
      auto [x, parent] = stack.back();
      stack.pop_back();
      const bool bad = x->weight > 1 || (parent && parent->weight == 0 && x->weight == 0);
      if (bad) {
        NodeT* leaf = x;
        while (NodeT* l = leaf->left()) leaf = l;
        if (!leaf->is_sentinel()) keys.push_back(leaf->key);
      }
      if (NodeT* l = x->left()) stack.push_back({l, x});
      if (NodeT* r = x->right()) stack.push_back({r, x});
    }
  }

  static void free_subtree(NodeT* root) {
    if (root == nullptr) return;
    std::vector<NodeT*> stack{root};
    while (!stack.empty()) {
      NodeT* x = stack.back();
      stack.pop_back();
      if (NodeT* l = x->left()) stack.push_back(l);
      if (NodeT* r = x->right()) stack.push_back(r);
      delete x;
    }
  }

  MapOptions options_;
  NodeT* entry_ = nullptr;
  std::unique_ptr<Stripe[]> stripes_;
  std::mutex retained_mutex_;
  std::vector<NodeT*> retained_;
};

}  // namespace chromatic

#endif  // CHROMATIC_CHROMATIC_MAP_HPP
