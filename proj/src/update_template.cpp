#include "chromatic/update_template.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <deque>
#include <mutex>

namespace chromatic {

namespace {

std::atomic<bool> g_validate{false};
std::atomic<bool> g_purity{false};

std::mutex g_stats_mutex;
std::atomic<std::uint64_t> g_validated{0};
std::atomic<std::uint64_t> g_violating{0};
std::string g_first_failure;

template <class Range>
bool contains(const Range& range, const Record* r) {
  return std::find(range.begin(), range.end(), r) != range.end();
}

// Order-preserving match of `sub` inside `seq`.
template <class A, class B, class Proj>
bool is_subsequence(const A& sub, const B& seq, Proj proj) {
  auto it = seq.begin();
  for (const Record* x : sub) {
    it = std::find_if(it, seq.end(), [&](const auto& e) { return proj(e) == x; });
    if (it == seq.end()) return false;
    ++it;
  }
  return true;
}

struct Edge {
  Record* from;
  Record* to;
};

// Graph over a handful of records; node order is insertion order.
struct SmallGraph {
  std::vector<Record*> nodes;
  std::vector<Edge> edges;

  void add_node(Record* r) {
    if (!contains(nodes, r)) nodes.push_back(r);
  }
  void add_edge(Record* from, Record* to) {
    add_node(from);
    add_node(to);
    edges.push_back({from, to});
  }
  [[nodiscard]] std::size_t in_degree(const Record* r) const {
    return static_cast<std::size_t>(std::count_if(
        edges.begin(), edges.end(), [&](const Edge& e) { return e.to == r; }));
  }

  // Left-to-right breadth-first order from root (edges are added in child
  // order per node).
  [[nodiscard]] std::vector<Record*> bfs(Record* root) const {
    std::vector<Record*> order;
    std::deque<Record*> queue{root};
    while (!queue.empty()) {
      Record* x = queue.front();
      queue.pop_front();
      if (contains(order, x)) continue;
      order.push_back(x);
      for (const Edge& e : edges)
        if (e.from == x) queue.push_back(e.to);
    }
    return order;
  }

  [[nodiscard]] bool is_down_tree_rooted_at(Record* root) const {
    if (!contains(nodes, root) || in_degree(root) != 0) return false;
    for (Record* x : nodes)
      if (x != root && in_degree(x) != 1) return false;
    return bfs(root).size() == nodes.size();
  }

  // The unique node with in-degree zero, if any.
  [[nodiscard]] Record* sole_source() const {
    Record* source = nullptr;
    for (Record* x : nodes) {
      if (in_degree(x) != 0) continue;
      if (source != nullptr) return nullptr;
      source = x;
    }
    return source;
  }
};

// Graph whose edges come from the latest snapshot of each record in `members`;
// the returned fringe holds the children outside `members`.
SmallGraph snapshot_graph(std::span<Record* const> members,
                          std::span<const LlxResult> sigma,
                          std::vector<Record*>& fringe) {
  SmallGraph g;
  for (Record* m : members) {
    g.add_node(m);
    const LlxResult* last = nullptr;
    for (const LlxResult& s : sigma)
      if (s.record == m) last = &s;
    if (last == nullptr) continue;
    for (Record* c : last->children)
      if (c != nullptr) g.add_edge(m, c);
  }
  for (Record* x : g.nodes)
    if (!contains(members, x)) fringe.push_back(x);
  return g;
}

SmallGraph fresh_graph(std::span<Record* const> fresh,
                       std::vector<Record*>& fringe) {
  SmallGraph g;
  for (Record* n : fresh) {
    g.add_node(n);
    for (const auto& c : n->child) {
      Record* child = c.load(std::memory_order_relaxed);
      if (child != nullptr) g.add_edge(n, child);
    }
  }
  for (Record* x : g.nodes)
    if (!contains(fresh, x)) fringe.push_back(x);
  return g;
}

bool same_set(std::vector<Record*> a, std::vector<Record*> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return a == b;
}

}  // namespace

std::string to_string(Postcondition pc) {
  return "PC" + std::to_string(static_cast<int>(pc));
}

std::vector<Postcondition> validate_scx_arguments(
    const ScxArgumentBundle& b, std::span<const LlxResult> sigma,
    std::span<Record* const> allocated) {
  std::vector<Postcondition> out;
  auto fail = [&](Postcondition pc) {
    if (!std::count(out.begin(), out.end(), pc)) out.push_back(pc);
  };

  if (!is_subsequence(b.v, sigma, [](const LlxResult& s) { return s.record; }) ||
      std::any_of(b.v.begin(), b.v.end(), [&](const Record* x) {
        return std::none_of(sigma.begin(), sigma.end(), [&](const LlxResult& s) {
          return s.record == x && s.ok();
        });
      }))
    fail(Postcondition::kPC1);
  if (!is_subsequence(b.r, b.v, [](const Record* x) { return x; }))
    fail(Postcondition::kPC2);
  if (!contains(b.v, b.parent)) fail(Postcondition::kPC3);

  const LlxResult* parent_link = nullptr;
  for (const LlxResult& s : sigma)
    if (s.record == b.parent && s.ok()) parent_link = &s;
  const bool old_known = parent_link != nullptr && b.slot < kArity;
  Record* old = old_known ? parent_link->children[b.slot] : nullptr;

  std::vector<Record*> fringe_n;
  const SmallGraph gn = fresh_graph({b.fresh.data(), b.fresh.size()}, fringe_n);
  if (b.new_root == nullptr || !contains(b.fresh, b.new_root) ||
      !gn.is_down_tree_rooted_at(b.new_root))
    fail(Postcondition::kPC4);

  if (old_known && old == nullptr && (!b.r.empty() || !fringe_n.empty()))
    fail(Postcondition::kPC5);
  if (old_known && old != nullptr && b.r.empty() &&
      !(fringe_n.size() == 1 && fringe_n[0] == old))
    fail(Postcondition::kPC6);

  if (b.new_root == nullptr || !contains(allocated, b.new_root) ||
      std::any_of(b.fresh.begin(), b.fresh.end(),
                  [&](const Record* n) { return !contains(allocated, n); }))
    fail(Postcondition::kPC7);

  std::vector<Record*> sigma_records;
  for (const LlxResult& s : sigma)
    if (!contains(sigma_records, s.record)) sigma_records.push_back(s.record);
  std::vector<Record*> fringe_sigma;
  const SmallGraph gs = snapshot_graph(sigma_records, sigma, fringe_sigma);
  Record* sigma_root = gs.sole_source();
  if (sigma_root != nullptr && gs.is_down_tree_rooted_at(sigma_root)) {
    const std::vector<Record*> order = gs.bfs(sigma_root);
    std::ptrdiff_t prev = -1;
    for (const Record* x : b.v) {
      const auto pos = std::find(order.begin(), order.end(), x) - order.begin();
      if (pos <= prev) {
        fail(Postcondition::kPC8);
        break;
      }
      prev = pos;
    }

    if (!b.r.empty()) {
      std::vector<Record*> fringe_r;
      const SmallGraph gr =
          snapshot_graph({b.r.data(), b.r.size()}, sigma, fringe_r);
      if (!old_known || old == nullptr || !contains(b.r, old) ||
          !gr.is_down_tree_rooted_at(old) || !same_set(fringe_r, fringe_n))
        fail(Postcondition::kPC9);
    }
  }

  std::sort(out.begin(), out.end());
  return out;
}

void set_template_checks(TemplateChecks checks) noexcept {
  g_validate.store(checks.validate_postconditions);
  g_purity.store(checks.purity);
}

TemplateChecks template_checks() noexcept {
  return {g_validate.load(std::memory_order_relaxed),
          g_purity.load(std::memory_order_relaxed)};
}

ValidationStats validation_stats() {
  std::lock_guard lock(g_stats_mutex);
  return {g_validated.load(), g_violating.load(), g_first_failure};
}

void reset_validation_stats() {
  std::lock_guard lock(g_stats_mutex);
  g_validated.store(0);
  g_violating.store(0);
  g_first_failure.clear();
}

TemplateRun::~TemplateRun() {
  for (const Allocation& a : allocated_)
    if (!contains(published_, a.record)) a.deleter(a.record);
}

const LlxResult& TemplateRun::llx(Record* r) {
  static const LlxResult kOverflow{};
  if (sigma_.size() == sigma_.capacity()) return kOverflow;
  sigma_.push_back(chromatic::llx(r));
  return sigma_.back();
}

const LlxResult* TemplateRun::link_for(const Record* r) const noexcept {
  for (auto it = sigma_.rbegin(); it != sigma_.rend(); ++it)
    if (it->record == r) return &*it;
  return nullptr;
}

// Makes V a subsequence of sigma: a record whose latest LLX precedes that of
// an earlier member of V is linked again. The update was computed from the
// older snapshot, so the new one must show the same children.
bool TemplateRun::order_links(const ScxArgumentBundle& b) {
  std::ptrdiff_t prev = -1;
  for (Record* x : b.v) {
    std::ptrdiff_t pos = -1;
    for (std::size_t i = 0; i < sigma_.size(); ++i)
      if (sigma_[i].record == x) pos = static_cast<std::ptrdiff_t>(i);
    if (pos < 0) return false;
    if (pos <= prev) {
      if (sigma_.size() == sigma_.capacity()) return false;
      const auto before = sigma_[static_cast<std::size_t>(pos)].children;
      const LlxResult& again = llx(x);
      if (!again.ok() || again.children != before) return false;
      pos = static_cast<std::ptrdiff_t>(sigma_.size()) - 1;
    }
    prev = pos;
  }
  return true;
}

std::vector<Record*> TemplateRun::allocated() const {
  std::vector<Record*> out;
  out.reserve(allocated_.size());
  for (const Allocation& a : allocated_) out.push_back(a.record);
  return out;
}

bool TemplateRun::commit(const ScxArgumentBundle& b) {
  assert(!committed_);
  if (!order_links(b)) return false;
  std::vector<Postcondition> violations;
  const bool validate = g_validate.load(std::memory_order_relaxed);
  if (validate) {
    const std::vector<Record*> mine = allocated();
    violations = validate_scx_arguments(b, sigma(), mine);
  }

  SmallVec<const LlxResult*, kMaxScxRecords> links;
  std::uint32_t finalize_mask = 0;
  std::uint8_t target = 0;
  for (std::size_t i = 0; i < b.v.size(); ++i) {
    const LlxResult* link = link_for(b.v[i]);
    if (link == nullptr || !link->ok()) return false;
    links.push_back(link);
    if (contains(b.r, b.v[i])) finalize_mask |= 1U << i;
    if (b.v[i] == b.parent) target = static_cast<std::uint8_t>(i);
  }
  assert(contains(b.v, b.parent));

  ScxRequest request;
  request.links = {links.data(), links.size()};
  request.finalize_mask = finalize_mask;
  request.target = target;
  request.slot = b.slot;
  request.new_value = b.new_root;
  request.fresh = {b.fresh.data(), b.fresh.size()};
  if (!scx(request)) return false;

  committed_ = true;
  published_.assign(b.fresh.begin(), b.fresh.end());
  if (validate) {
    g_validated.fetch_add(1);
    if (!violations.empty()) {
      g_violating.fetch_add(1);
      std::lock_guard lock(g_stats_mutex);
      if (g_first_failure.empty()) {
        for (Postcondition pc : violations) g_first_failure += to_string(pc) + " ";
        g_first_failure += "on a commit with |V|=" + std::to_string(b.v.size());
      }
    }
  }
  return true;
}

namespace detail {

namespace {
// Canonical encoding of G_N: fresh nodes numbered in BFS order, fringe nodes
// by identity.
std::vector<std::uintptr_t> shape_code(const ScxArgumentBundle& b) {
  std::vector<std::uintptr_t> code;
  std::vector<Record*> order;
  std::deque<Record*> queue{b.new_root};
  while (!queue.empty()) {
    Record* x = queue.front();
    queue.pop_front();
    if (x == nullptr || !contains(b.fresh, x) || contains(order, x)) continue;
    order.push_back(x);
    for (const auto& c : x->child) {
      Record* child = c.load(std::memory_order_relaxed);
      if (child == nullptr) {
        code.push_back(0);
      } else if (contains(b.fresh, child)) {
        code.push_back(1);
        queue.push_back(child);
      } else {
        code.push_back(2);
        code.push_back(reinterpret_cast<std::uintptr_t>(child));
      }
    }
  }
  code.push_back(order.size());
  return code;
}
}  // namespace

bool same_scx_shape(const ScxArgumentBundle& a, const ScxArgumentBundle& b) {
  return std::equal(a.v.begin(), a.v.end(), b.v.begin(), b.v.end()) &&
         std::equal(a.r.begin(), a.r.end(), b.r.begin(), b.r.end()) &&
         a.parent == b.parent && a.slot == b.slot &&
         a.fresh.size() == b.fresh.size() && shape_code(a) == shape_code(b);
}

bool is_snapshot_child(std::span<const LlxResult> sigma, const Record* r) {
  return std::any_of(sigma.begin(), sigma.end(), [&](const LlxResult& s) {
    return std::find(s.children.begin(), s.children.end(), r) !=
           s.children.end();
  });
}

}  // namespace detail

}  // namespace chromatic
