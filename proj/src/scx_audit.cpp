#include "chromatic/scx_audit.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace chromatic {

namespace {

constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

struct ShadowNode {
  std::uint64_t child[2] = {0, 0};
  std::uint64_t parent = 0;
  // Reachable after commit s iff born <= s < died.
  std::uint64_t born = 0;
  std::uint64_t died = kNever;
};

class Shadow {
 public:
  std::unordered_map<std::uint64_t, ShadowNode> nodes;
  std::uint64_t entry = 0;

  [[nodiscard]] bool live(std::uint64_t id) const {
    const auto it = nodes.find(id);
    return it != nodes.end() && it->second.died == kNever;
  }

  // Full down-tree walk from the entry; returns an error or "".
  [[nodiscard]] std::string check_all() const {
    std::unordered_set<std::uint64_t> seen;
    std::vector<std::uint64_t> stack{entry};
    while (!stack.empty()) {
      const std::uint64_t id = stack.back();
      stack.pop_back();
      if (!seen.insert(id).second)
        return "record " + std::to_string(id) + " reachable twice";
      const auto it = nodes.find(id);
      if (it == nodes.end() || it->second.died != kNever)
        return "reachable record " + std::to_string(id) + " is not live";
      for (std::uint64_t c : it->second.child)
        if (c != 0) stack.push_back(c);
    }
    const auto live_count = static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(),
                      [](const auto& kv) { return kv.second.died == kNever; }));
    if (live_count != seen.size()) return "live set differs from reachable set";
    return {};
  }
};

std::string id_str(std::uint64_t id) { return std::to_string(id); }

}  // namespace

ScxAuditReport audit_committed_scx(const history::ScxHistory& h,
                                   std::uint64_t full_check_every) {
  ScxAuditReport report;
  auto fail = [&](std::uint64_t seq, std::string msg) {
    report.ok = false;
    report.failing_seq = seq;
    report.message = std::move(msg);
    return report;
  };

  Shadow shadow;
  for (const history::InitialRecord& r : h.initial) {
    if (shadow.entry == 0) shadow.entry = r.id;
    ShadowNode& n = shadow.nodes[r.id];
    n.child[0] = r.left;
    n.child[1] = r.right;
  }
  if (shadow.entry == 0) {
    if (!h.commits.empty()) return fail(0, "commits without initial records");
  } else {
    for (auto& [id, n] : shadow.nodes)
      for (std::uint64_t c : n.child)
        if (c != 0) {
          const auto it = shadow.nodes.find(c);
          if (it == shadow.nodes.end())
            return fail(0, "initial record " + id_str(id) +
                               " points at unknown record " + id_str(c));
          it->second.parent = id;
        }
    if (std::string err = shadow.check_all(); !err.empty())
      return fail(0, "initial tree: " + err);
  }

  for (const history::CommittedScx& c : h.commits) {
    const std::uint64_t seq = c.seq;
    if (c.slot > 1) return fail(seq, "slot out of range");
    if (!shadow.live(c.target))
      return fail(seq, "target " + id_str(c.target) + " is not in the tree");
    ShadowNode& target = shadow.nodes[c.target];
    if (target.child[c.slot] != c.old_value)
      return fail(seq, "slot held " + id_str(target.child[c.slot]) +
                           ", not the expected old value " +
                           id_str(c.old_value));

    // Fresh nodes: never seen before, forming a tree rooted at new.
    std::unordered_map<std::uint64_t, const history::FreshNode*> fresh;
    for (const history::FreshNode& f : c.fresh) {
      if (shadow.nodes.contains(f.id))
        return fail(seq, "record " + id_str(f.id) +
                             " re-added after being in the tree");
      if (!fresh.emplace(f.id, &f).second)
        return fail(seq, "fresh record listed twice");
    }
    if (c.new_value == 0 || !fresh.contains(c.new_value)) {
      if (shadow.nodes.contains(c.new_value))
        return fail(seq, "slot reassigned a previously seen value " +
                             id_str(c.new_value));
      return fail(seq, "new value is not a fresh record");
    }
    std::vector<std::uint64_t> fringe;
    std::unordered_set<std::uint64_t> reached;
    std::vector<std::uint64_t> stack{c.new_value};
    while (!stack.empty()) {
      const std::uint64_t id = stack.back();
      stack.pop_back();
      if (!reached.insert(id).second)
        return fail(seq, "replacement subgraph is not a tree");
      const history::FreshNode* f = fresh.at(id);
      for (std::uint64_t ch : {f->left, f->right}) {
        if (ch == 0) continue;
        if (fresh.contains(ch)) {
          stack.push_back(ch);
        } else {
          if (std::find(fringe.begin(), fringe.end(), ch) != fringe.end())
            return fail(seq, "fringe record " + id_str(ch) + " has two parents");
          fringe.push_back(ch);
        }
      }
    }
    if (reached.size() != fresh.size())
      return fail(seq, "fresh record unreachable from new");

    // Fringe nodes must be live proper descendants of old.
    for (std::uint64_t f : fringe) {
      if (!shadow.live(f))
        return fail(seq, "fringe record " + id_str(f) + " is not in the tree");
      std::uint64_t up = f;
      while (up != 0 && up != c.old_value) up = shadow.nodes[up].parent;
      if (up == 0 || f == c.old_value)
        return fail(seq, "fringe record " + id_str(f) +
                             " is not below the replaced slot");
    }

    // Removed = subtree(old) minus the fringe subtrees.
    std::vector<std::uint64_t> removed;
    if (c.old_value != 0) {
      std::vector<std::uint64_t> walk{c.old_value};
      while (!walk.empty()) {
        const std::uint64_t id = walk.back();
        walk.pop_back();
        if (std::find(fringe.begin(), fringe.end(), id) != fringe.end()) continue;
        removed.push_back(id);
        for (std::uint64_t ch : shadow.nodes[id].child)
          if (ch != 0) walk.push_back(ch);
      }
    }
    std::vector<std::uint64_t> r_sorted = c.removed;
    std::sort(r_sorted.begin(), r_sorted.end());
    std::sort(removed.begin(), removed.end());
    if (removed != r_sorted)
      return fail(seq, "records removed from the tree differ from the R set");

    // Apply.
    for (std::uint64_t id : removed) shadow.nodes[id].died = seq;
    target.child[c.slot] = c.new_value;
    for (const history::FreshNode& f : c.fresh) {
      ShadowNode& n = shadow.nodes[f.id];
      n.child[0] = f.left;
      n.child[1] = f.right;
      n.born = seq;
    }
    shadow.nodes[c.new_value].parent = c.target;
    for (const history::FreshNode& f : c.fresh)
      for (std::uint64_t ch : {f.left, f.right})
        if (ch != 0) shadow.nodes[ch].parent = f.id;
    ++report.commits_replayed;

    if (full_check_every > 0 && (report.commits_replayed % full_check_every == 0 ||
                                 report.commits_replayed == h.commits.size())) {
      if (std::string err = shadow.check_all(); !err.empty()) return fail(seq, err);
    }
  }

  for (const history::TraversalRecord& t : h.traversals) {
    const auto it = shadow.nodes.find(t.node);
    if (it == shadow.nodes.end())
      return fail(0, "traversal reached unknown record " + id_str(t.node));
    if (!(it->second.born <= t.end && it->second.died > t.begin))
      return fail(0, "traversal reached record " + id_str(t.node) +
                         " outside its lifetime");
    ++report.traversals_checked;
  }
  return report;
}

}  // namespace chromatic
