#include "chromatic/verify/audit.hpp"

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

namespace chromatic::verify {

namespace {

std::uint64_t parse_u64(const std::string& token, std::string_view what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw std::invalid_argument("snapshot: bad " + std::string(what) + " '" + token + "'");
  return v;
}

SnapshotNode parse_line(const std::string& line) {
  std::istringstream in(line);
  std::string tag, id, key, weight, kind, left, right;
  if (!(in >> tag >> id >> key >> weight >> kind >> left >> right) || tag != "node")
    throw std::invalid_argument("snapshot: malformed line '" + line + "'");
  SnapshotNode n;
  n.id = parse_u64(id, "id");
  if (key == "inf") {
    n.key = kInfinity;
  } else {
    auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), n.key);
    if (ec != std::errc{} || ptr != key.data() + key.size())
      throw std::invalid_argument("snapshot: bad key '" + key + "'");
  }
  n.weight = static_cast<Weight>(parse_u64(weight, "weight"));
  if (kind != "leaf" && kind != "internal")
    throw std::invalid_argument("snapshot: bad node kind '" + kind + "'");
  n.leaf = kind == "leaf";
  n.left = parse_u64(left, "child id");
  n.right = parse_u64(right, "child id");
  std::string value;
  if (in >> std::quoted(value)) n.value = std::move(value);
  return n;
}

class Tree {
 public:
  explicit Tree(std::vector<SnapshotNode> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw std::invalid_argument("snapshot: empty");
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (!index_.emplace(nodes_[i].id, i).second)
        throw std::invalid_argument("snapshot: duplicate id " + std::to_string(nodes_[i].id));
    std::vector<int> in_degree(nodes_.size(), 0);
    for (const SnapshotNode& n : nodes_)
      for (std::uint64_t c : {n.left, n.right})
        if (c != 0 && ++in_degree[at(c)] > 1)
          throw std::invalid_argument("snapshot: node " + std::to_string(c) + " has two parents");
    if (in_degree[0] != 0) throw std::invalid_argument("snapshot: entry has a parent");
  }

  [[nodiscard]] const SnapshotNode& entry() const { return nodes_.front(); }
  [[nodiscard]] const SnapshotNode& node(std::uint64_t id) const { return nodes_[at(id)]; }
  [[nodiscard]] const std::vector<SnapshotNode>& nodes() const { return nodes_; }

 private:
  [[nodiscard]] std::size_t at(std::uint64_t id) const {
    auto it = index_.find(id);
    if (it == index_.end())
      throw std::invalid_argument("snapshot: dangling child id " + std::to_string(id));
    return it->second;
  }

  std::vector<SnapshotNode> nodes_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

void fail(AuditCheck& check, std::initializer_list<std::uint64_t> ids, std::string detail) {
  if (!check.pass) return;
  check.pass = false;
  check.counterexample.assign(ids.begin(), ids.end());
  check.detail = std::move(detail);
}

// Sentinel layout; returns the chromatic root id (0 when empty).
std::uint64_t check_sentinels(const Tree& t, AuditCheck& check) {
  const SnapshotNode& entry = t.entry();
  auto is_sentinel = [](const SnapshotNode& n) { return n.key == kInfinity && n.weight == 1; };
  if (!is_sentinel(entry) || entry.left == 0 || entry.right != 0) {
    fail(check, {entry.id}, "entry must be a weight-1 infinity node with only a left child");
    return 0;
  }
  const SnapshotNode& top = t.node(entry.left);
  if (!is_sentinel(top)) {
    fail(check, {top.id}, "entry's child must be a weight-1 infinity node");
    return 0;
  }
  if (top.leaf) return 0;
  if (top.left == 0 || top.right == 0) {
    fail(check, {top.id}, "upper sentinel must have two children");
    return 0;
  }
  const SnapshotNode& right = t.node(top.right);
  if (!is_sentinel(right) || !right.leaf) {
    fail(check, {right.id}, "upper sentinel's right child must be an infinity leaf");
  }
  return top.left;
}

}  // namespace

std::vector<SnapshotNode> parse_snapshot(std::string_view text) {
  std::vector<SnapshotNode> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(parse_line(line));
  }
  Tree check(out);
  return out;
}

std::string canonical_snapshot(std::string_view text) {
  std::vector<SnapshotNode> nodes = parse_snapshot(text);
  std::unordered_map<std::uint64_t, std::uint64_t> rename{{0, 0}};
  for (std::size_t i = 0; i < nodes.size(); ++i) rename.emplace(nodes[i].id, i + 1);
  std::ostringstream out;
  for (const SnapshotNode& n : nodes) {
    out << "node " << rename.at(n.id) << ' ';
    if (n.key == kInfinity) out << "inf";
    else out << n.key;
    out << ' ' << n.weight << ' ' << (n.leaf ? "leaf" : "internal") << ' '
        << rename.at(n.left) << ' ' << rename.at(n.right);
    if (n.value) out << ' ' << std::quoted(*n.value);
    out << '\n';
  }
  return out.str();
}

AuditReport audit_quiescent(std::string_view snapshot_text, std::uint64_t allowance,
                            const ExpectedLeaves* expected) {
  const Tree t(parse_snapshot(snapshot_text));
  AuditReport r;
  r.allowance = allowance;

  // Arity and violations over the whole tree.
  for (const SnapshotNode& n : t.nodes()) {
    if (&n == &t.entry()) continue;
    if (n.leaf != (n.left == 0) || (n.left == 0) != (n.right == 0))
      fail(r.bst_order, {n.id}, "node must be a leaf or have two children");
    if (n.leaf && n.weight < 1)
      fail(r.equal_weighted_paths, {n.id}, "leaf with weight 0");
    if (!n.leaf && n.value)
      fail(r.bst_order, {n.id}, "internal node carries a value");
  }

  const std::uint64_t root = check_sentinels(t, r.sentinel_shape);
  ExpectedLeaves leaves;
  if (root != 0) {
    struct Frame {
      std::uint64_t id;
      Key lo;  // inclusive, or no bound when lo_open
      Key hi;  // exclusive
      bool lo_open;
      std::uint64_t parent;
      std::uint64_t depth;
      std::uint64_t weight_sum;
    };
    std::optional<std::uint64_t> path_sum;
    std::uint64_t path_leaf = 0;
    std::vector<Frame> stack{{root, 0, kInfinity, true, 0, 1, 0}};
    while (!stack.empty()) {
      const Frame f = stack.back();
      stack.pop_back();
      const SnapshotNode& n = t.node(f.id);
      if ((!f.lo_open && n.key < f.lo) || n.key >= f.hi)
        fail(r.bst_order, {n.id}, "key " + std::to_string(n.key) + " outside its subtree range");
      if (n.weight > 1) r.violations += n.weight - 1;
      if (f.parent != 0 && n.weight == 0 && t.node(f.parent).weight == 0) ++r.violations;
      const std::uint64_t sum = f.weight_sum + n.weight;
      if (n.leaf || n.left == 0 || n.right == 0) {
        ++r.leaves;
        r.height = std::max(r.height, f.depth);
        r.weighted_height = std::max(r.weighted_height, sum);
        if (!path_sum) {
          path_sum = sum;
          path_leaf = n.id;
        } else if (*path_sum != sum) {
          fail(r.equal_weighted_paths, {path_leaf, n.id},
               "weighted path sums " + std::to_string(*path_sum) + " and " +
                   std::to_string(sum) + " differ");
        }
        if (n.leaf) {
          if (!leaves.emplace(n.key, n.value.value_or("")).second)
            fail(r.leaf_set_vs_oracle, {n.id}, "duplicate leaf key " + std::to_string(n.key));
        }
        continue;
      }
      stack.push_back({n.right, n.key, f.hi, false, n.id, f.depth + 1, sum});
      stack.push_back({n.left, f.lo, n.key, f.lo_open, n.id, f.depth + 1, sum});
    }
  }
  // Sentinels can only carry violations if their weights are wrong, which the
  // sentinel check already reports.
  if (r.violations > allowance)
    fail(r.violation_count, {},
         std::to_string(r.violations) + " violations exceed the allowance of " +
             std::to_string(allowance));
  r.violation_count.detail = r.violation_count.pass
                                 ? std::to_string(r.violations) + " violations"
                                 : r.violation_count.detail;
  if (r.height > 2 * r.weighted_height + allowance)
    fail(r.height_vs_weighted_height, {root},
         "height " + std::to_string(r.height) + " > 2*" + std::to_string(r.weighted_height) +
             "+" + std::to_string(allowance));
  if (r.height_vs_weighted_height.pass)
    r.height_vs_weighted_height.detail =
        "h=" + std::to_string(r.height) + " wh=" + std::to_string(r.weighted_height);

  if (expected == nullptr) {
    if (r.leaf_set_vs_oracle.pass) r.leaf_set_vs_oracle.detail = "no oracle supplied";
  } else if (r.leaf_set_vs_oracle.pass) {
    auto a = leaves.begin();
    auto b = expected->begin();
    while (a != leaves.end() || b != expected->end()) {
      if (b == expected->end() || (a != leaves.end() && a->first < b->first)) {
        fail(r.leaf_set_vs_oracle, {}, "unexpected key " + std::to_string(a->first));
        break;
      }
      if (a == leaves.end() || b->first < a->first) {
        fail(r.leaf_set_vs_oracle, {}, "missing key " + std::to_string(b->first));
        break;
      }
      if (a->second != b->second) {
        fail(r.leaf_set_vs_oracle, {},
             "key " + std::to_string(a->first) + " holds '" + a->second + "', expected '" +
                 b->second + "'");
        break;
      }
      ++a;
      ++b;
    }
    if (r.leaf_set_vs_oracle.pass)
      r.leaf_set_vs_oracle.detail = std::to_string(leaves.size()) + " leaves match";
  }
  return r;
}

namespace {

template <class F>
void for_each_check(const AuditReport& r, F&& f) {
  f("bstOrder", r.bst_order);
  f("equalWeightedPaths", r.equal_weighted_paths);
  f("sentinelShape", r.sentinel_shape);
  f("violationCount", r.violation_count);
  f("heightVsWeightedHeight", r.height_vs_weighted_height);
  f("leafSetVsOracle", r.leaf_set_vs_oracle);
}

}  // namespace

std::string AuditReport::to_text() const {
  std::ostringstream out;
  for_each_check(*this, [&](std::string_view name, const AuditCheck& c) {
    out << name << ' ' << (c.pass ? "pass" : "fail");
    if (!c.counterexample.empty()) {
      out << " [";
      for (std::size_t i = 0; i < c.counterexample.size(); ++i)
        out << (i ? "," : "") << c.counterexample[i];
      out << ']';
    }
    if (!c.detail.empty()) out << ' ' << c.detail;
    out << '\n';
  });
  return out.str();
}

std::string AuditReport::to_json_lines() const {
  std::string out;
  for_each_check(*this, [&](std::string_view name, const AuditCheck& c) {
    nlohmann::json j = {{"check", name},
                        {"pass", c.pass},
                        {"counterexample", c.counterexample},
                        {"detail", c.detail}};
    out += j.dump();
    out += '\n';
  });
  return out;
}

}  // namespace chromatic::verify
