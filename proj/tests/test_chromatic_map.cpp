#include <cmath>
#include <map>
#include <random>
#include <string>

#include "chromatic/chromatic_map.hpp"
#include "chromatic/verify/audit.hpp"
#include "chromatic/verify/step_configs.hpp"
#include "doctest.h"

using namespace chromatic;
using Map = ChromaticMap<int>;
using N = Node<int>;

namespace {

N* leaf(Key k, Weight w = 1) { return new N(k, static_cast<int>(k), w); }
N* inner(Key k, Weight w, N* l, N* r) { return new N(k, std::nullopt, w, l, r); }

std::uint64_t steps_of(const Map& m, StepShape shape, bool mirrored = false) {
  return m.stats().steps[index_of({shape, mirrored})];
}

void require_clean(const Map& m) {
  const verify::AuditReport r = verify::audit_quiescent(m.snapshot_text());
  INFO(r.to_text());
  REQUIRE(r.ok());
}

std::vector<Key> leaf_keys(const std::string& snapshot) {
  const auto nodes = verify::parse_snapshot(snapshot);
  std::map<std::uint64_t, const verify::SnapshotNode*> by_id;
  for (const auto& n : nodes) by_id[n.id] = &n;
  std::vector<Key> out;
  std::vector<std::uint64_t> stack{nodes.front().id};
  while (!stack.empty()) {
    const auto* n = by_id.at(stack.back());
    stack.pop_back();
    if (n->leaf) {
      if (n->key != kInfinity) out.push_back(n->key);
      continue;
    }
    if (n->right) stack.push_back(n->right);
    if (n->left) stack.push_back(n->left);
  }
  return out;
}

}  // namespace

TEST_CASE("empty map: get, delete and successor are absent") {
  Map m;
  CHECK_FALSE(m.get(5));
  CHECK_FALSE(m.erase(5));
  CHECK_FALSE(m.successor(5));
  CHECK_FALSE(m.predecessor(5));
  CHECK(m.size() == 0);
  const Map::SearchResult s = m.search(5);
  CHECK(s.gp == nullptr);
  CHECK(s.p == m.entry());
  CHECK(s.l->is_sentinel());
  CHECK(s.l->is_leaf());
  require_clean(m);
}

TEST_CASE("insert, replace and delete a single key") {
  Map m;
  CHECK_FALSE(m.insert(5, 1));
  CHECK(m.get(5) == 1);
  const Map::SearchResult s = m.search(5);
  REQUIRE(s.gp == m.entry());
  CHECK(s.p->is_sentinel());
  CHECK(s.l->key == 5);
  CHECK(m.entry()->right() == nullptr);
  CHECK(m.insert(5, 2) == 1);
  CHECK(m.get(5) == 2);
  CHECK(m.erase(5) == 2);
  CHECK_FALSE(m.get(5));
  CHECK(m.search(5).gp == nullptr);
  require_clean(m);
}

TEST_CASE("delete of an absent key in a non-empty map") {
  Map m;
  (void)m.insert(3, 3);
  CHECK_FALSE(m.erase(4));
  CHECK(m.size() == 1);
}

TEST_CASE("successor and predecessor examples") {
  Map m;
  (void)m.insert(5, 50);
  CHECK(m.successor(3) == std::pair<Key, int>{5, 50});
  CHECK_FALSE(m.successor(5));
  CHECK(m.predecessor(7) == std::pair<Key, int>{5, 50});
  CHECK_FALSE(m.predecessor(5));
  for (Key k : {3, 9}) (void)m.insert(k, static_cast<int>(k) * 10);
  CHECK(m.successor(5)->first == 9);
  CHECK(m.predecessor(5)->first == 3);
  CHECK(m.successor(4)->first == 5);
  CHECK_FALSE(m.successor(9));
}

TEST_CASE("try_insert weights") {
  SUBCASE("under a sentinel leaf the new node has weight one") {
    Map m;
    const Map::SearchResult s = m.search(5);
    const auto out = m.try_insert(s.p, s.l, 5, 1);
    REQUIRE(out);
    CHECK_FALSE(out->created_violation);
    CHECK_FALSE(out->old_value);
    N* top = m.entry()->left();
    CHECK(top->is_sentinel());
    CHECK(top->weight == 1);
    CHECK(top->left()->key == 5);
    CHECK(top->left()->weight == 1);
    CHECK(top->right()->weight == 1);
  }
  SUBCASE("under a black leaf with a black parent: weight zero, no violation") {
    Map m({0, Reclamation::kRetainUntilDestroy});
    m.install_chromatic_root(inner(20, 1, leaf(10), leaf(20)));
    const Map::SearchResult s = m.search(15);
    REQUIRE(s.l->key == 10);
    const auto out = m.try_insert(s.p, s.l, 15, 1);
    REQUIRE(out);
    CHECK_FALSE(out->created_violation);
    N* added = s.p->left();
    CHECK(added->weight == 0);
    CHECK(added->key == 15);
    CHECK(added->left()->weight == 1);
    CHECK(added->right()->weight == 1);
    require_clean(m);
  }
  SUBCASE("under a red parent: red-red violation") {
    Map m({0, Reclamation::kRetainUntilDestroy});
    m.install_chromatic_root(inner(20, 1, inner(10, 0, leaf(5), leaf(10)), leaf(20)));
    const Map::SearchResult s = m.search(7);
    REQUIRE(s.p->weight == 0);
    const auto out = m.try_insert(s.p, s.l, 7, 1);
    REQUIRE(out);
    CHECK(out->created_violation);
    CHECK(m.count_violations() == 1);
  }
  SUBCASE("existing key keeps the leaf's weight") {
    Map m({0, Reclamation::kRetainUntilDestroy});
    m.install_chromatic_root(inner(20, 1, leaf(10, 2), leaf(20, 2)));
    const Map::SearchResult s = m.search(10);
    const auto out = m.try_insert(s.p, s.l, 10, 99);
    REQUIRE(out);
    CHECK(out->old_value == 10);
    CHECK(s.p->left()->weight == 2);
    CHECK(s.p->left()->value == 99);
  }
}

TEST_CASE("try_delete weights") {
  SUBCASE("red sibling: weight one, no violation") {
    Map m({0, Reclamation::kRetainUntilDestroy});
    m.install_chromatic_root(inner(30, 1, inner(10, 1, leaf(5), inner(20, 0, leaf(10), leaf(20))),
                                   inner(40, 1, leaf(30), leaf(40))));
    const Map::SearchResult s = m.search(5);
    const auto out = m.try_delete(s.gp, s.p, s.l, 5);
    REQUIRE(out);
    CHECK(out->value == 5);
    CHECK(out->new_weight == 1);
    CHECK_FALSE(out->created_violation);
    require_clean(m);
  }
  SUBCASE("black sibling: weight two, one overweight violation") {
    Map m({0, Reclamation::kRetainUntilDestroy});
    m.install_chromatic_root(inner(20, 1, inner(10, 1, leaf(5), leaf(10)),
                                   inner(30, 1, leaf(20), leaf(30))));
    const Map::SearchResult s = m.search(5);
    const auto out = m.try_delete(s.gp, s.p, s.l, 5);
    REQUIRE(out);
    CHECK(out->new_weight == 2);
    CHECK(out->created_violation);
    CHECK(m.count_violations() == 1);
    m.cleanup(10);
    CHECK(m.count_violations() == 0);
    require_clean(m);
  }
  SUBCASE("sentinel parent: weight forced to one") {
    Map m;
    (void)m.insert(5, 5);
    const Map::SearchResult s = m.search(5);
    REQUIRE(s.p->is_sentinel());
    const auto out = m.try_delete(s.gp, s.p, s.l, 5);
    REQUIRE(out);
    CHECK(out->new_weight == 1);
    CHECK_FALSE(out->created_violation);
    CHECK(m.search(5).gp == nullptr);
  }
}

TEST_CASE("delete that overweights a node is cleaned up before returning") {
  Map m({0, Reclamation::kRetainUntilDestroy});
  m.install_chromatic_root(inner(20, 1, inner(10, 1, leaf(5), leaf(10)),
                                 inner(30, 1, leaf(20), leaf(30))));
  CHECK(m.erase(5) == 5);
  CHECK(m.stats().violations_created == 1);
  CHECK(m.stats().cleanups == 1);
  CHECK(m.count_violations() == 0);
  require_clean(m);
}

TEST_CASE("decision procedure picks the expected step") {
  Map m({0, Reclamation::kRetainUntilDestroy});
  SUBCASE("red-red with a red uncle: BLK") {
    m.install_chromatic_root(inner(30, 1, inner(20, 0, inner(10, 0, leaf(5), leaf(10)), leaf(20)),
                                   inner(40, 0, leaf(30), leaf(40))));
    m.cleanup(5);
    CHECK(steps_of(m, StepShape::kBlk) == 1);
    CHECK(m.stats().rebalance_steps() == 1);
  }
  SUBCASE("red-red on the outside with a black uncle: RB1") {
    m.install_chromatic_root(inner(30, 1, inner(20, 0, inner(10, 0, leaf(5), leaf(10)), leaf(20)),
                                   leaf(30)));
    m.cleanup(5);
    CHECK(steps_of(m, StepShape::kRb1) == 1);
    CHECK(m.stats().rebalance_steps() == 1);
  }
  SUBCASE("red-red on the inside with a black uncle: RB2") {
    m.install_chromatic_root(inner(30, 1, inner(10, 0, leaf(5), inner(20, 0, leaf(10), leaf(20))),
                                   leaf(30)));
    m.cleanup(10);
    CHECK(steps_of(m, StepShape::kRb2) == 1);
    CHECK(m.stats().rebalance_steps() == 1);
  }
  SUBCASE("overweight with a red sibling whose near child is overweight: W1") {
    m.install_chromatic_root(inner(20, 1, leaf(10, 2),
                                   inner(30, 0, leaf(20, 2), inner(40, 1, leaf(30), leaf(40)))));
    m.cleanup(10);
    CHECK(steps_of(m, StepShape::kW1) >= 1);
  }
  SUBCASE("overweight with a black sibling whose far child is red: W5") {
    m.install_chromatic_root(inner(20, 1, leaf(10, 2),
                                   inner(30, 1, leaf(20), inner(40, 0, leaf(30), leaf(40)))));
    m.cleanup(10);
    CHECK(steps_of(m, StepShape::kW5) == 1);
  }
  SUBCASE("overweight with an overweight sibling: W7") {
    m.install_chromatic_root(inner(20, 1, leaf(10, 2), leaf(20, 2)));
    m.cleanup(10);
    CHECK(steps_of(m, StepShape::kW7) == 1);
  }
  CHECK(m.count_violations() == 0);
  require_clean(m);
}

TEST_CASE("ascending inserts 1..64 stay balanced") {
  Map m;
  for (Key k = 1; k <= 64; ++k) (void)m.insert(k, static_cast<int>(k));
  const verify::AuditReport r = verify::audit_quiescent(m.snapshot_text());
  INFO(r.to_text());
  CHECK(r.ok());
  CHECK(r.violations == 0);
  CHECK(static_cast<double>(r.height) <= 2 * std::log2(65.0) + 2);
}

TEST_CASE("every step kind preserves keys and weighted paths on random configurations") {
  std::mt19937_64 rng(2024);
  for (StepKind kind : all_step_kinds()) {
    CAPTURE(name_of(kind));
    for (int i = 0; i < 100; ++i) {
      Map m({0, Reclamation::kRetainUntilDestroy});
      const verify::StepConfig<int> c = verify::random_step_config<int>(kind, rng);
      m.install_chromatic_root(c.root);
      const std::string before = m.snapshot_text();
      const auto violations_before = m.count_violations();
      const verify::AuditReport rb = verify::audit_quiescent(before, violations_before);
      REQUIRE(rb.equal_weighted_paths.pass);
      REQUIRE(m.apply_rebalance_step(kind, c.root, c.ux_dir));
      const std::string after = m.snapshot_text();
      const verify::AuditReport ra = verify::audit_quiescent(after, violations_before);
      INFO(before);
      INFO(after);
      CHECK(ra.bst_order.pass);
      CHECK(ra.equal_weighted_paths.pass);
      CHECK(leaf_keys(after) == leaf_keys(before));
      CHECK(m.count_violations() <= violations_before);
      CHECK(m.stats().steps[index_of(kind)] == 1);
    }
  }
}

TEST_CASE("random single-threaded operations agree with std::map") {
  Map m;
  std::map<Key, int> ref;
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20000; ++i) {
    const Key k = static_cast<Key>(rng() % 256);
    std::optional<int> want;
    if (auto it = ref.find(k); it != ref.end()) want = it->second;
    switch (rng() % 4) {
      case 0:
        REQUIRE(m.insert(k, i) == want);
        ref[k] = i;
        break;
      case 1:
        REQUIRE(m.erase(k) == want);
        ref.erase(k);
        break;
      case 2: {
        const auto s = m.successor(k);
        const auto it = ref.upper_bound(k);
        REQUIRE(s.has_value() == (it != ref.end()));
        if (s) REQUIRE(*s == std::pair<Key, int>{it->first, it->second});
        break;
      }
      default:
        REQUIRE(m.get(k) == want);
    }
    REQUIRE(m.count_violations() == 0);
  }
  CHECK(m.size() == ref.size());
  require_clean(m);
}
