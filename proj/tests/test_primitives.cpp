#include <memory>
#include <vector>

#include "chromatic/epoch.hpp"
#include "chromatic/node.hpp"
#include "chromatic/scx.hpp"
#include "chromatic/verify/explorer.hpp"
#include "doctest.h"

using namespace chromatic;
using verify::ExplorerOptions;
using verify::ScheduleExplorer;

namespace {

using N = Node<int>;

// root -> (a, b), all owned by the fixture.
struct SmallTree {
  std::vector<std::unique_ptr<N>> pool;
  N* a;
  N* b;
  N* root;

  SmallTree() {
    a = keep(new N(1, 10, 1));
    b = keep(new N(2, 20, 1));
    root = keep(new N(2, std::nullopt, 1, a, b));
  }
  N* keep(N* n) {
    pool.emplace_back(n);
    return n;
  }
};

// Replaces root's `slot` child by a fresh leaf, with V = <root, child> and
// R = <child>.
bool replace_child(SmallTree& t, int slot, const LlxResult& root_link,
                   const LlxResult& child_link, N* fresh) {
  const LlxResult* links[] = {&root_link, &child_link};
  Record* fresh_set[] = {fresh};
  ScxRequest req;
  req.links = links;
  req.finalize_mask = 0b10;
  req.target = 0;
  req.slot = static_cast<std::uint8_t>(slot);
  req.new_value = fresh;
  req.fresh = fresh_set;
  (void)t;
  return scx(req);
}

}  // namespace

TEST_CASE("llx on a quiescent leaf returns a snapshot of null children") {
  EpochGuard guard;
  N leaf(5, 1, 1);
  const LlxResult r = llx(&leaf);
  CHECK(r.status == LlxStatus::kSnapshot);
  CHECK(r.left() == nullptr);
  CHECK(r.right() == nullptr);
}

TEST_CASE("read_field returns construction-time children") {
  SmallTree t;
  CHECK(read_field(t.root, 0) == t.a);
  CHECK(read_field(t.root, 1) == t.b);
}

TEST_CASE("uncontended scx swings the slot and finalizes R") {
  EpochGuard guard;
  SmallTree t;
  const LlxResult lr = llx(t.root);
  const LlxResult la = llx(t.a);
  REQUIRE(lr.ok());
  REQUIRE(la.ok());
  N* fresh = t.keep(new N(1, 11, 1));
  CHECK(replace_child(t, 0, lr, la, fresh));
  CHECK(read_field(t.root, 0) == fresh);
  CHECK(llx(t.a).status == LlxStatus::kFinalized);
  // Finalization is permanent.
  CHECK(llx(t.a).status == LlxStatus::kFinalized);
  CHECK(read_field(t.a, 0) == nullptr);
  CHECK(llx(t.root).ok());
}

TEST_CASE("scx fails when a member of V changed after its linked llx") {
  EpochGuard guard;
  SmallTree t;
  const LlxResult stale_root = llx(t.root);
  const LlxResult stale_b = llx(t.b);
  {
    const LlxResult lr = llx(t.root);
    const LlxResult la = llx(t.a);
    REQUIRE(replace_child(t, 0, lr, la, t.keep(new N(1, 12, 1))));
  }
  N* before = read_field(t.root, 1) == t.b ? t.b : nullptr;
  CHECK_FALSE(replace_child(t, 1, stale_root, stale_b, t.keep(new N(2, 21, 1))));
  CHECK(read_field(t.root, 1) == before);
  CHECK(llx(t.b).ok());
}

TEST_CASE("vlx succeeds without interference and fails after a change") {
  EpochGuard guard;
  SmallTree t;
  const LlxResult lr = llx(t.root);
  const LlxResult lb = llx(t.b);
  const LlxResult* both[] = {&lr, &lb};
  CHECK(vlx(both));
  const LlxResult lr2 = llx(t.root);
  const LlxResult la = llx(t.a);
  REQUIRE(replace_child(t, 0, lr2, la, t.keep(new N(1, 13, 1))));
  CHECK_FALSE(vlx(both));
}

TEST_CASE("help on a committed descriptor is idempotent") {
  EpochGuard guard;
  SmallTree t;
  const LlxResult lr = llx(t.root);
  const LlxResult la = llx(t.a);
  N* fresh = t.keep(new N(1, 14, 1));
  REQUIRE(replace_child(t, 0, lr, la, fresh));
  const InfoTag tag = t.root->info.load();
  REQUIRE(tag != kQuiescentTag);
  const HelpOutcome first = help(tag);
  CHECK(first != HelpOutcome::kAborted);
  CHECK(help(tag) == first);
  CHECK(read_field(t.root, 0) == fresh);
}

// Interleaving checks over fibers. Each schedule rebuilds the tree.

TEST_CASE("two identical scx attempts: exactly one succeeds in every schedule") {
  std::unique_ptr<SmallTree> t;
  bool ok[2] = {};
  ScheduleExplorer explorer(ExplorerOptions{3});
  ScheduleExplorer::Program p;
  p.threads = 2;
  p.setup = [&] { t = std::make_unique<SmallTree>(); };
  p.body = [&](std::uint32_t i) {
    EpochGuard guard;
    const LlxResult lr = llx(t->root);
    const LlxResult la = llx(t->a);
    ok[i] = false;
    if (!lr.ok() || !la.ok()) return;
    ok[i] = replace_child(*t, 0, lr, la, t->keep(new N(1, 100 + static_cast<int>(i), 1)));
  };
  p.check = [&]() -> std::string {
    const int wins = ok[0] + ok[1];
    if (wins > 1) return "both scx calls succeeded";
    Record* left = read_field(t->root, 0);
    if (wins == 1 && left == t->a) return "success without a field change";
    if (wins == 0 && left != t->a) return "field changed without a success";
    return {};
  };
  const auto stats = explorer.explore(p);
  INFO(stats.failure);
  CHECK_FALSE(stats.failed);
  CHECK(stats.exhausted);
  CHECK(stats.runs > 10);
}

TEST_CASE("llx overlapping an scx returns Fail or a consistent snapshot") {
  std::unique_ptr<SmallTree> t;
  N* fresh = nullptr;
  LlxResult seen;
  ScheduleExplorer explorer(ExplorerOptions{3});
  ScheduleExplorer::Program p;
  p.threads = 2;
  p.setup = [&] {
    t = std::make_unique<SmallTree>();
    fresh = t->keep(new N(1, 99, 1));
  };
  p.body = [&](std::uint32_t i) {
    EpochGuard guard;
    if (i == 0) {
      const LlxResult lr = llx(t->root);
      const LlxResult la = llx(t->a);
      if (lr.ok() && la.ok()) (void)replace_child(*t, 0, lr, la, fresh);
    } else {
      seen = llx(t->root);
    }
  };
  p.check = [&]() -> std::string {
    if (seen.status == LlxStatus::kFinalized) return "root was never finalized";
    if (seen.status == LlxStatus::kFail) return {};
    const bool before = seen.left() == t->a;
    const bool after = seen.left() == fresh;
    if (!(before || after) || seen.right() != t->b) return "torn snapshot";
    return {};
  };
  const auto stats = explorer.explore(p);
  INFO(stats.failure);
  CHECK_FALSE(stats.failed);
  CHECK(stats.exhausted);
}

TEST_CASE("read_field during an scx sees the old or the new child") {
  std::unique_ptr<SmallTree> t;
  N* fresh = nullptr;
  Record* seen = nullptr;
  ScheduleExplorer explorer(ExplorerOptions{4});
  ScheduleExplorer::Program p;
  p.threads = 2;
  p.setup = [&] {
    t = std::make_unique<SmallTree>();
    fresh = t->keep(new N(1, 98, 1));
  };
  p.body = [&](std::uint32_t i) {
    EpochGuard guard;
    if (i == 0) {
      const LlxResult lr = llx(t->root);
      const LlxResult la = llx(t->a);
      if (lr.ok() && la.ok()) (void)replace_child(*t, 0, lr, la, fresh);
    } else {
      seen = read_field(t->root, 0);
    }
  };
  p.check = [&]() -> std::string {
    return seen == t->a || seen == fresh ? std::string{} : "read returned a foreign value";
  };
  const auto stats = explorer.explore(p);
  CHECK_FALSE(stats.failed);
  CHECK(stats.exhausted);
}

TEST_CASE("vlx is unaffected by an scx on a disjoint record set") {
  // Two separate trees; thread 0 updates the first, thread 1 validates the
  // second.
  std::unique_ptr<SmallTree> t0, t1;
  bool valid = false;
  ScheduleExplorer explorer(ExplorerOptions{4});
  ScheduleExplorer::Program p;
  p.threads = 2;
  p.setup = [&] {
    t0 = std::make_unique<SmallTree>();
    t1 = std::make_unique<SmallTree>();
  };
  p.body = [&](std::uint32_t i) {
    EpochGuard guard;
    if (i == 0) {
      const LlxResult lr = llx(t0->root);
      const LlxResult la = llx(t0->a);
      if (lr.ok() && la.ok()) (void)replace_child(*t0, 0, lr, la, t0->keep(new N(1, 7, 1)));
    } else {
      const LlxResult lr = llx(t1->root);
      const LlxResult lb = llx(t1->b);
      const LlxResult* both[] = {&lr, &lb};
      valid = lr.ok() && lb.ok() && vlx(both);
    }
  };
  p.check = [&]() -> std::string { return valid ? std::string{} : "vlx failed"; };
  const auto stats = explorer.explore(p);
  CHECK_FALSE(stats.failed);
  CHECK(stats.exhausted);
}

TEST_CASE("an scx stalled at any point is completed by a helper and reports success") {
  // Preemption bound 1: thread 0 runs up to some instrumentation point,
  // thread 1 links every record of V (helping whatever it finds), then
  // thread 0 resumes.
  std::unique_ptr<SmallTree> t;
  N* fresh = nullptr;
  bool committed = false;
  ScheduleExplorer explorer(ExplorerOptions{1});
  ScheduleExplorer::Program p;
  p.threads = 2;
  p.setup = [&] {
    t = std::make_unique<SmallTree>();
    fresh = t->keep(new N(1, 97, 1));
    committed = false;
  };
  p.body = [&](std::uint32_t i) {
    EpochGuard guard;
    if (i == 0) {
      const LlxResult lr = llx(t->root);
      const LlxResult la = llx(t->a);
      committed = lr.ok() && la.ok() && replace_child(*t, 0, lr, la, fresh);
    } else {
      (void)llx(t->root);
      (void)llx(t->a);
    }
  };
  p.check = [&]() -> std::string {
    if (!committed) return "stalled scx did not succeed";
    if (read_field(t->root, 0) != fresh) return "field not updated";
    EpochGuard guard;
    if (llx(t->a).status != LlxStatus::kFinalized) return "removed record not finalized";
    return {};
  };
  const auto stats = explorer.explore(p);
  INFO(stats.failure);
  CHECK_FALSE(stats.failed);
  CHECK(stats.exhausted);
}

TEST_CASE("read_field on a finalized record returns its final value") {
  EpochGuard guard;
  SmallTree t;
  N* inner = t.keep(new N(1, std::nullopt, 1, t.keep(new N(0, 1, 1)), t.keep(new N(1, 2, 1))));
  N* top = t.keep(new N(5, std::nullopt, 1, inner, t.keep(new N(5, 3, 1))));
  Record* l0 = read_field(inner, 0);
  Record* r0 = read_field(inner, 1);
  const LlxResult lt = llx(top);
  const LlxResult li = llx(inner);
  N* fresh = t.keep(new N(1, 4, 1));
  const LlxResult* links[] = {&lt, &li};
  Record* fresh_set[] = {fresh};
  ScxRequest req;
  req.links = links;
  req.finalize_mask = 0b10;
  req.target = 0;
  req.slot = 0;
  req.new_value = fresh;
  req.fresh = fresh_set;
  REQUIRE(scx(req));
  CHECK(llx(inner).status == LlxStatus::kFinalized);
  CHECK(read_field(inner, 0) == l0);
  CHECK(read_field(inner, 1) == r0);
}

TEST_CASE("two helpers racing on one descriptor agree on the outcome") {
  std::unique_ptr<SmallTree> t;
  N* fresh = nullptr;
  bool committed = false;
  ScheduleExplorer explorer(ExplorerOptions{2});
  ScheduleExplorer::Program p;
  p.threads = 3;
  p.setup = [&] {
    t = std::make_unique<SmallTree>();
    fresh = t->keep(new N(1, 96, 1));
    committed = false;
  };
  p.body = [&](std::uint32_t i) {
    EpochGuard guard;
    if (i == 0) {
      const LlxResult lr = llx(t->root);
      const LlxResult la = llx(t->a);
      committed = lr.ok() && la.ok() && replace_child(*t, 0, lr, la, fresh);
    } else {
      const InfoTag tag = t->root->info.load();
      if (tag != kQuiescentTag) (void)help(tag);
      (void)llx(t->a);
    }
  };
  p.check = [&]() -> std::string {
    Record* left = read_field(t->root, 0);
    if (committed != (left == fresh)) return "slot disagrees with the owner's result";
    if (!committed && left != t->a) return "slot holds a foreign value";
    if (!committed) return "uncontended owner failed";
    EpochGuard guard;
    if (llx(t->a).status != LlxStatus::kFinalized) return "R not finalized";
    return {};
  };
  const auto stats = explorer.explore(p);
  INFO(stats.failure);
  CHECK_FALSE(stats.failed);
  CHECK(stats.exhausted);
}
