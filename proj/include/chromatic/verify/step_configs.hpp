#ifndef CHROMATIC_VERIFY_STEP_CONFIGS_HPP
#define CHROMATIC_VERIFY_STEP_CONFIGS_HPP

#include <algorithm>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "chromatic/node.hpp"
#include "chromatic/step_kind.hpp"

/// \file
/// Random legal input configurations for each rebalancing step. A
/// configuration is a whole chromatic subtree with equal weighted path sums
/// whose top node u has, in direction ux_dir, a child ux matching the
/// weight pattern the step requires.

namespace chromatic::verify {

struct WeightRule {
  std::string path;  // from ux in plain orientation: "", "l", "rl", ...
  Weight lo;
  Weight hi;
};

/// Weight pattern of a step, in plain orientation. Besides the checks the
/// step itself makes, the rules carry the context under which the decision
/// procedure picks it: BLK and RB* fix a red-red violation below ux, the
/// rest an overweight left child.
[[nodiscard]] inline std::vector<WeightRule> step_weight_rules(StepShape shape,
                                                              std::mt19937_64& rng) {
  constexpr Weight kMore = 2;  // "at least w" is drawn from [w, w + kMore]
  auto at_least = [](std::string p, Weight w) { return WeightRule{std::move(p), w, w + kMore}; };
  auto exactly = [](std::string p, Weight w) { return WeightRule{std::move(p), w, w}; };
  switch (shape) {
    case StepShape::kBlk: {
      static const char* kGrandchildren[] = {"ll", "lr", "rl", "rr"};
      return {at_least("", 1), exactly("l", 0), exactly("r", 0),
              exactly(kGrandchildren[rng() % 4], 0)};
    }
    case StepShape::kRb1:
      return {exactly("l", 0), exactly("ll", 0), at_least("r", 1)};
    case StepShape::kRb2:
      return {exactly("l", 0), exactly("lr", 0), at_least("r", 1)};
    case StepShape::kPush:
      return {at_least("l", 2), exactly("r", 1), at_least("rl", 1), at_least("rr", 1)};
    case StepShape::kW1:
      return {at_least("", 1), at_least("l", 2), exactly("r", 0), at_least("rl", 2)};
    case StepShape::kW2:
      return {at_least("", 1), at_least("l", 2), exactly("r", 0), exactly("rl", 1),
              at_least("rll", 1), at_least("rlr", 1)};
    case StepShape::kW3:
      return {at_least("", 1), at_least("l", 2), exactly("r", 0), exactly("rl", 1),
              exactly("rll", 0), at_least("rlr", 1)};
    case StepShape::kW4:
      return {at_least("", 1), at_least("l", 2), exactly("r", 0), exactly("rl", 1),
              exactly("rlr", 0)};
    case StepShape::kW5:
      return {at_least("l", 2), exactly("r", 1), exactly("rr", 0)};
    case StepShape::kW6:
      return {at_least("l", 2), exactly("r", 1), exactly("rl", 0), at_least("rr", 1)};
    case StepShape::kW7:
      return {at_least("l", 2), at_least("r", 2)};
  }
  return {};
}

namespace detail_configs {

struct Proto {
  Weight weight = 1;
  std::unique_ptr<Proto> child[2];
  Key key = 0;
  [[nodiscard]] bool leaf() const noexcept { return child[0] == nullptr; }
};

class Generator {
 public:
  Generator(std::vector<WeightRule> rules, std::mt19937_64& rng) : rng_(rng) {
    for (const WeightRule& r : rules)
      weight_[r.path] = r.lo + static_cast<Weight>(rng_() % (r.hi - r.lo + 1));
    // Every prefix of a constrained node is part of the pattern too.
    std::vector<std::string> prefixes;
    for (const auto& [path, w] : weight_)
      for (std::size_t n = 0; n < path.size(); ++n) prefixes.push_back(path.substr(0, n));
    for (const std::string& p : prefixes)
      if (!weight_.contains(p)) weight_[p] = static_cast<Weight>(rng_() % 3);
  }

  [[nodiscard]] Weight need(const std::string& path) const {
    const Weight w = weight_.at(path);
    if (!must_be_internal(path)) return w;
    Weight below = 1;
    for (const char* d : {"l", "r"})
      if (weight_.contains(path + d)) below = std::max(below, need(path + d));
    return w + below;
  }

  std::unique_ptr<Proto> pattern(const std::string& path, Weight target) {
    const auto it = weight_.find(path);
    if (it == weight_.end()) return fringe(target, 0);
    auto n = std::make_unique<Proto>();
    n->weight = it->second;
    if (!must_be_internal(path) && target == n->weight) return n;
    n->child[0] = pattern(path + "l", target - n->weight);
    n->child[1] = pattern(path + "r", target - n->weight);
    return n;
  }

  // A random subtree all of whose paths have weight sum `h`.
  std::unique_ptr<Proto> fringe(Weight h, int depth) {
    auto n = std::make_unique<Proto>();
    if (depth >= 3 || rng_() % 5 < 2) {
      n->weight = h;
      return n;
    }
    n->weight = h > 1 ? static_cast<Weight>(rng_() % 2) : 0;
    n->child[0] = fringe(h - n->weight, depth + 1);
    n->child[1] = fringe(h - n->weight, depth + 1);
    return n;
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  [[nodiscard]] bool must_be_internal(const std::string& path) const {
    return weight_.at(path) == 0 || weight_.contains(path + "l") ||
           weight_.contains(path + "r");
  }

  std::map<std::string, Weight> weight_;
  std::mt19937_64& rng_;
};

inline void mirror(Proto& p) {
  std::swap(p.child[0], p.child[1]);
  for (auto& c : p.child)
    if (c) mirror(*c);
}

// Leaves get keys 10, 20, ... in order; an internal node takes the least
// key of its right subtree.
inline Key assign_keys(Proto& p, Key& next) {
  if (p.leaf()) {
    p.key = (next += 10);
    return p.key;
  }
  const Key least = assign_keys(*p.child[0], next);
  p.key = assign_keys(*p.child[1], next);
  return least;
}

template <class V>
Node<V>* materialize(const Proto& p, const Proto* ux_proto, Node<V>*& ux_out) {
  Node<V>* n;
  if (p.leaf()) {
    n = new Node<V>(p.key, static_cast<V>(p.key), p.weight);
  } else {
    Node<V>* l = materialize(*p.child[0], ux_proto, ux_out);
    Node<V>* r = materialize(*p.child[1], ux_proto, ux_out);
    n = new Node<V>(p.key, std::nullopt, p.weight, l, r);
  }
  if (&p == ux_proto) ux_out = n;
  return n;
}

}  // namespace detail_configs

template <class V>
struct StepConfig {
  Node<V>* root = nullptr;  // the u node; hand to install_chromatic_root
  Node<V>* ux = nullptr;
  int ux_dir = 0;
};

/// A fresh random legal configuration for `kind`. The caller owns the
/// nodes (normally by installing `root` into a map).
template <class V>
[[nodiscard]] StepConfig<V> random_step_config(StepKind kind, std::mt19937_64& rng) {
  using detail_configs::Proto;
  detail_configs::Generator gen(step_weight_rules(kind.shape, rng), rng);
  const Weight target = gen.need("") + static_cast<Weight>(rng() % 2);

  Proto u;
  u.weight = static_cast<Weight>(rng() % 3);
  int ux_dir = static_cast<int>(rng() % 2);
  u.child[ux_dir] = gen.pattern("", target);
  u.child[1 - ux_dir] = gen.fringe(target, 1);
  const Proto* ux_proto = u.child[ux_dir].get();
  if (kind.mirrored) {
    detail_configs::mirror(*u.child[ux_dir]);
    std::swap(u.child[0], u.child[1]);
    ux_dir = 1 - ux_dir;
  }
  Key next = 0;
  (void)detail_configs::assign_keys(u, next);

  StepConfig<V> out;
  out.ux_dir = ux_dir;
  out.root = detail_configs::materialize<V>(u, ux_proto, out.ux);
  return out;
}

}  // namespace chromatic::verify

#endif  // CHROMATIC_VERIFY_STEP_CONFIGS_HPP
