#ifndef CHROMATIC_VERIFY_AUDIT_HPP
#define CHROMATIC_VERIFY_AUDIT_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "chromatic/node.hpp"
#include "chromatic/verify/oracle.hpp"

namespace chromatic::verify {

struct SnapshotNode {
  std::uint64_t id = 0;
  Key key = 0;
  Weight weight = 0;
  bool leaf = true;
  std::uint64_t left = 0;
  std::uint64_t right = 0;
  std::optional<std::string> value;
};

// Parses the map's snapshot_text(). Throws std::invalid_argument on
// malformed lines, dangling child ids or a non-tree shape.
[[nodiscard]] std::vector<SnapshotNode> parse_snapshot(std::string_view text);

/// Rewrites node ids to their pre-order positions, so that two dumps of
/// trees that differ only in record identity compare equal.
[[nodiscard]] std::string canonical_snapshot(std::string_view text);

struct AuditCheck {
  bool pass = true;
  std::vector<std::uint64_t> counterexample;  // node ids
  std::string detail;
};

struct AuditReport {
  AuditCheck bst_order;
  AuditCheck equal_weighted_paths;
  AuditCheck sentinel_shape;
  AuditCheck violation_count;
  AuditCheck height_vs_weighted_height;
  AuditCheck leaf_set_vs_oracle;

  // Measurements over the chromatic subtree (zero when empty).
  std::uint64_t violations = 0;
  std::uint64_t height = 0;
  std::uint64_t weighted_height = 0;
  std::uint64_t leaves = 0;
  std::uint64_t allowance = 0;  // c

  [[nodiscard]] bool ok() const noexcept {
    return bst_order.pass && equal_weighted_paths.pass && sentinel_shape.pass &&
           violation_count.pass && height_vs_weighted_height.pass &&
           leaf_set_vs_oracle.pass;
  }
  // One "<check> pass|fail [ids] detail" line per check.
  [[nodiscard]] std::string to_text() const;
  // One JSON object per check, newline separated.
  [[nodiscard]] std::string to_json_lines() const;
};

// Expected leaves, value formatted the way snapshot_text() writes it.
using ExpectedLeaves = std::map<Key, std::string>;

/// Audits a quiescent snapshot. `allowance` is the number of updates still
/// in flight (c): the violation count may not exceed it and the height
/// bound is h <= 2 wh + c. Without `expected` the leaf-set check passes
/// vacuously and says so in its detail.
[[nodiscard]] AuditReport audit_quiescent(std::string_view snapshot_text,
                                          std::uint64_t allowance = 0,
                                          const ExpectedLeaves* expected = nullptr);

template <class V>
[[nodiscard]] ExpectedLeaves expected_leaves(const OracleMap<V>& oracle) {
  ExpectedLeaves out;
  for (const auto& [k, v] : oracle.entries()) {
    std::ostringstream os;
    os << v;
    out.emplace(k, os.str());
  }
  return out;
}

}  // namespace chromatic::verify

#endif  // CHROMATIC_VERIFY_AUDIT_HPP
