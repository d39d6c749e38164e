#ifndef CHROMATIC_SCX_AUDIT_HPP
#define CHROMATIC_SCX_AUDIT_HPP

#include <cstdint>
#include <string>

#include "chromatic/history_log.hpp"

namespace chromatic {

struct ScxAuditReport {
  bool ok = true;
  // Sequence number of the first offending commit; 0 when the failure is
  // in the initial records or a traversal record.
  std::uint64_t failing_seq = 0;
  std::string message;
  std::uint64_t commits_replayed = 0;
  std::uint64_t traversals_checked = 0;
};

/// Replays a captured SCX history over a shadow copy of the tree. The first
/// initial record is the entry record. After each commit the shadow must
/// still be a down-tree rooted at the entry, the records that became
/// unreachable must be exactly the commit's R set, no record may become
/// reachable again after leaving, and the slot must have held the expected
/// old value. Each traversal record must name a node that was reachable at
/// some point inside its window.
///
/// `full_check_every` > 0 additionally re-walks the whole shadow tree every
/// that many commits (and after the last one).
[[nodiscard]] ScxAuditReport audit_committed_scx(
    const history::ScxHistory& history, std::uint64_t full_check_every = 0);

}  // namespace chromatic

#endif  // CHROMATIC_SCX_AUDIT_HPP
