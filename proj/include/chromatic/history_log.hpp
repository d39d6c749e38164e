#ifndef CHROMATIC_HISTORY_LOG_HPP
#define CHROMATIC_HISTORY_LOG_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "chromatic/record.hpp"

/// \file
/// Debug capture of committed SCXs, in commit order, plus the traversal
/// records used to check reachability hindsight. Capture is process-wide and
/// off by default; when on, the field-update CAS of every SCX is serialized
/// with the append so that log order equals linearization order.
///
/// Text format, one item per line, ids in decimal with 0 meaning Null:
///
///     init <id> <left> <right>
///     scx <seq> <target> <slot> <old> <new> R=<id>,... N=<id>:<left>:<right>,...
///     trav <node> <begin-seq> <end-seq>
///
/// An empty R or N list is written as a single '-'. `seq` starts at 1;
/// begin/end of a traversal are the commit counts observed before and after
/// it.

namespace chromatic::history {

struct InitialRecord {
  std::uint64_t id = 0;
  std::uint64_t left = 0;
  std::uint64_t right = 0;
  friend bool operator==(const InitialRecord&, const InitialRecord&) = default;
};

struct FreshNode {
  std::uint64_t id = 0;
  std::uint64_t left = 0;
  std::uint64_t right = 0;
  friend bool operator==(const FreshNode&, const FreshNode&) = default;
};

struct CommittedScx {
  std::uint64_t seq = 0;
  std::uint64_t target = 0;
  std::uint32_t slot = 0;
  std::uint64_t old_value = 0;
  std::uint64_t new_value = 0;
  std::vector<std::uint64_t> removed;
  std::vector<FreshNode> fresh;
  friend bool operator==(const CommittedScx&, const CommittedScx&) = default;
};

struct TraversalRecord {
  std::uint64_t node = 0;
  std::uint64_t begin = 0;
  std::uint64_t end = 0;
  friend bool operator==(const TraversalRecord&,
                         const TraversalRecord&) = default;
};

struct ScxHistory {
  std::vector<InitialRecord> initial;
  std::vector<CommittedScx> commits;
  std::vector<TraversalRecord> traversals;
  friend bool operator==(const ScxHistory&, const ScxHistory&) = default;
};

void set_enabled(bool on);
[[nodiscard]] bool enabled() noexcept;
void clear();
[[nodiscard]] ScxHistory capture();

// Number of SCXs committed since the last clear() while capture was on.
[[nodiscard]] std::uint64_t commit_count();

void note_initial(const Record& r);
void note_traversal(std::uint64_t node, std::uint64_t begin,
                    std::uint64_t end);

[[nodiscard]] std::string to_text(const ScxHistory& h);

// Throws std::invalid_argument on malformed input.
[[nodiscard]] ScxHistory parse(std::string_view text);

}  // namespace chromatic::history

#endif  // CHROMATIC_HISTORY_LOG_HPP
