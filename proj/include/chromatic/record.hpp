#ifndef CHROMATIC_RECORD_HPP
#define CHROMATIC_RECORD_HPP

#include <array>
#include <atomic>
#include <cstdint>

#include "chromatic/config.hpp"

namespace chromatic {

// Reference to an SCX descriptor as stored in a record's info field:
// (sequence << kTagTidBits) | owner tid. Zero is the quiescent marker.
using InfoTag = std::uint64_t;

inline constexpr InfoTag kQuiescentTag = 0;
inline constexpr unsigned kTagTidBits = 10;
static_assert((std::size_t{1} << kTagTidBits) >= kMaxThreads);

[[nodiscard]] constexpr InfoTag make_info_tag(std::uint32_t tid,
                                              std::uint64_t seq) noexcept {
  return (seq << kTagTidBits) | tid;
}
[[nodiscard]] constexpr std::uint32_t tag_tid(InfoTag t) noexcept {
  return static_cast<std::uint32_t>(t & ((InfoTag{1} << kTagTidBits) - 1));
}
[[nodiscard]] constexpr std::uint64_t tag_seq(InfoTag t) noexcept {
  return t >> kTagTidBits;
}

/// A Data-record: kArity mutable child links plus the synchronization
/// header used by LLX/SCX. Immutable payload lives in derived types and is
/// written only before the record is published.
struct Record {
  Record() noexcept;
  Record(Record* left, Record* right) noexcept;
  Record(const Record&) = delete;
  Record& operator=(const Record&) = delete;

  // Links are changed only by a committed SCX whose descriptor froze this
  // record; use read_field() or llx() to read them.
  std::array<std::atomic<Record*>, kArity> child;
  std::atomic<InfoTag> info{kQuiescentTag};
  std::atomic<bool> marked{false};

  // Unique within the process; 0 is reserved for Null in text dumps.
  const std::uint64_t id;
};

}  // namespace chromatic

#endif  // CHROMATIC_RECORD_HPP
