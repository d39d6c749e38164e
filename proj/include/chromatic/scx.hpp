#ifndef CHROMATIC_SCX_HPP
#define CHROMATIC_SCX_HPP

#include <array>
#include <cstdint>
#include <span>

#include "chromatic/config.hpp"
#include "chromatic/record.hpp"

/// \file
/// LLX / SCX / VLX over Records, built from single-word CAS with
/// cooperative helping.
///
/// Every thread owns one descriptor slot that it reuses for successive SCXs.
/// A record's info field names a descriptor by (owner tid, sequence); once
/// the owner starts a newer SCX the older sequence is "superseded", which
/// implies it finished. Helpers copy a descriptor optimistically and
/// validate the sequence, so no descriptor memory is ever reclaimed or
/// reused under a live reference.
///
/// Callers must hold an EpochGuard while any of these run.

namespace chromatic {

enum class LlxStatus : std::uint8_t { kSnapshot, kFail, kFinalized };

/// Outcome of one LLX. A kSnapshot result is the caller-local link that a
/// later scx()/vlx() over the same record validates against.
struct LlxResult {
  Record* record = nullptr;
  LlxStatus status = LlxStatus::kFail;
  InfoTag observed = kQuiescentTag;
  std::array<Record*, kArity> children{};

  [[nodiscard]] bool ok() const noexcept {
    return status == LlxStatus::kSnapshot;
  }
  [[nodiscard]] Record* left() const noexcept { return children[0]; }
  [[nodiscard]] Record* right() const noexcept { return children[1]; }
};

[[nodiscard]] LlxResult llx(Record* r);

// Direct read of one mutable field.
[[nodiscard]] Record* read_field(const Record* r, std::size_t slot);

/// Arguments of one SCX. `links` is V in order, each entry the linked LLX of
/// that record. Bit i of `finalize_mask` puts links[i] in R. The field being
/// written is child[`slot`] of links[`target`]; its expected old value is
/// the one that LLX observed.
struct ScxRequest {
  std::span<const LlxResult* const> links;
  std::uint32_t finalize_mask = 0;
  std::uint8_t target = 0;
  std::uint8_t slot = 0;
  Record* new_value = nullptr;
  // The freshly allocated node set N; recorded in the SCX history when
  // history capture is enabled. May be empty.
  std::span<Record* const> fresh{};
};

// Returns true iff the SCX was linearized.
[[nodiscard]] bool scx(const ScxRequest& request);

[[nodiscard]] bool vlx(std::span<const LlxResult* const> links);

enum class ScxState : std::uint8_t {
  kIdle = 0,
  kInProgress = 1,
  kCommitted = 2,
  kAborted = 3,
};

enum class HelpOutcome : std::uint8_t {
  kCommitted,
  kAborted,
  // The owner has moved on to a newer SCX, so this one finished earlier.
  kSuperseded,
};

// Drives the named descriptor to completion. Idempotent.
HelpOutcome help(InfoTag tag);

struct DescriptorView {
  bool current = false;  // false: superseded (or quiescent tag)
  ScxState state = ScxState::kIdle;
  bool all_frozen = false;
};
[[nodiscard]] DescriptorView inspect_descriptor(InfoTag tag);

}  // namespace chromatic

#endif  // CHROMATIC_SCX_HPP
