#include "chromatic/scx.hpp"

#include <atomic>
#include <cassert>

#include "chromatic/instrument.hpp"
#include "chromatic/thread_context.hpp"
#include "history_internal.hpp"

namespace chromatic {

namespace {

// Descriptor word: (seq << 3) | all_frozen << 2 | state.
constexpr std::uint64_t kAllFrozenBit = 4;
constexpr std::uint64_t kStateMask = 3;

constexpr std::uint64_t make_word(std::uint64_t seq, ScxState state,
                                  bool all_frozen = false) {
  return (seq << 3) | (all_frozen ? kAllFrozenBit : 0) |
         static_cast<std::uint64_t>(state);
}
constexpr std::uint64_t word_seq(std::uint64_t w) { return w >> 3; }
constexpr ScxState word_state(std::uint64_t w) {
  return static_cast<ScxState>(w & kStateMask);
}
constexpr bool word_all_frozen(std::uint64_t w) {
  return (w & kAllFrozenBit) != 0;
}

struct alignas(64) DescriptorSlot {
  std::atomic<std::uint64_t> word{0};
  std::atomic<std::uint32_t> count{0};
  std::atomic<std::uint32_t> finalize_mask{0};
  std::atomic<std::uint8_t> target{0};
  std::atomic<std::uint8_t> slot{0};
  std::atomic<std::uint8_t> fresh_count{0};
  std::array<std::atomic<Record*>, kMaxScxRecords> records{};
  std::array<std::atomic<InfoTag>, kMaxScxRecords> expected{};
  std::atomic<Record*> old_value{nullptr};
  std::atomic<Record*> new_value{nullptr};
  std::array<std::atomic<Record*>, kMaxFresh> fresh{};
};

std::array<DescriptorSlot, kMaxThreads> g_slots;

// Private copy of a descriptor taken by a helper (or by the owner).
struct DescriptorCopy {
  InfoTag tag = kQuiescentTag;
  std::uint32_t count = 0;
  std::uint32_t finalize_mask = 0;
  std::uint8_t target = 0;
  std::uint8_t slot = 0;
  std::uint8_t fresh_count = 0;
  std::array<Record*, kMaxScxRecords> records{};
  std::array<InfoTag, kMaxScxRecords> expected{};
  Record* old_value = nullptr;
  Record* new_value = nullptr;
  std::array<Record*, kMaxFresh> fresh{};
};

// Seqlock-style read. Fails if the owner has started a newer SCX.
bool load_copy(InfoTag tag, DescriptorCopy& out, std::uint64_t& word) {
  DescriptorSlot& s = g_slots[tag_tid(tag)];
  const std::uint64_t seq = tag_seq(tag);
  const std::uint64_t w1 = s.word.load(std::memory_order_acquire);
  if (word_seq(w1) != seq) return false;
  out.tag = tag;
  out.count = s.count.load(std::memory_order_relaxed);
  out.finalize_mask = s.finalize_mask.load(std::memory_order_relaxed);
  out.target = s.target.load(std::memory_order_relaxed);
  out.slot = s.slot.load(std::memory_order_relaxed);
  out.fresh_count = s.fresh_count.load(std::memory_order_relaxed);
  for (std::size_t i = 0; i < kMaxScxRecords; ++i) {
    out.records[i] = s.records[i].load(std::memory_order_relaxed);
    out.expected[i] = s.expected[i].load(std::memory_order_relaxed);
  }
  out.old_value = s.old_value.load(std::memory_order_relaxed);
  out.new_value = s.new_value.load(std::memory_order_relaxed);
  for (std::size_t i = 0; i < kMaxFresh; ++i)
    out.fresh[i] = s.fresh[i].load(std::memory_order_relaxed);
  std::atomic_thread_fence(std::memory_order_acquire);
  const std::uint64_t w2 = s.word.load(std::memory_order_relaxed);
  if (word_seq(w2) != seq) return false;
  word = w2;
  return out.count <= kMaxScxRecords && out.target < out.count &&
         out.fresh_count <= kMaxFresh;
}

HelpOutcome outcome_of(std::uint64_t w, std::uint64_t seq) {
  if (word_seq(w) != seq) return HelpOutcome::kSuperseded;
  return word_state(w) == ScxState::kCommitted ? HelpOutcome::kCommitted
                                                : HelpOutcome::kAborted;
}

HelpOutcome help_copy(const DescriptorCopy& d) {
  DescriptorSlot& s = g_slots[tag_tid(d.tag)];
  const std::uint64_t seq = tag_seq(d.tag);

  // Freeze V in order.
  for (std::uint32_t i = 0; i < d.count; ++i) {
    Record* r = d.records[i];
    sched_point(SchedPoint::kFreeze);
    InfoTag seen = d.expected[i];
    if (r->info.compare_exchange_strong(seen, d.tag) || seen == d.tag)
      continue;
    sched_point(SchedPoint::kFreezeCheck);
    std::uint64_t w = s.word.load();
    if (word_seq(w) != seq) return HelpOutcome::kSuperseded;
    if (word_all_frozen(w)) return HelpOutcome::kCommitted;
    sched_point(SchedPoint::kAbort);
    while (word_seq(w) == seq && word_state(w) == ScxState::kInProgress &&
           !word_all_frozen(w)) {
      if (s.word.compare_exchange_weak(w, make_word(seq, ScxState::kAborted)))
        return HelpOutcome::kAborted;
    }
    if (word_seq(w) == seq && word_all_frozen(w)) return HelpOutcome::kCommitted;
    return outcome_of(w, seq);
  }

  sched_point(SchedPoint::kAllFrozen);
  std::uint64_t w = s.word.load();
  for (;;) {
    if (word_seq(w) != seq) return HelpOutcome::kSuperseded;
    if (word_all_frozen(w)) break;
    if (word_state(w) != ScxState::kInProgress) return outcome_of(w, seq);
    if (s.word.compare_exchange_weak(w, w | kAllFrozenBit)) break;
  }

  std::array<Record*, kMaxScxRecords> removed{};
  std::size_t removed_count = 0;
  for (std::uint32_t i = 0; i < d.count; ++i) {
    if ((d.finalize_mask >> i & 1U) == 0) continue;
    sched_point(SchedPoint::kMark);
    d.records[i]->marked.store(true);
    removed[removed_count++] = d.records[i];
  }

  sched_point(SchedPoint::kUpdateField);
  Record* target = d.records[d.target];
  history::detail::update_field(
      target->child[d.slot], d.old_value, d.new_value, *target, d.slot,
      std::span<Record* const>(removed.data(), removed_count),
      std::span<Record* const>(d.fresh.data(), d.fresh_count));

  sched_point(SchedPoint::kCommit);
  w = make_word(seq, ScxState::kInProgress, true);
  s.word.compare_exchange_strong(w, make_word(seq, ScxState::kCommitted, true));
  return HelpOutcome::kCommitted;
}

}  // namespace

Record::Record() noexcept : Record(nullptr, nullptr) {}

Record::Record(Record* left, Record* right) noexcept
    : id([] {
        ThreadContext& ctx = this_thread_context();
        return (std::uint64_t{ctx.tid} + 1) << 40 | ctx.next_record_serial++;
      }()) {
  child[0].store(left, std::memory_order_relaxed);
  child[1].store(right, std::memory_order_relaxed);
}

DescriptorView inspect_descriptor(InfoTag tag) {
  DescriptorView v;
  if (tag == kQuiescentTag) return v;
  const std::uint64_t w = g_slots[tag_tid(tag)].word.load();
  if (word_seq(w) != tag_seq(tag)) return v;
  v.current = true;
  v.state = word_state(w);
  v.all_frozen = word_all_frozen(w);
  return v;
}

HelpOutcome help(InfoTag tag) {
  if (tag == kQuiescentTag) return HelpOutcome::kSuperseded;
  DescriptorCopy d;
  std::uint64_t w = 0;
  if (!load_copy(tag, d, w)) return HelpOutcome::kSuperseded;
  if (word_state(w) != ScxState::kInProgress) return outcome_of(w, tag_seq(tag));
  return help_copy(d);
}

LlxResult llx(Record* r) {
  assert(r != nullptr);
  LlxResult res;
  res.record = r;
  sched_point(SchedPoint::kLlxReadMarked);
  const bool marked1 = r->marked.load();
  sched_point(SchedPoint::kLlxReadInfo);
  const InfoTag tag = r->info.load();
  sched_point(SchedPoint::kLlxReadState);
  const DescriptorView v = inspect_descriptor(tag);
  sched_point(SchedPoint::kLlxReadMarked);
  const bool marked2 = r->marked.load();

  const bool in_progress = v.current && v.state == ScxState::kInProgress;
  if (!in_progress && !marked2) {
    sched_point(SchedPoint::kLlxReadChildren);
    for (std::size_t i = 0; i < kArity; ++i) res.children[i] = r->child[i].load();
    sched_point(SchedPoint::kLlxRecheckInfo);
    if (r->info.load() == tag) {
      res.status = LlxStatus::kSnapshot;
      res.observed = tag;
      return res;
    }
  }

  const bool finished_committed =
      tag != kQuiescentTag &&
      (!v.current || v.state == ScxState::kCommitted ||
       (in_progress && help(tag) == HelpOutcome::kCommitted));
  if (marked1 && finished_committed) {
    res.status = LlxStatus::kFinalized;
    return res;
  }
  sched_point(SchedPoint::kLlxRecheckInfo);
  const InfoTag now = r->info.load();
  const DescriptorView nv = inspect_descriptor(now);
  if (nv.current && nv.state == ScxState::kInProgress) help(now);
  res.status = LlxStatus::kFail;
  return res;
}

Record* read_field(const Record* r, std::size_t slot) {
  assert(r != nullptr && slot < kArity);
  sched_point(SchedPoint::kReadChild);
  return r->child[slot].load();
}

bool scx(const ScxRequest& q) {
  assert(!q.links.empty() && q.links.size() <= kMaxScxRecords);
  assert(q.target < q.links.size() && q.slot < kArity);
  assert(q.fresh.size() <= kMaxFresh);

  ThreadContext& ctx = this_thread_context();
  DescriptorSlot& s = g_slots[ctx.tid];
  DescriptorCopy d;
  const std::uint64_t seq = word_seq(s.word.load(std::memory_order_relaxed)) + 1;
  d.tag = make_info_tag(ctx.tid, seq);
  d.count = static_cast<std::uint32_t>(q.links.size());
  d.finalize_mask = q.finalize_mask;
  d.target = q.target;
  d.slot = q.slot;
  d.fresh_count = static_cast<std::uint8_t>(q.fresh.size());
  for (std::uint32_t i = 0; i < d.count; ++i) {
    const LlxResult* link = q.links[i];
    // A missing or failed linked LLX is a caller bug.
    assert(link != nullptr && link->ok());
    d.records[i] = link->record;
    d.expected[i] = link->observed;
  }
  d.old_value = q.links[q.target]->children[q.slot];
  d.new_value = q.new_value;
  for (std::size_t i = 0; i < q.fresh.size(); ++i) d.fresh[i] = q.fresh[i];

  // Bump the sequence first so that racing readers of the previous
  // descriptor detect the rewrite.
  s.word.store(make_word(seq, ScxState::kIdle), std::memory_order_relaxed);
  std::atomic_thread_fence(std::memory_order_release);
  s.count.store(d.count, std::memory_order_relaxed);
  s.finalize_mask.store(d.finalize_mask, std::memory_order_relaxed);
  s.target.store(d.target, std::memory_order_relaxed);
  s.slot.store(d.slot, std::memory_order_relaxed);
  s.fresh_count.store(d.fresh_count, std::memory_order_relaxed);
  for (std::size_t i = 0; i < kMaxScxRecords; ++i) {
    s.records[i].store(d.records[i], std::memory_order_relaxed);
    s.expected[i].store(d.expected[i], std::memory_order_relaxed);
  }
  s.old_value.store(d.old_value, std::memory_order_relaxed);
  s.new_value.store(d.new_value, std::memory_order_relaxed);
  for (std::size_t i = 0; i < kMaxFresh; ++i)
    s.fresh[i].store(d.fresh[i], std::memory_order_relaxed);
  sched_point(SchedPoint::kScxPublish);
  s.word.store(make_word(seq, ScxState::kInProgress), std::memory_order_release);

  return help_copy(d) == HelpOutcome::kCommitted;
}

bool vlx(std::span<const LlxResult* const> links) {
  for (const LlxResult* link : links) {
    assert(link != nullptr && link->ok());
    sched_point(SchedPoint::kVlxCheck);
    if (link->record->info.load() != link->observed) return false;
  }
  return true;
}

}  // namespace chromatic
