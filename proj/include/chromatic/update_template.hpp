#ifndef CHROMATIC_UPDATE_TEMPLATE_HPP
#define CHROMATIC_UPDATE_TEMPLATE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/container/static_vector.hpp>

#include "chromatic/config.hpp"
#include "chromatic/record.hpp"
#include "chromatic/scx.hpp"

/// \file
/// The tree-update template: an update performs LLXs on a sequence of
/// records sigma, each reached from an earlier snapshot, and finishes with one
/// SCX that swaps a connected subgraph for a freshly built one. TemplateRun
/// records sigma and the nodes an update allocates; validate_scx_arguments
/// checks an SCX's arguments against the nine postconditions PC1..PC9.

namespace chromatic {

template <class T, std::size_t N>
using SmallVec = boost::container::static_vector<T, N>;

/// Arguments of the closing SCX of an update.
struct ScxArgumentBundle {
  SmallVec<Record*, kMaxScxRecords> v;
  SmallVec<Record*, kMaxScxRecords> r;
  Record* parent = nullptr;
  std::uint8_t slot = 0;
  Record* new_root = nullptr;
  // N: every node of the replacement subgraph, including new_root.
  SmallVec<Record*, kMaxFresh> fresh;
};

enum class Postcondition : std::uint8_t {
  kPC1 = 1,
  kPC2,
  kPC3,
  kPC4,
  kPC5,
  kPC6,
  kPC7,
  kPC8,
  kPC9,
};
[[nodiscard]] std::string to_string(Postcondition pc);

/// Returns the violated postconditions, in increasing order. `allocated` is
/// the set of records the update allocated. PC8 and PC9 are only checked
/// when the snapshot graph of sigma is a down-tree; PC8 requires V to follow
/// the left-to-right breadth-first order of that graph.
[[nodiscard]] std::vector<Postcondition> validate_scx_arguments(
    const ScxArgumentBundle& bundle, std::span<const LlxResult> sigma,
    std::span<Record* const> allocated);

/// Runtime switches for the debug checks. Both default off.
struct TemplateChecks {
  bool validate_postconditions = false;
  bool purity = false;
};
void set_template_checks(TemplateChecks checks) noexcept;
[[nodiscard]] TemplateChecks template_checks() noexcept;

struct ValidationStats {
  std::uint64_t committed_validated = 0;
  std::uint64_t committed_with_violations = 0;
  std::string first_failure;
};
[[nodiscard]] ValidationStats validation_stats();
void reset_validation_stats();

/// State of one update attempt: the LLX sequence sigma and the records
/// allocated so far. Not thread-safe; one attempt runs on one thread under an
/// EpochGuard. Allocated records that are not published by a committed SCX
/// are deleted when the run ends.
class TemplateRun {
 public:
  struct Allocation {
    Record* record;
    void (*deleter)(Record*);
  };

  TemplateRun() = default;
  TemplateRun(const TemplateRun&) = delete;
  TemplateRun& operator=(const TemplateRun&) = delete;
  ~TemplateRun();

  // LLX(r), appended to sigma. The returned reference stays valid for the
  // lifetime of the run.
  const LlxResult& llx(Record* r);

  template <class T, class... Args>
  T* make(Args&&... args) {
    T* node = new T(std::forward<Args>(args)...);
    allocated_.push_back(
        {node, [](Record* p) { delete static_cast<T*>(p); }});
    return node;
  }

  // The latest LLX on r in sigma, or null.
  [[nodiscard]] const LlxResult* link_for(const Record* r) const noexcept;

  // Runs the closing SCX. On success the fresh nodes are owned by the tree
  // and the caller becomes responsible for retiring bundle.r.
  [[nodiscard]] bool commit(const ScxArgumentBundle& bundle);

  [[nodiscard]] std::span<const LlxResult> sigma() const noexcept {
    return {sigma_.data(), sigma_.size()};
  }
  [[nodiscard]] std::vector<Record*> allocated() const;
  [[nodiscard]] bool committed() const noexcept { return committed_; }

 private:
  bool order_links(const ScxArgumentBundle& bundle);

  SmallVec<LlxResult, kMaxSigma> sigma_;
  std::vector<Allocation> allocated_;
  SmallVec<Record*, kMaxFresh> published_;
  bool committed_ = false;
};

// Thrown by the purity and NextNode checks of execute_template.
class TemplateContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The four callbacks of a template update. Each receives sigma, the
/// snapshots so far; immutable fields are read through the records.
/// Callback inputs other than sigma are captured by the callbacks.
template <class Result>
struct TemplateSpec {
  std::function<bool(std::span<const LlxResult>)> condition;
  std::function<Record*(std::span<const LlxResult>)> next_node;
  std::function<ScxArgumentBundle(std::span<const LlxResult>, TemplateRun&)>
      scx_arguments;
  std::function<Result(std::span<const LlxResult>)> result;
};

namespace detail {
bool same_scx_shape(const ScxArgumentBundle& a, const ScxArgumentBundle& b);
bool is_snapshot_child(std::span<const LlxResult> sigma, const Record* r);
}  // namespace detail

/// Runs one attempt of the update described by `spec` starting at `start`.
/// Returns nullopt ("Fail") if an LLX returns Fail or Finalized or if the SCX
/// fails; never retries.
template <class Result>
std::optional<Result> execute_template(const TemplateSpec<Result>& spec,
                                       Record* start, TemplateRun& run) {
  const bool purity = template_checks().purity;
  Record* next = start;
  for (;;) {
    if (!run.llx(next).ok()) return std::nullopt;
    const bool done = spec.condition(run.sigma());
    if (purity && spec.condition(run.sigma()) != done)
      throw TemplateContractError("condition is not deterministic");
    if (done) break;
    next = spec.next_node(run.sigma());
    if (purity && spec.next_node(run.sigma()) != next)
      throw TemplateContractError("next_node is not deterministic");
    if (next == nullptr || !detail::is_snapshot_child(run.sigma(), next))
      throw TemplateContractError(
          "next_node must return a non-null child from a snapshot");
  }
  const ScxArgumentBundle bundle = spec.scx_arguments(run.sigma(), run);
  if (purity) {
    TemplateRun scratch;
    if (!detail::same_scx_shape(bundle,
                                spec.scx_arguments(run.sigma(), scratch)))
      throw TemplateContractError("scx_arguments is not deterministic");
  }
  if (!run.commit(bundle)) return std::nullopt;
  Result out = spec.result(run.sigma());
  if (purity && !(spec.result(run.sigma()) == out))
    throw TemplateContractError("result is not deterministic");
  return out;
}

}  // namespace chromatic

#endif  // CHROMATIC_UPDATE_TEMPLATE_HPP
