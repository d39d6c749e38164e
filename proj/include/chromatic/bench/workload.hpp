#ifndef CHROMATIC_BENCH_WORKLOAD_HPP
#define CHROMATIC_BENCH_WORKLOAD_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chromatic/chromatic_map.hpp"

namespace chromatic::bench {

using BenchMap = ChromaticMap<std::int64_t>;

struct WorkloadConfig {
  unsigned insert_pct = 50;
  unsigned delete_pct = 50;  // gets take the remainder
  Key key_range = 1'000'000;
  unsigned threads = 1;
  double trial_seconds = 5.0;
  // Ops per thread per trial; nonzero selects ops-budget mode.
  std::uint64_t ops_budget = 0;
  unsigned trials = 5;
  unsigned warmup_trials = 0;
  std::uint32_t violation_threshold = 0;
  std::uint64_t seed = 1;
  bool audit = false;

  [[nodiscard]] unsigned get_pct() const noexcept { return 100 - insert_pct - delete_pct; }
  // Throws std::invalid_argument when the mix or sizes are unusable.
  void validate() const;
  // "50i-50d", "20i-10d", ...
  [[nodiscard]] std::string mix_label() const;
  // "Chromatic" for k = 0, "Chromatic<k>" otherwise.
  [[nodiscard]] std::string variant_label() const;
  /// Steady-state size: key_range * i / (i + d), or key_range / 2 when the
  /// mix has no updates.
  [[nodiscard]] double expected_size() const noexcept;
};

/// SplitMix64. Stream i of seed s starts from s + i times the golden gamma,
/// so per-thread streams need no shared state.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : state_(seed + stream * kGamma) {}

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += kGamma);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  // Uniform in [0, bound), by rejection.
  std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x >= limit);
    return x % bound;
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t state_;
};

enum class BenchOp : std::uint8_t { kInsert, kDelete, kGet };

/// Draws operations by the configured mix over uniform keys.
class OpGenerator {
 public:
  OpGenerator(const WorkloadConfig& config, std::uint64_t stream)
      : rng_(config.seed, stream), insert_(config.insert_pct),
        delete_(config.delete_pct), range_(static_cast<std::uint64_t>(config.key_range)) {}

  [[nodiscard]] BenchOp next_op() noexcept {
    const auto roll = static_cast<unsigned>(rng_.below(100));
    if (roll < insert_) return BenchOp::kInsert;
    if (roll < insert_ + delete_) return BenchOp::kDelete;
    return BenchOp::kGet;
  }
  [[nodiscard]] Key next_key() noexcept { return static_cast<Key>(rng_.below(range_)); }
  SplitMix64& rng() noexcept { return rng_; }

 private:
  SplitMix64 rng_;
  unsigned insert_;
  unsigned delete_;
  std::uint64_t range_;
};

/// Random inserts and deletes (in the mix's ratio, or 50/50 when it has no
/// updates) until the size is within 5% of expected_size(). Returns the
/// size. Throws std::runtime_error if that takes more than a generous
/// number of operations.
std::size_t prefill(BenchMap& map, const WorkloadConfig& config);

struct OpCounts {
  std::uint64_t inserts = 0;
  std::uint64_t deletes = 0;
  std::uint64_t gets = 0;
  [[nodiscard]] std::uint64_t total() const noexcept { return inserts + deletes + gets; }
};

struct TrialResult {
  std::string variant;
  std::string mix;
  Key key_range = 0;
  unsigned threads = 0;
  std::uint32_t violation_threshold = 0;
  unsigned trial = 0;
  bool budget_mode = false;
  std::uint64_t total_ops = 0;
  double ops_per_second = 0;
  double duration_seconds = 0;
  OpCounts per_op;
  std::size_t prefill_size = 0;
  double expected_size = 0;
  std::size_t final_size = 0;
  // Final size minus (prefill + net successful inserts - deletes).
  std::int64_t size_discrepancy = 0;
  std::optional<bool> audit_ok;
  std::string audit_detail;
};

// One trial on a fresh, prefilled map.
TrialResult run_trial(const WorkloadConfig& config, unsigned trial_index);

// warmup_trials discarded, then `trials` measured trials.
std::vector<TrialResult> run_trials(const WorkloadConfig& config);

/// CSV with a header row and one row per trial. The stddev column is the
/// sample standard deviation of ops_per_sec over the rows sharing variant,
/// mix, key range and thread count (0 for a single row).
std::string emit_report(std::span<const TrialResult> results);

}  // namespace chromatic::bench

#endif  // CHROMATIC_BENCH_WORKLOAD_HPP
