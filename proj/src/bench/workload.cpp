#include "chromatic/bench/workload.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <latch>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "chromatic/verify/audit.hpp"

namespace chromatic::bench {

void WorkloadConfig::validate() const {
  if (insert_pct + delete_pct > 100)
    throw std::invalid_argument("insert and delete percentages exceed 100");
  if (key_range <= 0) throw std::invalid_argument("key range must be nonempty");
  if (threads == 0) throw std::invalid_argument("need at least one thread");
  if (ops_budget == 0 && !(trial_seconds > 0))
    throw std::invalid_argument("trial duration must be positive");
  if (trials == 0) throw std::invalid_argument("need at least one trial");
}

std::string WorkloadConfig::mix_label() const {
  return std::to_string(insert_pct) + "i-" + std::to_string(delete_pct) + "d";
}

std::string WorkloadConfig::variant_label() const {
  return violation_threshold == 0 ? "Chromatic"
                                  : "Chromatic" + std::to_string(violation_threshold);
}

double WorkloadConfig::expected_size() const noexcept {
  const double range = static_cast<double>(key_range);
  if (insert_pct + delete_pct == 0) return range / 2;
  return range * insert_pct / (insert_pct + delete_pct);
}

std::size_t prefill(BenchMap& map, const WorkloadConfig& config) {
  const double expected = config.expected_size();
  const double band = 0.05 * expected;
  WorkloadConfig mix = config;
  if (mix.insert_pct + mix.delete_pct == 0) {
    mix.insert_pct = 50;
    mix.delete_pct = 50;
  }
  // Insert-only draws over the update share of the mix.
  const unsigned updates = mix.insert_pct + mix.delete_pct;
  OpGenerator gen(mix, ~std::uint64_t{0});
  std::size_t size = map.size();
  const std::uint64_t cap = 100 * static_cast<std::uint64_t>(config.key_range) + 1'000'000;
  for (std::uint64_t i = 0; std::abs(static_cast<double>(size) - expected) > band; ++i) {
    if (i == cap) throw std::runtime_error("prefill did not reach the 5% band");
    const Key key = gen.next_key();
    if (gen.rng().below(updates) < mix.insert_pct) {
      if (!map.insert(key, static_cast<std::int64_t>(i))) ++size;
    } else {
      if (map.erase(key)) --size;
    }
  }
  return size;
}

namespace {

struct WorkerTally {
  OpCounts counts;
  std::int64_t net = 0;
};

void worker(BenchMap& map, const WorkloadConfig& config, std::uint64_t stream,
            const std::atomic<bool>& stop, std::latch& start, WorkerTally& tally) {
  OpGenerator gen(config, stream);
  std::int64_t value = static_cast<std::int64_t>(stream) << 32;
  start.arrive_and_wait();
  for (std::uint64_t i = 0;; ++i) {
    if (config.ops_budget != 0 ? i == config.ops_budget
                               : stop.load(std::memory_order_relaxed))
      break;
    const BenchOp op = gen.next_op();
    const Key key = gen.next_key();
    switch (op) {
      case BenchOp::kInsert:
        ++tally.counts.inserts;
        if (!map.insert(key, ++value)) ++tally.net;
        break;
      case BenchOp::kDelete:
        ++tally.counts.deletes;
        if (map.erase(key)) --tally.net;
        break;
      case BenchOp::kGet:
        ++tally.counts.gets;
        (void)map.get(key);
        break;
    }
  }
}

}  // namespace

TrialResult run_trial(const WorkloadConfig& config, unsigned trial_index) {
  config.validate();
  WorkloadConfig trial_config = config;
  trial_config.seed = config.seed + 0x632be59bd9b4e019ULL * trial_index;

  TrialResult r;
  r.variant = config.variant_label();
  r.mix = config.mix_label();
  r.key_range = config.key_range;
  r.threads = config.threads;
  r.violation_threshold = config.violation_threshold;
  r.trial = trial_index;
  r.budget_mode = config.ops_budget != 0;
  r.expected_size = config.expected_size();

  BenchMap map({config.violation_threshold, Reclamation::kEpoch});
  r.prefill_size = prefill(map, trial_config);

  std::atomic<bool> stop{false};
  std::latch start(config.threads + 1);
  std::vector<WorkerTally> tallies(config.threads);
  std::vector<std::thread> threads;
  threads.reserve(config.threads);
  for (unsigned t = 0; t < config.threads; ++t)
    threads.emplace_back(worker, std::ref(map), std::cref(trial_config), std::uint64_t{t},
                         std::cref(stop), std::ref(start), std::ref(tallies[t]));
  start.arrive_and_wait();
  const auto begin = std::chrono::steady_clock::now();
  if (config.ops_budget == 0) {
    std::this_thread::sleep_for(std::chrono::duration<double>(config.trial_seconds));
    stop.store(true, std::memory_order_relaxed);
  }
  for (std::thread& t : threads) t.join();
  r.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();

  std::int64_t net = 0;
  for (const WorkerTally& t : tallies) {
    r.per_op.inserts += t.counts.inserts;
    r.per_op.deletes += t.counts.deletes;
    r.per_op.gets += t.counts.gets;
    net += t.net;
  }
  r.total_ops = r.per_op.total();
  r.ops_per_second = r.duration_seconds > 0 ? static_cast<double>(r.total_ops) / r.duration_seconds : 0;
  r.final_size = map.size();
  r.size_discrepancy = static_cast<std::int64_t>(r.final_size) -
                       (static_cast<std::int64_t>(r.prefill_size) + net);

  if (config.audit) {
    if (config.violation_threshold != 0) map.drain_violations();
    const verify::AuditReport report = verify::audit_quiescent(map.snapshot_text());
    r.audit_ok = report.ok() && r.size_discrepancy == 0;
    r.audit_detail = report.ok() ? report.height_vs_weighted_height.detail : report.to_text();
  }
  return r;
}

std::vector<TrialResult> run_trials(const WorkloadConfig& config) {
  config.validate();
  for (unsigned w = 0; w < config.warmup_trials; ++w) (void)run_trial(config, config.trials + w);
  std::vector<TrialResult> out;
  for (unsigned t = 0; t < config.trials; ++t) out.push_back(run_trial(config, t));
  return out;
}

std::string emit_report(std::span<const TrialResult> results) {
  using Group = std::tuple<std::string, std::string, Key, unsigned>;
  std::map<Group, std::vector<double>> groups;
  auto group_of = [](const TrialResult& r) {
    return Group{r.variant, r.mix, r.key_range, r.threads};
  };
  for (const TrialResult& r : results) groups[group_of(r)].push_back(r.ops_per_second);
  std::map<Group, double> stddev;
  for (const auto& [g, xs] : groups) {
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    stddev[g] = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
  }

  std::ostringstream out;
  out << "variant,k,mix,key_range,threads,trial,mode,total_ops,duration_s,ops_per_sec,"
         "stddev_ops_per_sec,inserts,deletes,gets,prefill_size,expected_size,final_size,audit\n";
  out.precision(6);
  out << std::fixed;
  for (const TrialResult& r : results) {
    out << r.variant << ',' << r.violation_threshold << ',' << r.mix << ',' << r.key_range
        << ',' << r.threads << ',' << r.trial << ',' << (r.budget_mode ? "budget" : "time")
        << ',' << r.total_ops << ',' << r.duration_seconds << ',' << r.ops_per_second << ','
        << stddev[group_of(r)] << ',' << r.per_op.inserts << ',' << r.per_op.deletes << ','
        << r.per_op.gets << ',' << r.prefill_size << ',' << r.expected_size << ','
        << r.final_size << ','
        << (r.audit_ok ? (*r.audit_ok ? "pass" : "fail") : "skipped") << '\n';
  }
  return out.str();
}

}  // namespace chromatic::bench
