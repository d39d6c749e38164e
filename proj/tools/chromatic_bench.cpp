#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chromatic/bench/workload.hpp"

namespace {

struct Mix {
  unsigned insert_pct = 50;
  unsigned delete_pct = 50;
};

Mix parse_mix(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw CLI::ValidationError("--mix", "expected i,d");
  Mix m;
  try {
    m.insert_pct = static_cast<unsigned>(std::stoul(text.substr(0, comma)));
    m.delete_pct = static_cast<unsigned>(std::stoul(text.substr(comma + 1)));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--mix", "expected two integers, e.g. 20,10");
  }
  if (m.insert_pct + m.delete_pct > 100)
    throw CLI::ValidationError("--mix", "insert and delete percentages exceed 100");
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Throughput driver for the chromatic tree map"};

  std::string mix_text = "50,50";
  chromatic::Key key_range = 1'000'000;
  std::vector<unsigned> threads{1};
  double seconds = 5.0;
  std::uint64_t ops_budget = 0;
  unsigned trials = 5;
  unsigned warmup = 0;
  std::vector<std::uint32_t> ks{0};
  std::uint64_t seed = 1;
  std::string csv_path;
  bool audit = false;

  app.add_option("--mix", mix_text, "insert,delete percentages; gets take the rest")
      ->capture_default_str();
  app.add_option("--key-range", key_range, "keys are drawn uniformly from [0, K)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "worker thread counts, comma separated")
      ->delimiter(',')
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  auto* secs = app.add_option("--seconds", seconds, "trial length in wall-clock seconds")
                   ->capture_default_str()
                   ->check(CLI::PositiveNumber);
  app.add_option("--ops-budget", ops_budget, "operations per thread per trial")
      ->excludes(secs)
      ->check(CLI::PositiveNumber);
  app.add_option("--trials", trials, "measured trials per configuration")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--warmup", warmup, "discarded trials before measuring")->capture_default_str();
  app.add_option("--k-violations", ks, "violation thresholds, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--seed", seed, "base seed")->capture_default_str();
  app.add_option("--csv", csv_path, "write the CSV report here instead of stdout");
  app.add_flag("--audit", audit, "audit the quiescent tree after each trial");

  CLI11_PARSE(app, argc, argv);

  Mix mix;
  try {
    mix = parse_mix(mix_text);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  }

  std::vector<chromatic::bench::TrialResult> results;
  bool audit_failed = false;
  for (std::uint32_t k : ks) {
    for (unsigned t : threads) {
      chromatic::bench::WorkloadConfig config;
      config.insert_pct = mix.insert_pct;
      config.delete_pct = mix.delete_pct;
      config.key_range = key_range;
      config.threads = t;
      config.trial_seconds = seconds;
      config.ops_budget = ops_budget;
      config.trials = trials;
      config.warmup_trials = warmup;
      config.violation_threshold = k;
      config.seed = seed;
      config.audit = audit;
      try {
        for (auto& r : chromatic::bench::run_trials(config)) {
          std::cerr << r.variant << ' ' << r.mix << " K=" << r.key_range << " threads=" << t
                    << " trial " << r.trial << ": " << static_cast<std::uint64_t>(r.ops_per_second)
                    << " ops/s\n";
          if (r.audit_ok && !*r.audit_ok) {
            audit_failed = true;
            std::cerr << "audit failed:\n" << r.audit_detail << '\n';
          }
          results.push_back(std::move(r));
        }
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
      }
    }
  }

  const std::string csv = chromatic::bench::emit_report(results);
  if (csv_path.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(csv_path, std::ios::binary);
    out << csv;
    if (!out) {
      std::cerr << "error: cannot write " << csv_path << '\n';
      return 1;
    }
  }
  return audit_failed ? 2 : 0;
}
