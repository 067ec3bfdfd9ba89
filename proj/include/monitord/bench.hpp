#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "monitord/errors.hpp"

namespace monitord::bench {

// One timed execution of a hooked operation.
struct Sample {
  std::string hook_id;
  std::int64_t nanoseconds = 0;
};

// Per-hook statistics after decile trimming. Hooks with fewer than ten raw
// samples are excluded from weighted aggregation and reported raw.
struct HookStats {
  std::string hook_id;
  std::uint64_t frequency = 0;  // post-trim count (raw count when excluded)
  double mean_us = 0.0;
  double margin_us = 0.0;  // 95% confidence half-width
  bool excluded = false;
};

enum class BenchMode { hooks_enabled_noop_module, hooks_disabled };

inline const char* bench_mode_name(BenchMode m) {
  return m == BenchMode::hooks_enabled_noop_module ? "hooks_enabled_noop_module" : "hooks_disabled";
}

struct BenchReport {
  BenchMode mode = BenchMode::hooks_disabled;
  std::string scenario_name;
  std::uint64_t seed = 0;
  std::vector<HookStats> stats;          // ordered by hook id
  double weighted_mean_us = 0.0;
  std::vector<double> trimmed_us;        // pooled post-trim samples, for CFD output
};

// Removes the ceil(n/10) largest values of one hook's sample series.
inline std::vector<std::int64_t> trim_highest_decile(std::vector<std::int64_t> values) {
  std::sort(values.begin(), values.end());
  std::size_t cut = (values.size() + 9) / 10;
  values.resize(values.size() - cut);
  return values;
}

inline double sample_mean(const std::vector<std::int64_t>& ns) {
  double total = 0.0;
  for (auto v : ns) total += static_cast<double>(v);
  return ns.empty() ? 0.0 : total / static_cast<double>(ns.size());
}

// 95% confidence half-width by normal approximation (1.96 * s / sqrt(n)).
inline double confidence_margin(const std::vector<std::int64_t>& ns) {
  if (ns.size() < 2) return 0.0;
  double mean = sample_mean(ns);
  double ss = 0.0;
  for (auto v : ns) {
    double d = static_cast<double>(v) - mean;
    ss += d * d;
  }
  double stddev = std::sqrt(ss / static_cast<double>(ns.size() - 1));
  return 1.96 * stddev / std::sqrt(static_cast<double>(ns.size()));
}

// Frequency-weighted mean over the non-excluded per-hook stats.
inline double weighted_mean(const std::vector<HookStats>& stats) {
  double num = 0.0;
  std::uint64_t denom = 0;
  for (const auto& s : stats) {
    if (s.excluded) continue;
    num += static_cast<double>(s.frequency) * s.mean_us;
    denom += s.frequency;
  }
  if (denom == 0) throw Error(Errc::empty_stats, "no hook has enough samples");
  return num / static_cast<double>(denom);
}

inline BenchReport build_report(BenchMode mode, const std::string& scenario_name,
                                std::uint64_t seed, const std::vector<Sample>& samples) {
  std::map<std::string, std::vector<std::int64_t>> by_hook;
  for (const auto& s : samples) by_hook[s.hook_id].push_back(s.nanoseconds);

  BenchReport report;
  report.mode = mode;
  report.scenario_name = scenario_name;
  report.seed = seed;
  for (auto& [hook, ns] : by_hook) {
    HookStats stats;
    stats.hook_id = hook;
    if (ns.size() < 10) {
      stats.excluded = true;
      stats.frequency = ns.size();
      stats.mean_us = sample_mean(ns) / 1000.0;
      stats.margin_us = confidence_margin(ns) / 1000.0;
    } else {
      std::vector<std::int64_t> trimmed = trim_highest_decile(ns);
      stats.frequency = trimmed.size();
      stats.mean_us = sample_mean(trimmed) / 1000.0;
      stats.margin_us = confidence_margin(trimmed) / 1000.0;
      for (auto v : trimmed) report.trimmed_us.push_back(static_cast<double>(v) / 1000.0);
    }
    report.stats.push_back(std::move(stats));
  }
  report.weighted_mean_us = weighted_mean(report.stats);
  return report;
}

struct HookDelta {
  std::string hook_id;
  double enabled_mean_us = 0.0;
  double disabled_mean_us = 0.0;
  double delta = 0.0;  // enabled/disabled - 1
};

struct Comparison {
  double overhead_ratio = 0.0;  // enabled/disabled - 1
  std::vector<HookDelta> per_hook;
  // Cumulative fraction of trimmed samples at or below each threshold.
  std::vector<std::pair<double, double>> cfd_enabled;
  std::vector<std::pair<double, double>> cfd_disabled;
};

inline std::vector<std::pair<double, double>> cumulative_distribution(std::vector<double> us,
                                                                      std::size_t points = 128) {
  std::vector<std::pair<double, double>> out;
  if (us.empty()) return out;
  std::sort(us.begin(), us.end());
  std::size_t n = us.size();
  std::size_t step = std::max<std::size_t>(1, n / points);
  for (std::size_t i = step - 1; i < n; i += step)
    out.emplace_back(us[i], static_cast<double>(i + 1) / static_cast<double>(n));
  if (out.empty() || out.back().second < 1.0)
    out.emplace_back(us.back(), 1.0);
  return out;
}

// Overhead of the enabled run over the disabled run, plus per-hook deltas and
// distribution data. Reports must come from the same scenario and seed.
inline Comparison compare_reports(const BenchReport& enabled, const BenchReport& disabled) {
  if (enabled.scenario_name != disabled.scenario_name || enabled.seed != disabled.seed)
    throw Error(Errc::scenario_mismatch,
                enabled.scenario_name + "/" + std::to_string(enabled.seed) + " vs " +
                    disabled.scenario_name + "/" + std::to_string(disabled.seed));
  Comparison cmp;
  cmp.overhead_ratio = enabled.weighted_mean_us / disabled.weighted_mean_us - 1.0;
  for (const auto& e : enabled.stats) {
    if (e.excluded) continue;
    for (const auto& d : disabled.stats) {
      if (d.excluded || d.hook_id != e.hook_id) continue;
      cmp.per_hook.push_back({e.hook_id, e.mean_us, d.mean_us, e.mean_us / d.mean_us - 1.0});
    }
  }
  cmp.cfd_enabled = cumulative_distribution(enabled.trimmed_us);
  cmp.cfd_disabled = cumulative_distribution(disabled.trimmed_us);
  return cmp;
}

// ---- emission ----

inline void write_stats_csv(std::ostream& os, const BenchReport& report) {
  os << "hook_id,mode,frequency,mean_us,margin_us\n";
  for (const auto& s : report.stats) {
    os << s.hook_id << ',' << bench_mode_name(report.mode) << ',' << s.frequency << ','
       << s.mean_us << ',' << s.margin_us << '\n';
  }
}

inline void write_cfd_csv(std::ostream& os, const Comparison& cmp) {
  os << "mode,threshold_us,cumulative_fraction\n";
  for (const auto& [t, f] : cmp.cfd_enabled)
    os << "hooks_enabled_noop_module," << t << ',' << f << '\n';
  for (const auto& [t, f] : cmp.cfd_disabled) os << "hooks_disabled," << t << ',' << f << '\n';
}

inline nlohmann::ordered_json summary_json(const BenchReport& enabled, const BenchReport& disabled,
                                           const Comparison& cmp) {
  nlohmann::ordered_json j;
  j["scenario"] = enabled.scenario_name;
  j["seed"] = enabled.seed;
  j["enabled_weighted_mean_us"] = enabled.weighted_mean_us;
  j["disabled_weighted_mean_us"] = disabled.weighted_mean_us;
  j["overhead_ratio"] = cmp.overhead_ratio;
  auto hooks = nlohmann::ordered_json::array();
  for (const auto& d : cmp.per_hook) {
    nlohmann::ordered_json h;
    h["hook_id"] = d.hook_id;
    h["enabled_mean_us"] = d.enabled_mean_us;
    h["disabled_mean_us"] = d.disabled_mean_us;
    h["delta"] = d.delta;
    hooks.push_back(h);
  }
  j["per_hook"] = hooks;
  return j;
}

using Clock = std::chrono::steady_clock;

class Stopwatch {
 public:
  void start() { begin_ = Clock::now(); }
  std::int64_t stop_ns() const {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - begin_).count();
  }

 private:
  Clock::time_point begin_;
};

}  // namespace monitord::bench
