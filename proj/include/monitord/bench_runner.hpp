#pragma once

#include <optional>
#include <string>
#include <vector>

#include "monitord/bench.hpp"
#include "monitord/hook_catalog.hpp"
#include "monitord/scenario.hpp"
#include "monitord/stack.hpp"

namespace monitord::bench {

// The no-op module: the default-allow base declaring every behavioral hook,
// so dispatch actually crosses the module boundary on each enforcement.
inline ModuleManifest noop_module_manifest() {
  ModuleManifest m;
  m.name = "noop";
  m.author = "monitord";
  m.version = "1";
  m.entry_point = "builtin.default_allow";
  m.dispatch_mode = DispatchMode::serialized;
  m.declared_hooks = hooks::behavioral_ids();
  return m;
}

struct BenchOptions {
  int iterations = 200;
  int warmup = 1000;  // discarded iterations before measurement starts
};

// Times every hooked operation a scenario drives, either with hooks enabled
// and the no-op module loaded or with hooks disabled. The mode is frozen for
// the whole run; a mid-run flip aborts the measurement.
inline std::vector<Sample> run_bench(const scenario::Scenario& scn,
                                     const sim::StackConfig& stack_config,
                                     const std::optional<kmac::KernelPolicy>& kernel_policy,
                                     BenchMode mode, const BenchOptions& options) {
  sim::SimStack stack(stack_config, kernel_policy);
  bool enabled = mode == BenchMode::hooks_enabled_noop_module;
  if (enabled) {
    ModuleHandle& handle = stack.load_module(noop_module_manifest());
    if (!stack.init_module(handle)) throw Error(Errc::config_error, "no-op module failed to init");
  }
  stack.framework().set_hooks_enabled(enabled);

  std::vector<Sample> samples;
  scenario::ScenarioRunner runner;
  scenario::TimingSink sink = [&samples](const scenario::ScenarioEvent& event, std::int64_t ns) {
    std::string hook = scenario::primary_hook_for_kind(event.kind);
    if (!hook.empty()) samples.push_back({std::move(hook), ns});
  };

  for (int i = 0; i < options.warmup + options.iterations; ++i) {
    if (stack.framework().hooks_enabled() != enabled)
      throw Error(Errc::mode_changed_mid_run, "hooks flag flipped during the run");
    bool measured = i >= options.warmup;
    scenario::RunReport scratch;
    runner.run_events(stack, scn, scratch, measured ? sink : scenario::TimingSink{},
                      /*include_expects=*/false);
  }
  if (stack.framework().hooks_enabled() != enabled)
    throw Error(Errc::mode_changed_mid_run, "hooks flag flipped during the run");
  return samples;
}

inline BenchReport run_bench_report(const scenario::Scenario& scn,
                                    const sim::StackConfig& stack_config,
                                    const std::optional<kmac::KernelPolicy>& kernel_policy,
                                    BenchMode mode, const BenchOptions& options) {
  std::vector<Sample> samples = run_bench(scn, stack_config, kernel_policy, mode, options);
  return build_report(mode, scn.name, scn.seed, samples);
}

}  // namespace monitord::bench
