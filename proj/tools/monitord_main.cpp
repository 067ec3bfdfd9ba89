// monitord CLI: assembles the stack from config files, loads a module,
// executes scripted scenarios, runs micro-benchmarks and exposes the
// module's Bundle channel.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "monitord/monitord.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitExpectFailure = 1;
constexpr int kExitConfigError = 2;

std::optional<monitord::kmac::KernelPolicy> load_kernel_policy(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return monitord::kmac::KernelPolicy::load(path);
}

int cmd_run(const std::string& scenario_path, const std::string& stack_path,
            const std::string& module_path, const std::string& kernel_path, bool disable_hooks,
            std::optional<std::uint64_t> seed, const std::string& format) {
  monitord::scenario::Scenario scn = monitord::scenario::parse_scenario(scenario_path);
  monitord::sim::StackConfig stack = monitord::sim::StackConfig::load(stack_path);
  std::optional<monitord::ModuleManifest> manifest;
  if (!module_path.empty()) manifest = monitord::ModuleManifest::load(module_path);
  std::optional<monitord::kmac::KernelPolicy> kernel = load_kernel_policy(kernel_path);

  monitord::scenario::RunOptions options;
  options.disable_hooks = disable_hooks;
  options.seed_override = seed;
  monitord::scenario::ScenarioRunner runner;
  monitord::scenario::RunReport report = runner.run(scn, stack, manifest, kernel, options);
  std::cout << monitord::scenario::emit_report(report, format);
  return report.passed() ? kExitPass : kExitExpectFailure;
}

int cmd_bench(const std::string& scenario_path, const std::string& stack_path,
              const std::string& kernel_path, const std::string& mode, int iterations, int warmup,
              const std::string& out_csv, const std::string& summary_path,
              const std::string& cfd_path) {
  namespace bench = monitord::bench;
  monitord::scenario::Scenario scn = monitord::scenario::parse_scenario(scenario_path);
  monitord::sim::StackConfig stack =
      stack_path.empty() ? monitord::sim::StackConfig{} : monitord::sim::StackConfig::load(stack_path);
  std::optional<monitord::kmac::KernelPolicy> kernel = load_kernel_policy(kernel_path);
  bench::BenchOptions options;
  options.iterations = iterations;
  options.warmup = warmup;

  std::ofstream csv(out_csv);
  if (!csv) throw monitord::Error(monitord::Errc::config_error, "cannot write " + out_csv);

  auto run_one = [&](bench::BenchMode m) {
    return bench::run_bench_report(scn, stack, kernel, m, options);
  };

  if (mode == "enabled" || mode == "disabled") {
    bench::BenchReport report = run_one(mode == "enabled"
                                            ? bench::BenchMode::hooks_enabled_noop_module
                                            : bench::BenchMode::hooks_disabled);
    bench::write_stats_csv(csv, report);
    std::cout << "mode " << bench::bench_mode_name(report.mode) << " weighted mean "
              << report.weighted_mean_us << " us over " << report.stats.size() << " hooks\n";
    if (!summary_path.empty()) {
      nlohmann::ordered_json j;
      j["scenario"] = report.scenario_name;
      j["seed"] = report.seed;
      j["mode"] = bench::bench_mode_name(report.mode);
      j["weighted_mean_us"] = report.weighted_mean_us;
      std::ofstream out(summary_path);
      out << j.dump(2) << "\n";
    }
    return kExitPass;
  }

  // mode "both": run the two series and report the overhead ratio.
  bench::BenchReport enabled = run_one(bench::BenchMode::hooks_enabled_noop_module);
  bench::BenchReport disabled = run_one(bench::BenchMode::hooks_disabled);
  bench::write_stats_csv(csv, enabled);
  for (const auto& s : disabled.stats) {
    csv << s.hook_id << ',' << bench::bench_mode_name(disabled.mode) << ',' << s.frequency << ','
        << s.mean_us << ',' << s.margin_us << '\n';
  }
  bench::Comparison cmp = bench::compare_reports(enabled, disabled);
  std::cout << "enabled weighted mean  " << enabled.weighted_mean_us << " us\n"
            << "disabled weighted mean " << disabled.weighted_mean_us << " us\n"
            << "overhead ratio         " << cmp.overhead_ratio * 100.0 << " %\n";
  if (!summary_path.empty()) {
    std::ofstream out(summary_path);
    out << bench::summary_json(enabled, disabled, cmp).dump(2) << "\n";
  }
  if (!cfd_path.empty()) {
    std::ofstream out(cfd_path);
    bench::write_cfd_csv(out, cmp);
  }
  return kExitPass;
}

int cmd_call_module(const std::string& module_path, const std::string& bundle_json,
                    const std::string& stack_path) {
  monitord::ModuleManifest manifest = monitord::ModuleManifest::load(module_path);
  monitord::sim::StackConfig config =
      stack_path.empty() ? monitord::sim::StackConfig{} : monitord::sim::StackConfig::load(stack_path);
  monitord::sim::SimStack stack(config);
  monitord::ModuleHandle& handle = stack.load_module(manifest);
  if (!stack.init_module(handle))
    throw monitord::Error(monitord::Errc::config_error, "module init returned false");

  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(bundle_json);
  } catch (const nlohmann::json::parse_error& e) {
    throw monitord::Error(monitord::Errc::parse_error, std::string("--bundle: ") + e.what());
  }
  monitord::Bundle request = monitord::Bundle::from_plain_json(j);
  // The CLI is the front-end app analogue; the module sees shell credentials.
  monitord::Bundle response = stack.call_module(request, monitord::shell_credentials());
  std::cout << response.to_plain_json().dump(2) << "\n";
  stack.framework().shutdown_module(handle);
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"monitord: policy-module reference monitor simulator"};
  app.require_subcommand(1);

  // run
  std::string run_scenario, run_stack, run_module, run_kernel, run_format = "text";
  bool run_disable_hooks = false;
  std::optional<std::uint64_t> run_seed;
  CLI::App* run = app.add_subcommand("run", "execute a scripted scenario");
  run->add_option("--scenario", run_scenario, "scenario file")->required();
  run->add_option("--stack", run_stack, "stack config file")->required();
  run->add_option("--module", run_module, "module manifest file");
  run->add_option("--kernel-policy", run_kernel, "kernel policy file");
  run->add_flag("--disable-hooks", run_disable_hooks, "short-circuit every enforcement hook");
  run->add_option("--seed", run_seed, "seed override");
  run->add_option("--report", run_format, "report format")->check(CLI::IsMember({"text", "json"}));

  // bench
  std::string bench_scenario, bench_stack, bench_kernel, bench_mode, bench_out;
  std::string bench_summary, bench_cfd;
  int bench_iterations = 200;
  int bench_warmup = 1000;
  CLI::App* bench = app.add_subcommand("bench", "micro-benchmark hooked operations");
  bench->add_option("--scenario", bench_scenario, "scenario file")->required();
  bench->add_option("--stack", bench_stack, "stack config file");
  bench->add_option("--kernel-policy", bench_kernel, "kernel policy file");
  bench->add_option("--mode", bench_mode, "measurement mode")
      ->required()
      ->check(CLI::IsMember({"enabled", "disabled", "both"}));
  bench->add_option("--iterations", bench_iterations, "measured iterations")->required();
  bench->add_option("--warmup", bench_warmup, "discarded warm-up iterations");
  bench->add_option("--out", bench_out, "per-hook stats csv")->required();
  bench->add_option("--summary", bench_summary, "summary json path");
  bench->add_option("--cfd", bench_cfd, "cumulative-distribution csv path");

  // call-module
  std::string call_module_path, call_bundle, call_stack;
  CLI::App* call = app.add_subcommand("call-module", "send a Bundle to a module");
  call->add_option("--module", call_module_path, "module manifest file")->required();
  call->add_option("--bundle", call_bundle, "request bundle as json")->required();
  call->add_option("--stack", call_stack, "stack config file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(run_scenario, run_stack, run_module, run_kernel, run_disable_hooks, run_seed,
                     run_format);
    if (bench->parsed())
      return cmd_bench(bench_scenario, bench_stack, bench_kernel, bench_mode, bench_iterations,
                       bench_warmup, bench_out, bench_summary, bench_cfd);
    if (call->parsed()) return cmd_call_module(call_module_path, call_bundle, call_stack);
  } catch (const monitord::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}
