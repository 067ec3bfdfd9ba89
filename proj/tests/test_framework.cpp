#include "doctest.h"

#include "support/test_support.hpp"

using namespace monitord;

namespace {

Framework make_framework(TraceRecorder* trace = nullptr) {
  test::register_test_modules();
  Framework fw(trace);
  hooks::register_standard_hooks(fw.hooks());
  return fw;
}

Bundle no_args() { return {}; }
Credentials creds(int uid = 10001, int pid = 101) { return {uid, pid, std::nullopt}; }

}  // namespace

TEST_CASE("register_hook rejects duplicates and schema-less edit hooks") {
  HookRegistry reg;
  HookDescriptor loc{"location.getLastLocation", Layer::middleware, HookCategory::edit_return,
                     {}, SemType::location_fix};
  CHECK(reg.register_hook(loc) == "location.getLastLocation");
  CHECK_THROWS_WITH_AS(reg.register_hook(loc), "DuplicateHookId: location.getLastLocation", Error);
  HookDescriptor bad{"bad.hook", Layer::middleware, HookCategory::edit_return, {}, SemType::none};
  try {
    reg.register_hook(bad);
    FAIL("expected MalformedSchema");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::malformed_schema);
  }
}

TEST_CASE("standard hook catalog spans every category and both kernel hooks") {
  Framework fw = make_framework();
  const HookRegistry& reg = fw.hooks();
  int by_category[5] = {0, 0, 0, 0, 0};
  for (const auto& id : hooks::behavioral_ids()) {
    const HookDescriptor* d = reg.find(id);
    REQUIRE(d != nullptr);
    ++by_category[static_cast<int>(d->category)];
  }
  for (int c = 0; c < 5; ++c) CHECK(by_category[c] >= 1);
  CHECK(reg.size() > 80);  // behavioral subset plus schema-only registrations
  CHECK(reg.find("zygote.applyRlimitSecurityPolicy") != nullptr);
}

TEST_CASE("load_module validates entry point and declared hooks") {
  Framework fw = make_framework();
  ModuleManifest bad_entry = test::make_manifest("no.such.module", {});
  CHECK_THROWS_AS(fw.load_module(bad_entry), Error);
  ModuleManifest bad_hook = test::make_manifest("builtin.default_allow", {"no.such.hook"});
  try {
    fw.load_module(bad_hook);
    FAIL("expected UnknownDeclaredHook");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unknown_declared_hook);
  }
}

TEST_CASE("loading gives zeroed counters for the declared hooks") {
  Framework fw = make_framework();
  ModuleManifest m = test::make_manifest(
      "builtin.default_allow",
      {"pms.scanPackage", "location.getLastLocation", "clip.setPrimaryClip"});
  ModuleHandle& handle = fw.load_module(m);
  CHECK(handle.state() == ModuleState::loaded);
  auto stats = handle.stats();
  CHECK(stats.size() == 3);
  for (const auto& [hook, count] : stats) CHECK(count == 0);
}

TEST_CASE("lifecycle transitions loaded -> initialized -> shut_down only") {
  Framework fw = make_framework();
  sim::SimStack stack;  // for callbacks
  ModuleHandle& handle = fw.load_module(test::default_allow_manifest());
  CHECK_THROWS_AS(fw.shutdown_module(handle), Error);  // not initialized yet
  CHECK(fw.init_module(handle, stack));
  CHECK(handle.state() == ModuleState::initialized);
  CHECK_THROWS_AS(fw.init_module(handle, stack), Error);  // WrongState
  fw.shutdown_module(handle);
  CHECK(handle.state() == ModuleState::shut_down);
  CHECK_THROWS_AS(fw.shutdown_module(handle), Error);
}

TEST_CASE("init returning false leaves the module bypassed") {
  Framework fw = make_framework();
  sim::SimStack stack;
  nlohmann::ordered_json cfg;
  cfg["behavior"] = "init_false";
  ModuleManifest m = test::make_manifest("test.scripted", {"clip.setPrimaryClip"}, cfg);
  ModuleHandle& handle = fw.load_module(m);
  CHECK_FALSE(fw.init_module(handle, stack));
  CHECK(handle.state() == ModuleState::loaded);
  // dispatch bypasses the module entirely, as if hooks were disabled for it
  PolicyDecision d = fw.dispatch_truncation("clip.setPrimaryClip", creds(), no_args());
  CHECK(d.is_allow());
  CHECK(handle.hook_count("clip.setPrimaryClip") == 0);
}

TEST_CASE("default allow module allows any truncation hook") {
  Framework fw = make_framework();
  sim::SimStack stack;
  ModuleHandle& handle = fw.load_module(test::default_allow_manifest());
  REQUIRE(fw.init_module(handle, stack));
  for (const char* hook : {"pms.scanPackage", "clip.setPrimaryClip", "ams.startActivity"}) {
    CHECK(fw.dispatch_truncation(hook, creds(), no_args()).is_allow());
  }
  CHECK(handle.hook_count("pms.scanPackage") == 1);
}

TEST_CASE("hooks disabled short-circuits and freezes counters") {
  Framework fw = make_framework();
  sim::SimStack stack;
  nlohmann::ordered_json cfg;
  cfg["behavior"] = "deny";
  ModuleManifest m = test::make_manifest("test.scripted", {"clip.setPrimaryClip"}, cfg);
  ModuleHandle& handle = fw.load_module(m);
  REQUIRE(fw.init_module(handle, stack));
  fw.set_hooks_enabled(false);
  CHECK(fw.dispatch_truncation("clip.setPrimaryClip", creds(), no_args()).is_allow());
  CHECK(handle.hook_count("clip.setPrimaryClip") == 0);
  fw.set_hooks_enabled(true);
  CHECK(fw.dispatch_truncation("clip.setPrimaryClip", creds(), no_args()).is_deny());
  CHECK(handle.hook_count("clip.setPrimaryClip") == 1);
}

TEST_CASE("module faults fail closed with a module-fault reason") {
  Framework fw = make_framework();
  sim::SimStack stack;
  nlohmann::ordered_json cfg;
  cfg["behavior"] = "fault";
  ModuleManifest m =
      test::make_manifest("test.scripted", {"clip.setPrimaryClip", "phonesubinfo.getDeviceId"}, cfg);
  ModuleHandle& handle = fw.load_module(m);
  REQUIRE(fw.init_module(handle, stack));
  PolicyDecision d = fw.dispatch_truncation("clip.setPrimaryClip", creds(), no_args());
  CHECK(d.is_deny());
  CHECK(d.reason().rfind("module-fault:", 0) == 0);
  EditResult r = fw.dispatch_edit("phonesubinfo.getDeviceId", creds(), no_args(), Value("12345"));
  CHECK(r.denied());
  CHECK(r.deny_reason.rfind("module-fault:", 0) == 0);
}

TEST_CASE("edit dispatch passes candidates through unchanged on allow") {
  Framework fw = make_framework();
  sim::SimStack stack;
  ModuleHandle& handle = fw.load_module(test::default_allow_manifest());
  REQUIRE(fw.init_module(handle, stack));
  LocationFix fix{52.1, 13.4, 7};
  EditResult r = fw.dispatch_edit("location.getLastLocation", creds(), no_args(), fix.to_value());
  REQUIRE_FALSE(r.denied());
  CHECK(LocationFix::from_value(*r.value) == fix);
}

TEST_CASE("edits violating the return schema are denied as module faults") {
  Framework fw = make_framework();
  sim::SimStack stack;
  nlohmann::ordered_json cfg;
  cfg["behavior"] = "edit_int";  // wrong type for a text-returning hook
  ModuleManifest m = test::make_manifest("test.scripted", {"phonesubinfo.getDeviceId"}, cfg);
  ModuleHandle& handle = fw.load_module(m);
  REQUIRE(fw.init_module(handle, stack));
  EditResult r = fw.dispatch_edit("phonesubinfo.getDeviceId", creds(), no_args(), Value("111"));
  CHECK(r.denied());
  CHECK(r.deny_reason == "module-fault:schema");
}

TEST_CASE("an edit from a truncation hook fails closed") {
  Framework fw = make_framework();
  sim::SimStack stack;
  nlohmann::ordered_json cfg;
  cfg["behavior"] = "edit_int";
  ModuleManifest m = test::make_manifest("test.scripted", {"clip.setPrimaryClip"}, cfg);
  ModuleHandle& handle = fw.load_module(m);
  REQUIRE(fw.init_module(handle, stack));
  PolicyDecision d = fw.dispatch_truncation("clip.setPrimaryClip", creds(), no_args());
  CHECK(d.is_deny());
}

TEST_CASE("dispatch rejects category mismatches and unknown hooks") {
  Framework fw = make_framework();
  CHECK_THROWS_AS(fw.dispatch_truncation("location.getLastLocation", creds(), no_args()), Error);
  CHECK_THROWS_AS(fw.dispatch_edit("clip.setPrimaryClip", creds(), no_args(), Value(1)), Error);
  CHECK_THROWS_AS(fw.dispatch_truncation("no.such.hook", creds(), no_args()), Error);
}

TEST_CASE("undeclared hooks route to the default-allow base without counting") {
  Framework fw = make_framework();
  sim::SimStack stack;
  nlohmann::ordered_json cfg;
  cfg["behavior"] = "deny";
  ModuleManifest m = test::make_manifest("test.scripted", {"clip.setPrimaryClip"}, cfg);
  ModuleHandle& handle = fw.load_module(m);
  REQUIRE(fw.init_module(handle, stack));
  // pms.scanPackage is not declared: the deny-everything module never sees it
  CHECK(fw.dispatch_truncation("pms.scanPackage", creds(), no_args()).is_allow());
  CHECK(handle.hook_count("pms.scanPackage") == 0);
}

TEST_CASE("call_module reaches the module and requires one") {
  Framework fw = make_framework();
  sim::SimStack stack;
  Bundle ping;
  ping.put_text("cmd", "ping");
  CHECK_THROWS_AS(fw.call_module(ping), Error);  // NoModuleLoaded
  ModuleHandle& handle = fw.load_module(test::default_allow_manifest());
  REQUIRE(fw.init_module(handle, stack));
  Bundle response = fw.call_module(ping);
  CHECK(response.get_text("status") == "unsupported");
}

TEST_CASE("package events are delivered only to initialized modules, in order") {
  test::RecorderLog::reset();
  Framework fw = make_framework();
  sim::SimStack stack;
  PackageInfo a = test::make_package("com.example.a");
  fw.notify_package_event(PackageEventKind::installed, a);  // no module: no-op
  CHECK(test::RecorderLog::instance().events.empty());

  ModuleManifest m = test::make_manifest("test.recorder", {});
  ModuleHandle& handle = fw.load_module(m);
  REQUIRE(fw.init_module(handle, stack));
  PackageInfo b = test::make_package("com.example.b");
  fw.notify_package_event(PackageEventKind::installed, a);
  fw.notify_package_event(PackageEventKind::installed, b);
  fw.notify_package_event(PackageEventKind::removed, a);
  auto& events = test::RecorderLog::instance().events;
  REQUIRE(events.size() == 3);
  CHECK(events[0] == std::pair<std::string, std::string>{"installed", "com.example.a"});
  CHECK(events[1] == std::pair<std::string, std::string>{"installed", "com.example.b"});
  CHECK(events[2] == std::pair<std::string, std::string>{"removed", "com.example.a"});
}

TEST_CASE("event faults are logged but the event counts as delivered") {
  Framework fw = make_framework();
  sim::SimStack stack;
  nlohmann::ordered_json cfg;
  cfg["behavior"] = "event_fault";
  ModuleManifest m = test::make_manifest("test.scripted", {});
  m.config = cfg;
  ModuleHandle& handle = fw.load_module(m);
  REQUIRE(fw.init_module(handle, stack));
  CHECK_NOTHROW(fw.notify_package_event(PackageEventKind::installed, test::make_package("x")));
}

TEST_CASE("reload is gated by the feature flag and prior shutdown") {
  Framework fw = make_framework();
  sim::SimStack stack;
  ModuleHandle& first = fw.load_module(test::default_allow_manifest());
  REQUIRE(fw.init_module(first, stack));
  CHECK_THROWS_AS(fw.load_module(test::default_allow_manifest()), Error);  // single slot

  nlohmann::ordered_json cfg;
  cfg["behavior"] = "deny";
  ModuleManifest denier = test::make_manifest("test.scripted", {"clip.setPrimaryClip"}, cfg);

  try {
    fw.reload_module(denier);
    FAIL("expected FeatureDisabled");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::feature_disabled);
  }

  fw.set_reload_enabled(true);
  try {
    fw.reload_module(denier);  // old module still initialized
    FAIL("expected WrongState");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::wrong_state);
  }

  fw.shutdown_module(first);
  ModuleHandle& second = fw.reload_module(denier);
  REQUIRE(fw.init_module(second, stack));
  CHECK(fw.dispatch_truncation("clip.setPrimaryClip", creds(), no_args()).is_deny());
}

TEST_CASE("resolve_package_for_pid consults the callbacks") {
  test::register_test_modules();
  sim::SimStack stack;
  stack.install_package(test::make_package("com.example.a"), stack.system_credentials());
  sim::SimApp app = stack.launch_app_process("com.example.a", stack.system_credentials());
  CHECK(stack.framework().resolve_package_for_pid(app.pid) == "com.example.a");
  CHECK_THROWS_AS(stack.framework().resolve_package_for_pid(99999), Error);
  stack.uninstall_package("com.example.a", stack.system_credentials());
  CHECK_THROWS_AS(stack.framework().resolve_package_for_pid(app.pid), Error);
}
