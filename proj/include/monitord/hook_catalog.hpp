#pragma once

#include <string>
#include <vector>

#include "monitord/hooks.hpp"

namespace monitord::hooks {

// Hook ids the simulator actually dispatches. Everything else registered by
// register_standard_hooks is schema-only: present in the registry so modules
// can declare it and audits can see it, but no simulated service drives it.
inline const std::vector<std::string>& behavioral_ids() {
  static const std::vector<std::string> ids = {
      "pms.scanPackage",
      "pms.getInstalledPackages",
      "broadcast.deliverToRegisteredReceiver",
      "ams.startActivity",
      "ams.bindService",
      "ams.checkComponentPermission",
      "location.getLastLocation",
      "location.getAllProviders",
      "location.reportLocation",
      "cp.preQuery",
      "cp.postQuery",
      "phonesubinfo.getDeviceId",
      "clip.getPrimaryClip",
      "clip.setPrimaryClip",
      "generic.instrumentApp",
      "generic.callModule",
      "event.packageInstalled",
      "event.packageReplaced",
      "event.packageRemoved",
      "zygote.applyUidSecurityPolicy",
      "zygote.applySecurityLabelPolicy",
      "kmac.checkAccess",
  };
  return ids;
}

inline void register_standard_hooks(HookRegistry& reg) {
  using C = HookCategory;
  using T = SemType;
  auto mw = [&](const std::string& id, C cat, std::vector<ArgSpec> args, T ret = T::none) {
    reg.register_hook({id, Layer::middleware, cat, std::move(args), ret});
  };
  auto kn = [&](const std::string& id, C cat, std::vector<ArgSpec> args, T ret = T::none) {
    reg.register_hook({id, Layer::kernel, cat, std::move(args), ret});
  };
  auto app = [&](const std::string& id, C cat, std::vector<ArgSpec> args, T ret = T::none) {
    reg.register_hook({id, Layer::application, cat, std::move(args), ret});
  };

  const ArgSpec uid{"uid", T::integer};
  const ArgSpec pid{"pid", T::integer};

  // --- package manager ---
  mw("pms.scanPackage", C::boolean_truncation, {{"package", T::record}});
  mw("pms.getInstalledPackages", C::list_filter, {uid, pid}, T::record_list);
  mw("pms.getPackageInfo", C::boolean_truncation, {{"package", T::record}, uid, pid});
  mw("pms.getPackageUid", C::boolean_truncation, {{"package", T::text}, uid, pid});
  mw("pms.getPackagesForUid", C::list_filter, {{"for_uid", T::integer}, uid, pid}, T::text_list);
  mw("pms.getNameForUid", C::boolean_truncation, {{"for_uid", T::integer}, {"name", T::text}, uid, pid});
  mw("pms.queryIntentActivities", C::list_filter, {{"action", T::text}, uid, pid}, T::record_list);
  mw("pms.queryIntentReceivers", C::list_filter, {{"action", T::text}, uid, pid}, T::record_list);
  mw("pms.queryIntentServices", C::list_filter, {{"action", T::text}, uid, pid}, T::record_list);
  mw("pms.getActivityInfo", C::boolean_truncation, {{"component", T::text}, uid, pid});
  mw("pms.getReceiverInfo", C::boolean_truncation, {{"component", T::text}, uid, pid});
  mw("pms.getServiceInfo", C::boolean_truncation, {{"component", T::text}, uid, pid});
  mw("pms.getProviderInfo", C::boolean_truncation, {{"component", T::text}, uid, pid});
  mw("pms.findPreferredActivity", C::boolean_truncation, {{"action", T::text}, uid, pid});
  mw("pms.getInstalledApplications", C::list_filter, {uid, pid}, T::record_list);
  mw("pms.deletePackage", C::boolean_truncation, {{"package", T::record}, uid, pid});

  // --- broadcast queue ---
  mw("broadcast.deliverToRegisteredReceiver", C::boolean_truncation,
     {{"action", T::text},
      {"target_component", T::text},
      {"required_permission", T::text},
      {"target_uid", T::integer},
      {"target_pid", T::integer},
      {"caller_package", T::text},
      {"calling_uid", T::integer},
      {"calling_pid", T::integer},
      {"extras", T::record}});
  mw("broadcast.processNextBroadcast", C::boolean_truncation,
     {{"action", T::text}, {"caller_package", T::text}, {"calling_uid", T::integer},
      {"calling_pid", T::integer}});

  // --- activity manager ---
  mw("ams.startActivity", C::boolean_truncation,
     {{"action", T::text}, {"target_component", T::text}, {"target_package", T::text},
      {"target_uid", T::integer}, uid, pid});
  mw("ams.finishActivity", C::boolean_truncation, {{"component", T::text}, uid, pid});
  mw("ams.moveTaskToFront", C::boolean_truncation, {{"component", T::text}, uid, pid});
  mw("ams.moveTaskToBack", C::boolean_truncation, {{"component", T::text}, uid, pid});
  mw("ams.clearApplicationUserData", C::boolean_truncation, {{"package", T::text}, uid, pid});
  mw("ams.checkComponentPermission", C::edit_return,
     {{"permission", T::text}, {"owner_uid", T::integer}, {"exported", T::boolean},
      {"stock", T::boolean}, uid, pid},
     T::boolean);
  mw("ams.checkUriPermission", C::boolean_truncation, {{"uri", T::text}, uid, pid});
  mw("ams.checkGrantUriPermission", C::boolean_truncation,
     {{"uri", T::text}, {"target_package", T::text}, uid, pid});
  mw("ams.checkAppSwitchAllowed", C::boolean_truncation, {uid, pid});

  // --- active services ---
  mw("ams.startService", C::boolean_truncation, {{"component", T::text}, uid, pid});
  mw("ams.stopService", C::boolean_truncation, {{"component", T::text}, uid, pid});
  mw("ams.bindService", C::boolean_truncation,
     {{"action", T::text}, {"target_component", T::text}, {"target_package", T::text},
      {"target_uid", T::integer}, uid, pid});
  mw("ams.getServices", C::list_filter, {uid, pid}, T::record_list);

  // --- content providers ---
  mw("cp.preQuery", C::error_truncation,
     {{"store", T::text}, {"selection", T::record}, uid, pid});
  mw("cp.postQuery", C::edit_return,
     {{"store", T::text}, {"selection", T::record}, uid, pid}, T::result_set);
  mw("cp.insert", C::boolean_truncation, {{"store", T::text}, uid, pid});
  mw("cp.update", C::boolean_truncation, {{"store", T::text}, uid, pid});
  mw("cp.delete", C::boolean_truncation, {{"store", T::text}, uid, pid});
  mw("cp.openFile", C::boolean_truncation, {{"uri", T::text}, {"mode", T::text}, uid, pid});
  mw("cp.preCall", C::boolean_truncation, {{"method", T::text}, uid, pid});
  mw("cp.postCall", C::edit_return, {{"method", T::text}, uid, pid}, T::record);

  // --- location service ---
  mw("location.getLastLocation", C::edit_return, {uid, pid}, T::location_fix);
  mw("location.getAllProviders", C::list_filter, {uid, pid}, T::text_list);
  mw("location.getProviders", C::list_filter, {{"enabled_only", T::boolean}, uid, pid}, T::text_list);
  mw("location.reportLocation", C::edit_return, {{"passive", T::boolean}, uid, pid}, T::location_fix);
  mw("location.requestLocationUpdates", C::boolean_truncation, {uid, pid});
  mw("location.removeLocationUpdates", C::boolean_truncation, {uid, pid});
  mw("location.isProviderEnabled", C::boolean_truncation, {{"provider", T::text}, uid, pid});
  mw("location.sendExtraCommand", C::boolean_truncation,
     {{"provider", T::text}, {"command", T::text}, uid, pid});
  mw("location.requestGeofence", C::boolean_truncation, {uid, pid});

  // --- audio ---
  mw("audio.adjustStreamVolume", C::boolean_truncation,
     {{"stream", T::integer}, {"direction", T::integer}, uid, pid});
  mw("audio.setStreamVolume", C::boolean_truncation,
     {{"stream", T::integer}, {"index", T::integer}, uid, pid});
  mw("audio.setRingerMode", C::boolean_truncation, {{"mode", T::integer}, uid, pid});

  // --- telephony / sms ---
  mw("telephony.call", C::boolean_truncation, {{"number", T::text}, uid, pid});
  mw("telephony.getNeighboringCellInfo", C::list_filter, {uid, pid}, T::record_list);
  mw("sms.sendText", C::boolean_truncation,
     {{"dest", T::text}, {"text", T::text}, uid, pid});
  mw("sms.sendData", C::boolean_truncation, {{"dest", T::text}, {"data", T::bytes}, uid, pid});
  mw("sms.getAllMessagesFromIcc", C::boolean_truncation, {uid, pid});

  // --- wifi ---
  mw("wifi.startScan", C::boolean_truncation, {uid, pid});
  mw("wifi.getScanResult", C::list_filter, {uid, pid}, T::record_list);
  mw("wifi.setWifiEnabled", C::boolean_truncation, {{"enable", T::boolean}, uid, pid});
  mw("wifi.getConfiguredNetworks", C::list_filter, {uid, pid}, T::record_list);

  // --- clipboard ---
  mw("clip.getPrimaryClip", C::edit_return, {{"clip_uid", T::integer}, uid, pid}, T::text);
  mw("clip.setPrimaryClip", C::boolean_truncation, {{"clip", T::text}, uid, pid});
  mw("clip.getPrimaryClipDescription", C::edit_return, {uid, pid}, T::text);
  mw("clip.hasPrimaryClip", C::boolean_truncation, {uid, pid});
  mw("clip.hasClipboardText", C::boolean_truncation, {uid, pid});

  // --- power ---
  mw("power.acquireWakeLock", C::boolean_truncation, {{"tag", T::text}, uid, pid});
  mw("power.goToSleep", C::boolean_truncation, {uid, pid});
  mw("power.reboot", C::boolean_truncation, {{"reason", T::text}, uid, pid});
  mw("power.userActivity", C::boolean_truncation, {uid, pid});

  // --- phone subscriber info ---
  mw("phonesubinfo.getDeviceId", C::edit_return, {uid, pid}, T::text);
  mw("phonesubinfo.getSubscriberId", C::edit_return, {uid, pid}, T::text);
  mw("phonesubinfo.getIccSerialNumber", C::edit_return, {uid, pid}, T::text);
  mw("phonesubinfo.getLine1Number", C::edit_return, {uid, pid}, T::text);
  mw("phonesubinfo.getMsisdn", C::edit_return, {uid, pid}, T::text);

  // --- generic + package events (observe-only) ---
  mw("generic.checkPolicy", C::observe_only, {{"arguments", T::record}});
  mw("generic.callModule", C::observe_only, {{"request", T::record}, uid, pid});
  mw("event.packageInstalled", C::observe_only, {{"package", T::record}});
  mw("event.packageReplaced", C::observe_only, {{"package", T::record}});
  mw("event.packageRemoved", C::observe_only, {{"package", T::record}});

  // --- application layer (IRM bootstrap selection) ---
  app("generic.instrumentApp", C::edit_return, {{"package", T::text}}, T::text);

  // --- kernel layer: process-spawn policy + generic access check. The first
  // two are behaviorally consulted at spawn; the rlimit/capabilities/invoke
  // hooks exist schema-only because the simulated kernel has neither.
  kn("zygote.applyUidSecurityPolicy", C::error_truncation,
     {{"peer_uid", T::integer}, {"peer_pid", T::integer}, {"peer_context", T::record},
      {"requested_uid", T::integer}});
  kn("zygote.applySecurityLabelPolicy", C::error_truncation,
     {{"peer_uid", T::integer}, {"peer_pid", T::integer}, {"peer_context", T::record},
      {"requested_label", T::record}});
  kn("zygote.applyRlimitSecurityPolicy", C::error_truncation,
     {{"peer_uid", T::integer}, {"peer_pid", T::integer}, {"peer_context", T::record}});
  kn("zygote.applyCapabilitiesSecurityPolicy", C::error_truncation,
     {{"peer_uid", T::integer}, {"peer_pid", T::integer}, {"peer_context", T::record}});
  kn("zygote.applyInvokeWithSecurityPolicy", C::error_truncation,
     {{"peer_uid", T::integer}, {"peer_pid", T::integer}, {"peer_context", T::record}});
  kn("kmac.checkAccess", C::error_truncation,
     {{"subject", T::record}, {"object", T::record}, {"class", T::text}, {"op", T::text}});
}

}  // namespace monitord::hooks
