#pragma once

// monitord: a policy-agnostic reference-monitor framework on a simulated
// multi-tier OS stack. Loadable security modules make truncation and
// edit-automata decisions at kernel-, middleware- and application-layer
// hooks.

#include "monitord/base64.hpp"
#include "monitord/bench.hpp"
#include "monitord/bench_runner.hpp"
#include "monitord/bundle.hpp"
#include "monitord/decision.hpp"
#include "monitord/errors.hpp"
#include "monitord/framework.hpp"
#include "monitord/hook_catalog.hpp"
#include "monitord/hooks.hpp"
#include "monitord/irm.hpp"
#include "monitord/kmac.hpp"
#include "monitord/log.hpp"
#include "monitord/module_api.hpp"
#include "monitord/modules/builtin.hpp"
#include "monitord/modules/catalog.hpp"
#include "monitord/scenario.hpp"
#include "monitord/sim_types.hpp"
#include "monitord/stack.hpp"
#include "monitord/trace.hpp"
