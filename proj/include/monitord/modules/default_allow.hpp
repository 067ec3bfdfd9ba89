#pragma once

#include "monitord/module_api.hpp"

namespace monitord::policy {

// The no-op base module: every enforcement function allows, nothing is
// edited, the proprietary channel is unsupported. Used both as the benchmark
// no-op module and as the default-allow equivalence reference.
class DefaultAllowModule : public SecurityModule {};

}  // namespace monitord::policy
