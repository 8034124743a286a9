#pragma once

#include <spdlog/spdlog.h>

namespace safefirst {

/// Shared stderr logger. Verbosity comes from SAFEFIRST_LOG (off|info|debug);
/// when unset only warnings and errors are printed.
spdlog::logger& logger();

}  // namespace safefirst
