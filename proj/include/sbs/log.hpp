#pragma once

namespace sbs {

/// Sets the spdlog level from the SBS_LOG environment variable
/// (trace, debug, info, warn, err, critical, off). Defaults to warn.
void configure_logging_from_env();

}  // namespace sbs
