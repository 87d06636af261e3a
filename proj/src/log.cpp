#include "sbs/log.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace sbs {

void configure_logging_from_env() {
  auto logger = spdlog::stderr_color_mt("sbs");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("SBS_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honor recognized ones.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

}  // namespace sbs
