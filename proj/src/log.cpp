#include "safefirst/log.hpp"

#include <cstdlib>
#include <string_view>

#include <spdlog/sinks/stdout_color_sinks.h>

namespace safefirst {

namespace {

spdlog::level::level_enum level_from_env() {
  const char* raw = std::getenv("SAFEFIRST_LOG");
  if (raw == nullptr) return spdlog::level::warn;
  const std::string_view value(raw);
  if (value == "off") return spdlog::level::off;
  if (value == "info") return spdlog::level::info;
  if (value == "debug") return spdlog::level::debug;
  return spdlog::level::warn;
}

}  // namespace

spdlog::logger& logger() {
  static const auto instance = [] {
    auto l = spdlog::stderr_color_mt("safefirst");
    l->set_level(level_from_env());
    l->set_pattern("[%l] %v");
    return l;
  }();
  return *instance;
}

}  // namespace safefirst
