#include "metacure/common/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

namespace metacure {

LogLevel log_level() {
  static LogLevel level = [] {
    const char* raw = std::getenv("METACURE_LOG");
    if (raw == nullptr) return LogLevel::Info;
    std::string v(raw);
    if (v == "quiet") return LogLevel::Quiet;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Info;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::Info) std::fprintf(stderr, "%s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::Debug) std::fprintf(stderr, "%s\n", msg.c_str());
}

}  // namespace metacure
