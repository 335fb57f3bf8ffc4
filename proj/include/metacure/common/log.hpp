#pragma once

#include <string>

namespace metacure {

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

// Level comes from the METACURE_LOG environment variable (quiet/info/debug),
// read once on first use. Unrecognized values fall back to info.
LogLevel log_level();

void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace metacure
