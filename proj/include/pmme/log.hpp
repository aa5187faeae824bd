#pragma once

#include <string>

namespace pmme::log {

// Verbosity comes from the PMME_LOG_LEVEL environment variable
// (trace, debug, info, warn, error, off); the default is warn.
void debug(const std::string& message);
void info(const std::string& message);
void warn(const std::string& message);

}  // namespace pmme::log
