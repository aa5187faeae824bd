#include "pmme/log.hpp"

#include <cstdlib>
#include <memory>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace pmme::log {

namespace {

std::shared_ptr<spdlog::logger> make_logger() {
    auto logger = spdlog::stderr_color_mt("pmme");
    logger->set_pattern("[%l] %v");
    const char* level = std::getenv("PMME_LOG_LEVEL");
    logger->set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
    return logger;
}

spdlog::logger& logger() {
    static const std::shared_ptr<spdlog::logger> instance = make_logger();
    return *instance;
}

}  // namespace

void debug(const std::string& message) { logger().debug(message); }
void info(const std::string& message) { logger().info(message); }
void warn(const std::string& message) { logger().warn(message); }

}  // namespace pmme::log
