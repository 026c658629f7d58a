#include "qualit/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>

namespace qualit {

std::shared_ptr<spdlog::logger> logger() {
    static auto instance = [] {
        auto sink = std::make_shared<spdlog::sinks::stderr_sink_mt>();
        auto log = std::make_shared<spdlog::logger>("qualit", sink);
        log->set_pattern("[%l] %v");
        log->set_level(spdlog::level::info);
        return log;
    }();
    return instance;
}

}  // namespace qualit
