#pragma once

#include <spdlog/logger.h>

#include <memory>

namespace qualit {

// Process-wide logger writing to stderr through a mutex-guarded sink, so lines
// from concurrent workers never interleave.
std::shared_ptr<spdlog::logger> logger();

}  // namespace qualit
