/**
 * Copyright 2026 The FedReID-Sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "logging.hpp"

#include <atomic>
#include <memory>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace fedreid {

namespace {

std::atomic<std::size_t> g_warnings{0};

spdlog::logger &Logger() {
  static std::shared_ptr<spdlog::logger> logger = [] {
    auto l = spdlog::stderr_color_mt("fedreid");
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::warn);
    return l;
  }();
  return *logger;
}

}  // namespace

void SetLogLevel(LogLevel level) {
  switch (level) {
    case LogLevel::kDebug: Logger().set_level(spdlog::level::debug); break;
    case LogLevel::kInfo: Logger().set_level(spdlog::level::info); break;
    case LogLevel::kWarning: Logger().set_level(spdlog::level::warn); break;
    case LogLevel::kError: Logger().set_level(spdlog::level::err); break;
    case LogLevel::kOff: Logger().set_level(spdlog::level::off); break;
  }
}

void LogInfo(const std::string &message) { Logger().info(message); }

void LogWarning(const std::string &message) {
  g_warnings.fetch_add(1, std::memory_order_relaxed);
  Logger().warn(message);
}

std::size_t WarningCount() { return g_warnings.load(std::memory_order_relaxed); }

}  // namespace fedreid
