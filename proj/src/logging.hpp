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

#ifndef FEDREID_LOGGING_HPP_
#define FEDREID_LOGGING_HPP_

#include <cstddef>
#include <string>

namespace fedreid {

enum class LogLevel { kDebug, kInfo, kWarning, kError, kOff };

void SetLogLevel(LogLevel level);

void LogInfo(const std::string &message);
void LogWarning(const std::string &message);

/// Number of warnings emitted by this process so far (tests use it to check
/// that fallbacks were reported).
std::size_t WarningCount();

}  // namespace fedreid

#endif  // FEDREID_LOGGING_HPP_
