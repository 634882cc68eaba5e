// Copyright 2026 The qfedsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <string>

namespace qfed::log {

enum class Level { kInfo, kWarn };

using Sink = std::function<void(Level, const std::string&)>;

/// Replaces the process-wide sink; returns the previous one. The default
/// sink writes warnings to stderr and drops info messages.
Sink set_sink(Sink sink);

void warn(const std::string& msg);
void info(const std::string& msg);

}  // namespace qfed::log
