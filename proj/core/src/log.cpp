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

#include "qfed/log.hpp"

#include <iostream>
#include <mutex>

namespace qfed::log {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

Sink& current_sink() {
  static Sink sink = [](Level level, const std::string& msg) {
    if (level == Level::kWarn) std::cerr << "warning: " << msg << '\n';
  };
  return sink;
}

void emit(Level level, const std::string& msg) {
  std::lock_guard lock(sink_mutex());
  if (current_sink()) current_sink()(level, msg);
}

}  // namespace

Sink set_sink(Sink sink) {
  std::lock_guard lock(sink_mutex());
  std::swap(current_sink(), sink);
  return sink;
}

void warn(const std::string& msg) { emit(Level::kWarn, msg); }
void info(const std::string& msg) { emit(Level::kInfo, msg); }

}  // namespace qfed::log
