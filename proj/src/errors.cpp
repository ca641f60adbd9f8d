// Copyright 2026 The sctm Authors
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

#include "sctm/errors.hpp"

#include <atomic>
#include <iostream>

namespace sctm {
namespace {

void default_sink(const std::string& message) { std::clog << "warning: " << message << '\n'; }

std::atomic<void (*)(const std::string&)> g_sink{&default_sink};

}  // namespace

void warn(const std::string& message) { g_sink.load()(message); }

void set_warning_sink(void (*sink)(const std::string&)) { g_sink.store(sink != nullptr ? sink : &default_sink); }

}  // namespace sctm
