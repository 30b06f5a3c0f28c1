// Copyright 2026 The tkg Authors. All Rights Reserved.
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

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "json.hpp"

namespace tkg {

/// Append-only JSON-lines checkpoint. Each completed unit of backend work is
/// one line, flushed immediately, so an interrupted run can resume. A
/// truncated final line (crash mid-write) is ignored on load.
class ProgressLog {
 public:
  ProgressLog() = default;  // disabled: appends are dropped
  explicit ProgressLog(std::filesystem::path path);

  bool enabled() const { return path_.has_value(); }
  const std::vector<nlohmann::json>& entries() const { return entries_; }

  /// Thread-safe.
  void append(const nlohmann::json& entry);

 private:
  std::optional<std::filesystem::path> path_;
  std::vector<nlohmann::json> entries_;
  std::mutex mu_;
  std::ofstream out_;
};

/// Runs fn(0) .. fn(n-1) on `workers` threads (bounded I/O parallelism for
/// backend calls). Rethrows the first exception after all workers stop.
void run_parallel(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace tkg
