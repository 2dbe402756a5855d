/*
 * Copyright 2026 The HHE-FL Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


// Machine-readable run reports: rounds.jsonl and summary.csv.

#ifndef HHEFL_TOOLS_REPORT_HPP_
#define HHEFL_TOOLS_REPORT_HPP_

#include <filesystem>
#include <string>

#include <json.hpp>

#include "hhefl/protocol/experiment.hpp"

namespace hhefl::cli {

inline constexpr int kSchemaVersion = 1;

nlohmann::ordered_json round_json(const protocol::RoundReport& r, bool timestamps);

// Writes config.toml, rounds.jsonl, summary.csv and transcript.bin into dir.
void write_run(const std::filesystem::path& dir, const protocol::ExperimentResult& res, bool timestamps);

std::string run_id(const protocol::ExperimentConfig& cfg);

}  // namespace hhefl::cli

#endif  // HHEFL_TOOLS_REPORT_HPP_
