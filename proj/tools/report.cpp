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


#include "report.hpp"

#include <fstream>
#include <iomanip>

#include "hhefl/error.hpp"

namespace hhefl::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

ordered_json round_json(const protocol::RoundReport& r, bool timestamps) {
  const auto& t = r.timings;
  auto secs = [&](double v) { return timestamps ? v : 0.0; };
  ordered_json excluded = ordered_json::array();
  for (const auto& e : r.excluded) excluded.push_back({{"client", e.client}, {"reason", e.reason}});
  ordered_json bytes = ordered_json::object();
  for (const auto& [k, v] : r.bytes_by_type) bytes[k] = v;
  return {
      {"schema_version", kSchemaVersion},
      {"round", r.round},
      {"mode", keyprot::to_string(r.mode)},
      {"accuracy", r.metrics.accuracy},
      {"loss", r.metrics.loss},
      {"test_samples", r.metrics.test_sample_count},
      {"training_clients", r.training},
      {"evaluation_clients", r.evaluation},
      {"excluded", excluded},
      {"total_n", r.total_n},
      {"timings_s",
       {{"client_train", secs(t.train)},
        {"client_sym_encrypt", secs(t.sym_encrypt)},
        {"client_key_protect", secs(t.key_protect)},
        {"server_key_recover_per_client", secs(t.key_recover)},
        {"server_hesd_per_client", secs(t.hesd)},
        {"server_fedavg", secs(t.fedavg)},
        {"server_aggregation_phase", secs(t.aggregation_phase)},
        {"client_decrypt", secs(t.decrypt)}}},
      {"bytes", bytes},
      {"model_digest", r.model_digest},
  };
}

std::string run_id(const protocol::ExperimentConfig& cfg) {
  return std::string(keyprot::to_string(cfg.mode)) + "-seed" + std::to_string(cfg.seed);
}

void write_run(const fs::path& dir, const protocol::ExperimentResult& res, bool timestamps) {
  fs::create_directories(dir);
  auto open = [&](const char* name, std::ios::openmode mode = std::ios::out) {
    std::ofstream f(dir / name, mode);
    if (!f) throw InvalidArgument("cannot write " + (dir / name).string());
    return f;
  };
  open("config.toml") << protocol::to_toml(res.config);

  auto jsonl = open("rounds.jsonl");
  for (const auto& r : res.reports) jsonl << round_json(r, timestamps).dump() << "\n";

  auto csv = open("summary.csv");
  csv << "schema_version,mode,round,accuracy,loss,test_samples,total_n,excluded,client_bytes_up,"
         "server_hesd_s,server_aggregation_s,model_digest\n";
  csv << std::setprecision(17);
  for (const auto& r : res.reports) {
    const auto up = r.bytes_by_type.count("ClientUpdate") ? r.bytes_by_type.at("ClientUpdate") : 0;
    csv << kSchemaVersion << ',' << keyprot::to_string(r.mode) << ',' << r.round << ',' << r.metrics.accuracy << ','
        << r.metrics.loss << ',' << r.metrics.test_sample_count << ',' << r.total_n << ',' << r.excluded.size() << ','
        << up << ',' << (timestamps ? r.timings.hesd_total : 0.0) << ','
        << (timestamps ? r.timings.aggregation_phase : 0.0) << ',' << r.model_digest << "\n";
  }
  if (!res.reports.empty()) {
    const auto& last = res.reports.back();
    csv << kSchemaVersion << ',' << keyprot::to_string(last.mode) << ",final," << last.metrics.accuracy << ','
        << last.metrics.loss << ',' << last.metrics.test_sample_count << ",,,,,," << last.model_digest << "\n";
  }

  if (res.transcript) {
    auto bin = open("transcript.bin", std::ios::out | std::ios::binary);
    res.transcript->write(bin);
  }
}

}  // namespace hhefl::cli
