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


#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hhefl/adversary/adversary.hpp"
#include "hhefl/error.hpp"
#include "hhefl/keyprot/key_protection.hpp"
#include "hhefl/protocol/experiment.hpp"
#include "report.hpp"

namespace fs = std::filesystem;
using namespace hhefl;
using protocol::PartyId;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitProtocol = 3;
constexpr int kExitAttack = 4;

struct ExitError {
  int code;
  std::string message;
};

std::optional<std::uint64_t> seed_override(const std::optional<std::uint64_t>& flag) {
  if (flag) return flag;
  if (const char* env = std::getenv("HHEFL_SEED")) {
    try {
      std::size_t used = 0;
      const std::uint64_t v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw ExitError{kExitConfig, "HHEFL_SEED is not an unsigned integer"};
  }
  return std::nullopt;
}

protocol::ExperimentConfig load_or_exit(const std::string& path) {
  try {
    return protocol::load_config(path);
  } catch (const Error& e) {
    throw ExitError{kExitConfig, "config error: " + std::string(e.what())};
  }
}

std::vector<keyprot::Mode> modes_from(const std::string& s) {
  if (s == "all") return {keyprot::Mode::kBaseline, keyprot::Mode::kMasking, keyprot::Mode::kRsaWrapping};
  try {
    return {keyprot::parse_mode(s)};
  } catch (const Error&) {
    throw ExitError{kExitConfig, "unknown mode '" + s + "' (baseline, masking, rsa, all)"};
  }
}

// Config errors raised while building the simulation map to exit code 2,
// anything later to 3.
protocol::ExperimentResult run_one(const protocol::ExperimentConfig& cfg, protocol::TransportKind kind,
                                   bool timestamps) {
  std::unique_ptr<protocol::Simulation> sim;
  try {
    sim = std::make_unique<protocol::Simulation>(cfg, kind, timestamps);
  } catch (const InvalidParams& e) {
    throw ExitError{kExitConfig, "config error: " + std::string(e.what())};
  } catch (const ParseError& e) {
    throw ExitError{kExitConfig, "config error: " + std::string(e.what())};
  } catch (const InvalidArgument& e) {
    throw ExitError{kExitConfig, "config error: " + std::string(e.what())};
  }
  try {
    sim->setup();
    for (std::size_t r = 0; r < cfg.rounds; ++r) {
      const auto rep = sim->run_round();
      std::printf("  %-8s round %2u  acc %.4f  loss %.4f  n %3lu  hesd %7.3fs  agg %7.3fs  excluded %zu\n",
                  std::string(keyprot::to_string(rep.mode)).c_str(), rep.round, rep.metrics.accuracy,
                  rep.metrics.loss, static_cast<unsigned long>(rep.total_n), rep.timings.hesd_total,
                  rep.timings.aggregation_phase, rep.excluded.size());
      for (const auto& e : rep.excluded) std::printf("    client %u excluded: %s\n", e.client, e.reason.c_str());
      std::fflush(stdout);
    }
    return sim->run();
  } catch (const Error& e) {
    throw ExitError{kExitProtocol, "protocol failure: " + std::string(e.what())};
  }
}

int cmd_run(const std::string& config_path, const std::string& mode, std::optional<std::uint64_t> seed,
            const std::string& out, bool no_timestamps, const std::string& transport) {
  protocol::ExperimentConfig base = load_or_exit(config_path);
  if (const auto s = seed_override(seed)) base.seed = *s;
  const auto kind = transport == "loopback" ? protocol::TransportKind::kLoopback : protocol::TransportKind::kInMemory;
  std::vector<std::string> digests;
  for (keyprot::Mode m : modes_from(mode)) {
    protocol::ExperimentConfig cfg = base;
    cfg.mode = m;
    const fs::path dir = fs::path(out) / cli::run_id(cfg);
    std::printf("run %s -> %s\n", cli::run_id(cfg).c_str(), dir.string().c_str());
    const auto res = run_one(cfg, kind, !no_timestamps);
    try {
      cli::write_run(dir, res, !no_timestamps);
    } catch (const std::exception& e) {
      throw ExitError{kExitConfig, e.what()};
    }
    std::string trail;
    for (const auto& r : res.reports) trail += r.model_digest;
    digests.push_back(trail);
    const auto& last = res.reports.back().metrics;
    std::printf("final %s accuracy %.4f loss %.4f\n", std::string(keyprot::to_string(m)).c_str(), last.accuracy,
                last.loss);
  }
  for (const auto& d : digests) {
    if (d != digests.front()) throw ExitError{kExitProtocol, "modes produced different global models"};
  }
  if (digests.size() > 1) std::printf("all modes produced identical global models in every round\n");
  return 0;
}

int cmd_bench_rsa(const std::vector<int>& bits, std::optional<std::size_t> input_bytes, int trials, bool json) {
  const auto ctx = he::HeContext::create(he::HeParams::desk_default());
  std::size_t len = input_bytes.value_or(he::serialized_size(*ctx, 2));
  if (len == 0 || trials < 1) throw ExitError{kExitConfig, "input bytes and trials must be positive"};
  Bytes input(len);
  for (std::size_t i = 0; i < len; ++i) input[i] = static_cast<std::uint8_t>((i * 131 + 7) & 0xFF);

  using Clock = std::chrono::steady_clock;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  if (!json) {
    std::printf("%6s %8s %8s %12s %12s %9s %10s %10s\n", "bits", "max_ptx", "chunks", "input_B", "output_B", "expand",
                "wrap_s", "unwrap_s");
  }
  for (int b : bits) {
    keyprot::RsaPrivateKey tpa, server;
    try {
      tpa = keyprot::RsaPrivateKey::generate(b);
      server = keyprot::RsaPrivateKey::generate(b);
    } catch (const Error& e) {
      throw ExitError{kExitConfig, e.what()};
    }
    const auto cert = keyprot::issue_certificate(tpa, server.public_key());
    double wrap_s = 0, unwrap_s = 0;
    std::size_t out_bytes = 0, chunks = 0;
    for (int t = 0; t < trials; ++t) {
      auto t0 = Clock::now();
      const auto wrapped = keyprot::rsa_wrap(input, cert, tpa.public_key());
      wrap_s += std::chrono::duration<double>(Clock::now() - t0).count();
      const auto& w = std::get<keyprot::RsaWrappedKey>(wrapped);
      chunks = w.chunks.size();
      out_bytes = 0;
      for (const auto& c : w.chunks) out_bytes += c.size();
      t0 = Clock::now();
      const Bytes back = keyprot::rsa_unwrap(w, server);
      unwrap_s += std::chrono::duration<double>(Clock::now() - t0).count();
      if (back != input) throw ExitError{kExitProtocol, "RSA unwrap did not return the input"};
    }
    wrap_s /= trials;
    unwrap_s /= trials;
    const double ratio = static_cast<double>(out_bytes) / static_cast<double>(len);
    if (json) {
      rows.push_back({{"schema_version", cli::kSchemaVersion},
                      {"rsa_bits", b},
                      {"max_plaintext_bytes", keyprot::max_plaintext_size(b)},
                      {"chunks", chunks},
                      {"input_bytes", len},
                      {"output_bytes", out_bytes},
                      {"expansion_ratio", ratio},
                      {"wrap_s", wrap_s},
                      {"unwrap_s", unwrap_s}});
    } else {
      std::printf("%6d %8zu %8zu %12zu %12zu %9.4f %10.4f %10.4f\n", b, keyprot::max_plaintext_size(b), chunks, len,
                  out_bytes, ratio, wrap_s, unwrap_s);
    }
  }
  if (json) std::cout << rows.dump(2) << "\n";
  return 0;
}

protocol::ExperimentConfig attack_config() {
  protocol::ExperimentConfig c;
  c.clients = 6;
  c.rounds = 2;
  c.clients_per_round = 3;
  c.eval_clients = 6;
  c.rsa_bits = 2048;
  c.epochs = 2;
  c.batch_size = 32;
  c.hidden = 8;
  c.poly_degree = 1024;
  c.synthetic_samples = 360;
  c.synthetic_features = 16;
  return c;
}

int cmd_attack(const std::string& mode, std::optional<PartyId> victim_flag, std::optional<std::uint64_t> seed,
               const std::string& config_path, std::size_t probe_trials) {
  protocol::ExperimentConfig base = config_path.empty() ? attack_config() : load_or_exit(config_path);
  if (const auto s = seed_override(seed)) base.seed = *s;
  bool as_expected = true;
  std::printf("%-9s %-7s %-5s %-10s %-12s %s\n", "mode", "victim", "round", "key", "weights", "verdict");
  for (keyprot::Mode m : modes_from(mode)) {
    protocol::ExperimentConfig cfg = base;
    cfg.mode = m;
    protocol::Simulation sim = [&] {
      try {
        return protocol::Simulation(cfg);
      } catch (const Error& e) {
        throw ExitError{kExitConfig, "config error: " + std::string(e.what())};
      }
    }();
    try {
      sim.run();
    } catch (const Error& e) {
      throw ExitError{kExitProtocol, "protocol failure: " + std::string(e.what())};
    }
    // victim: given, or the first trainer of round 1
    const PartyId victim = victim_flag.value_or(protocol::sample_cohort(sim.master_seed(), "train", 1, cfg.clients,
                                                                        cfg.clients_per_round)
                                                    .front());
    if (victim >= cfg.clients) throw ExitError{kExitConfig, "victim id out of range"};
    const auto& sent = sim.client(victim).sent();
    if (sent.empty()) throw ExitError{kExitConfig, "victim never trained; pick another --victim"};
    const PartyId eve = victim == 0 ? 1 : 0;
    const auto k = adversary::eve_knowledge(sim.client(eve), *sim.transcript(), sim.transport().wire(),
                                            sim.params().cipher);
    auto outcome = adversary::attack(adversary::intercept(k, victim, sent.front().round), k);
    adversary::judge(outcome, sim.client(victim).sym_key());
    const bool weights_match = outcome.recovered_weights && *outcome.recovered_weights == sent.front().quantized;
    const bool expected = m == keyprot::Mode::kBaseline ? (outcome.success && weights_match)
                                                        : (!outcome.success && !weights_match);
    as_expected = as_expected && expected;
    std::printf("%-9s %-7u %-5u %-10s %-12s %s (%s)\n", std::string(keyprot::to_string(m)).c_str(), victim,
                sent.front().round, outcome.success ? "recovered" : "not found",
                weights_match ? "exposed" : "protected", expected ? "as expected" : "UNEXPECTED", outcome.note.c_str());
    if (probe_trials > 0) {
      const auto p = adversary::distinguishability_probe(m, probe_trials, cfg.seed, cfg.poly_degree, cfg.rsa_bits);
      std::printf("          probe (%s): lengths %s, chi2 max %.1f / threshold %.1f, key-aware advantage %.2f -> %s\n",
                  p.label.c_str(), p.lengths_equal ? "equal" : "differ", p.max_statistic, p.threshold,
                  p.key_aware_advantage, p.distinguishable ? "distinguishable" : "no trivial distinguisher");
    }
  }
  return as_expected ? 0 : kExitAttack;
}

int cmd_keygen(const std::string& config_path, const std::string& out, std::optional<std::uint64_t> seed, int rsa) {
  protocol::ExperimentConfig cfg = load_or_exit(config_path);
  if (const auto s = seed_override(seed)) cfg.seed = *s;
  he::ContextPtr ctx;
  try {
    ctx = he::HeContext::create(he::HeParams::desk_default(cfg.poly_degree));
  } catch (const Error& e) {
    throw ExitError{kExitConfig, e.what()};
  }
  const he::RingKeys keys = he::keygen(ctx, derive_seed(seed_from_u64(cfg.seed), "keygen"));
  fs::create_directories(out);
  auto write = [&](const std::string& name, const auto& bytes) {
    std::ofstream f(fs::path(out) / name, std::ios::binary);
    if (!f) throw ExitError{kExitConfig, "cannot write " + name};
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  };
  write("he_public.key", he::serialize(keys.public_key));
  write("he_secret.key", he::serialize(keys.secret_key));
  write("he_eval.key", he::serialize(keys.eval_key));
  nlohmann::ordered_json meta{{"schema_version", cli::kSchemaVersion},
                              {"poly_degree", ctx->n()},
                              {"plaintext_modulus", ctx->t().value()},
                              {"ciphertext_primes", ctx->params().ciphertext_primes},
                              {"depth_budget", ctx->params().depth_budget},
                              {"params_hash", ctx->params_hash()},
                              {"seed", cfg.seed},
                              {"notice", keys.metadata}};
  if (rsa) {
    const auto key = keyprot::RsaPrivateKey::generate(rsa);
    const std::string pem = key.to_pem();
    write("rsa_private.pem", pem);
    meta["rsa_bits"] = rsa;
  }
  const std::string text = meta.dump(2) + "\n";
  write("params.json", text);
  std::printf("wrote keys to %s\n%s\n", out.c_str(), keys.metadata.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated learning over hybrid homomorphic encryption: experiments, benchmarks, attack demos"};
  app.require_subcommand(1);

  std::string config, mode = "masking", out = "out", transport = "memory";
  std::optional<std::uint64_t> seed;
  bool no_timestamps = false;
  auto* run = app.add_subcommand("run", "Run an FL experiment and write reports");
  run->add_option("config", config, "Experiment config (TOML)")->required();
  run->add_option("--mode", mode, "baseline, masking, rsa or all");
  run->add_option("--seed", seed, "Master seed (falls back to HHEFL_SEED, then the config)");
  run->add_option("--out", out, "Output root directory");
  run->add_flag("--no-timestamps", no_timestamps, "Zero all timings for byte-identical reruns");
  run->add_option("--transport", transport, "memory or loopback")->check(CLI::IsMember({"memory", "loopback"}));

  std::vector<int> bits{1024, 2048, 3072, 4096};
  std::optional<std::size_t> input_bytes;
  int trials = 1;
  bool json = false;
  auto* bench = app.add_subcommand("bench-rsa", "Benchmark RSA wrapping of a serialized key ciphertext");
  bench->add_option("--bits", bits, "RSA modulus sizes")->delimiter(',');
  bench->add_option("--input-bytes", input_bytes, "Input size (default: one serialized ring ciphertext)");
  bench->add_option("--trials", trials, "Repetitions per key size");
  bench->add_flag("--json", json, "JSON output");

  std::string attack_mode = "all", attack_config_path;
  std::optional<PartyId> victim;
  std::size_t probe = 0;
  auto* attack = app.add_subcommand("attack", "Run the key-recovery attack against each mode");
  attack->add_option("--mode", attack_mode, "baseline, masking, rsa or all");
  attack->add_option("--victim", victim, "Victim client id");
  attack->add_option("--seed", seed, "Master seed");
  attack->add_option("--config", attack_config_path, "Experiment config (default: small built-in)");
  attack->add_option("--probe", probe, "Also run the distinguishability probe with this many trials");

  std::string key_out = "keys";
  int rsa_bits = 0;
  auto* keygen = app.add_subcommand("keygen", "Generate key material for inspection");
  keygen->add_option("config", config, "Experiment config (TOML)")->required();
  keygen->add_option("--out", key_out, "Output directory");
  keygen->add_option("--seed", seed, "Master seed");
  keygen->add_option("--rsa", rsa_bits, "Also write an RSA private key of this size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config, mode, seed, out, no_timestamps, transport);
    if (*bench) return cmd_bench_rsa(bits, input_bytes, trials, json);
    if (*attack) return cmd_attack(attack_mode, victim, seed, attack_config_path, probe);
    if (*keygen) return cmd_keygen(config, key_out, seed, rsa_bits);
  } catch (const ExitError& e) {
    std::fprintf(stderr, "hhefl: %s\n", e.message.c_str());
    return e.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "hhefl: %s\n", e.what());
    return kExitProtocol;
  }
  return 0;
}
