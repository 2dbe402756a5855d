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


#include "hhefl/protocol/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "hhefl/error.hpp"

namespace hhefl::protocol {

namespace {

template <typename T>
void read_uint(const toml::table& t, std::string_view key, T& out) {
  const toml::node* n = t.get(key);
  if (!n) return;
  const auto v = n->value<std::int64_t>();
  if (!v || *v < 0) throw InvalidParams("config key '" + std::string(key) + "' must be a non-negative integer");
  out = static_cast<T>(*v);
}

void read_double(const toml::table& t, std::string_view key, double& out) {
  const toml::node* n = t.get(key);
  if (!n) return;
  const auto v = n->value<double>();  // integers convert
  if (!v) throw InvalidParams("config key '" + std::string(key) + "' must be a number");
  out = *v;
}

void read_string(const toml::table& t, std::string_view key, std::string& out) {
  const toml::node* n = t.get(key);
  if (!n) return;
  const auto v = n->value<std::string>();
  if (!v) throw InvalidParams("config key '" + std::string(key) + "' must be a string");
  out = *v;
}

void reject_unknown(const toml::table& t, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [k, v] : t) {
    if (!known.contains(std::string(k.str()))) {
      throw InvalidParams("unknown config key '" + where + std::string(k.str()) + "'");
    }
  }
}

const toml::table* sub(const toml::table& t, std::string_view key) {
  const toml::node* n = t.get(key);
  if (!n) return nullptr;
  if (!n->is_table()) throw InvalidParams("config key '" + std::string(key) + "' must be a table");
  return n->as_table();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (clients == 0) throw InvalidParams("clients must be positive");
  if (rounds == 0) throw InvalidParams("rounds must be positive");
  if (clients_per_round == 0 || clients_per_round > clients) {
    throw InvalidParams("clients_per_round must be in [1, clients]");
  }
  if (eval_clients == 0 || eval_clients > clients) throw InvalidParams("eval_clients must be in [1, clients]");
  if (rsa_bits != 1024 && rsa_bits != 2048 && rsa_bits != 3072 && rsa_bits != 4096) {
    throw InvalidParams("rsa_bits must be 1024, 2048, 3072 or 4096");
  }
  if (batch_size == 0) throw InvalidParams("batch_size must be positive");
  if (!(learning_rate > 0) || momentum < 0 || momentum >= 1) throw InvalidParams("bad optimizer settings");
  if (hidden == 0) throw InvalidParams("hidden must be positive");
  if (!(clip_range > 0)) throw InvalidParams("clip_range must be positive");
  if (poly_degree < 64 || (poly_degree & (poly_degree - 1)) != 0) {
    throw InvalidParams("he.poly_degree must be a power of two >= 64");
  }
  if (cipher_rounds < 1) throw InvalidParams("cipher.rounds must be positive");
  if (!(train_fraction > 0 && train_fraction < 1)) throw InvalidParams("train_fraction must be in (0, 1)");
  if (dataset.empty()) throw InvalidParams("dataset must be set");
  if (dataset == "synthetic" && (synthetic_samples < clients || synthetic_features == 0)) {
    throw InvalidParams("synthetic data too small");
  }
}

ExperimentConfig parse_config(const std::string& toml_text, const std::string& base_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    throw ParseError(std::string("config: ") + std::string(e.description()));
  }
  reject_unknown(root,
                 {"clients", "rounds", "clients_per_round", "eval_clients", "mode", "rsa_bits", "seed", "epochs",
                  "batch_size", "clip_range", "train", "quant", "he", "cipher", "data"},
                 "");
  ExperimentConfig c;
  read_uint(root, "clients", c.clients);
  read_uint(root, "rounds", c.rounds);
  read_uint(root, "clients_per_round", c.clients_per_round);
  read_uint(root, "eval_clients", c.eval_clients);
  read_uint(root, "rsa_bits", c.rsa_bits);
  read_uint(root, "seed", c.seed);
  read_uint(root, "epochs", c.epochs);
  read_uint(root, "batch_size", c.batch_size);
  read_double(root, "clip_range", c.clip_range);
  std::string mode;
  read_string(root, "mode", mode);
  if (!mode.empty()) {
    try {
      c.mode = keyprot::parse_mode(mode);
    } catch (const Error&) {
      throw InvalidParams("unknown mode '" + mode + "'");
    }
  }
  if (const auto* t = sub(root, "train")) {
    reject_unknown(*t, {"epochs", "batch_size", "learning_rate", "momentum", "hidden"}, "train.");
    read_uint(*t, "epochs", c.epochs);
    read_uint(*t, "batch_size", c.batch_size);
    read_double(*t, "learning_rate", c.learning_rate);
    read_double(*t, "momentum", c.momentum);
    read_uint(*t, "hidden", c.hidden);
  }
  if (const auto* t = sub(root, "quant")) {
    reject_unknown(*t, {"clip_range", "n_max", "scale"}, "quant.");
    read_double(*t, "clip_range", c.clip_range);
    read_uint(*t, "n_max", c.n_max);
    read_uint(*t, "scale", c.scale);
  }
  if (const auto* t = sub(root, "he")) {
    reject_unknown(*t, {"poly_degree"}, "he.");
    read_uint(*t, "poly_degree", c.poly_degree);
  }
  if (const auto* t = sub(root, "cipher")) {
    reject_unknown(*t, {"rounds"}, "cipher.");
    read_uint(*t, "rounds", c.cipher_rounds);
  }
  if (const auto* t = sub(root, "data")) {
    reject_unknown(*t, {"dataset", "train_fraction", "samples", "features"}, "data.");
    read_string(*t, "dataset", c.dataset);
    read_double(*t, "train_fraction", c.train_fraction);
    read_uint(*t, "samples", c.synthetic_samples);
    read_uint(*t, "features", c.synthetic_features);
  }
  if (c.dataset != "synthetic" && std::filesystem::path(c.dataset).is_relative()) {
    c.dataset = (std::filesystem::path(base_dir) / c.dataset).lexically_normal().string();
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), dir.empty() ? "." : dir.string());
}

std::string to_toml(const ExperimentConfig& c) {
  auto i64 = [](auto v) { return static_cast<std::int64_t>(v); };
  toml::table root{
      {"clients", i64(c.clients)},
      {"rounds", i64(c.rounds)},
      {"clients_per_round", i64(c.clients_per_round)},
      {"eval_clients", i64(c.eval_clients)},
      {"mode", std::string(keyprot::to_string(c.mode))},
      {"rsa_bits", i64(c.rsa_bits)},
      {"seed", i64(c.seed)},
      {"train", toml::table{{"epochs", i64(c.epochs)},
                            {"batch_size", i64(c.batch_size)},
                            {"learning_rate", c.learning_rate},
                            {"momentum", c.momentum},
                            {"hidden", i64(c.hidden)}}},
      {"quant", toml::table{{"clip_range", c.clip_range}, {"n_max", i64(c.n_max)}, {"scale", i64(c.scale)}}},
      {"he", toml::table{{"poly_degree", i64(c.poly_degree)}}},
      {"cipher", toml::table{{"rounds", i64(c.cipher_rounds)}}},
      {"data", toml::table{{"dataset", c.dataset},
                           {"train_fraction", c.train_fraction},
                           {"samples", i64(c.synthetic_samples)},
                           {"features", i64(c.synthetic_features)}}},
  };
  std::stringstream ss;
  ss << root << "\n";
  return ss.str();
}

}  // namespace hhefl::protocol
