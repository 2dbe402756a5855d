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


#include "hhefl/protocol/experiment.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "hhefl/error.hpp"

namespace hhefl::protocol {

namespace {

SharedParams make_shared(const ExperimentConfig& cfg, const Partitions& data) {
  SharedParams p;
  p.mode = cfg.mode;
  he::HeParams hp = he::HeParams::desk_default(cfg.poly_degree);
  if (cfg.cipher_rounds > hp.depth_budget) {
    throw InvalidParams("cipher.rounds exceeds the ring's multiplicative depth budget");
  }
  p.ctx = he::HeContext::create(hp);
  p.cipher = cipher::CipherParams::defaults();
  p.cipher.rounds = cfg.cipher_rounds;
  p.cipher.validate();
  p.quant = resolve_quant(cfg, data);
  if (p.quant.modulus != p.ctx->t().value()) throw InvalidParams("quantization modulus differs from the ring's");
  const fl::Dataset& any = data.train.front();
  p.shape = {any.feature_count(), cfg.hidden, static_cast<std::size_t>(std::max(any.num_classes, 2))};
  p.train.epochs = cfg.epochs;
  p.train.batch_size = cfg.batch_size;
  p.train.learning_rate = cfg.learning_rate;
  p.train.momentum = cfg.momentum;
  p.rsa_bits = cfg.rsa_bits;
  return p;
}

std::vector<PartyId> eval_cohort(const ExperimentConfig& cfg, const Seed& master, std::uint32_t round) {
  if (cfg.eval_clients == cfg.clients) {
    std::vector<PartyId> all(cfg.clients);
    std::iota(all.begin(), all.end(), PartyId{0});
    return all;
  }
  return sample_cohort(master, "eval", round, cfg.clients, cfg.eval_clients);
}

template <typename F>
double mean_of(const std::vector<PartyId>& ids, F&& f) {
  if (ids.empty()) return 0;
  double s = 0;
  for (PartyId id : ids) s += f(id);
  return s / static_cast<double>(ids.size());
}

}  // namespace

Partitions prepare_data(const ExperimentConfig& cfg) {
  cfg.validate();
  const Seed master = seed_from_u64(cfg.seed);
  const fl::Dataset all =
      cfg.dataset == "synthetic"
          ? fl::make_synthetic(cfg.synthetic_samples, cfg.synthetic_features, seed_u64(derive_seed(master, "data")))
          : fl::load_csv(cfg.dataset);
  Partitions out;
  for (const auto& part : fl::partition_iid(all, cfg.clients)) {
    auto [train, test] = fl::train_test_split(part, cfg.train_fraction);
    if (train.empty() || test.empty()) throw InvalidParams("a client partition has no training or test samples");
    out.train.push_back(std::move(train));
    out.test.push_back(std::move(test));
  }
  return out;
}

fl::QuantParams resolve_quant(const ExperimentConfig& cfg, const Partitions& data) {
  fl::SampleCount largest = 0;
  for (const auto& d : data.train) largest = std::max(largest, fl::batch_count(d.size(), cfg.batch_size));
  const fl::SampleCount needed = largest * cfg.clients_per_round;
  fl::QuantParams qp;
  qp.clip_range = cfg.clip_range;
  qp.modulus = he::kDefaultPlaintextModulus;
  qp.n_max = cfg.n_max ? cfg.n_max : needed;
  if (qp.n_max < needed) {
    throw InvalidParams("n_max " + std::to_string(qp.n_max) + " is below the largest possible round total " +
                        std::to_string(needed));
  }
  if (cfg.scale) {
    qp.scale = cfg.scale;
    qp.validate();
    return qp;
  }
  return fl::QuantParams::for_bound(qp.modulus, qp.clip_range, qp.n_max);
}

std::vector<PartyId> sample_cohort(const Seed& master, std::string_view purpose, std::uint32_t round,
                                   std::size_t clients, std::size_t k) {
  if (k > clients) throw InvalidArgument("cohort larger than the population");
  std::vector<PartyId> ids(clients);
  std::iota(ids.begin(), ids.end(), PartyId{0});
  std::mt19937_64 rng(seed_u64(derive_seed(master, purpose, round)));
  // partial Fisher-Yates with explicit draws, independent of the library's shuffle
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (clients - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::string model_digest(const fl::ModelWeights& w) {
  ByteWriter bw(w.size() * 8);
  for (double v : w.values) bw.f64(v);
  const auto h = sha256(bw.bytes());
  return to_hex(std::span(h).first(16));
}

Simulation::Simulation(ExperimentConfig cfg, TransportKind kind, bool timestamps)
    : cfg_(std::move(cfg)), master_(seed_from_u64(cfg_.seed)) {
  Partitions data = prepare_data(cfg_);
  params_ = make_shared(cfg_, data);
  log_ = std::make_shared<TranscriptLog>(timestamps);
  WireContext wc{params_.ctx, params_.cipher};
  if (kind == TransportKind::kInMemory) {
    transport_ = std::make_unique<InMemoryTransport>(wc, log_);
  } else {
    transport_ = std::make_unique<LoopbackByteTransport>(wc, log_);
  }
  tpa_ = std::make_unique<Tpa>(params_, derive_seed(master_, "tpa"));
  std::vector<PartyId> ids(cfg_.clients);
  std::iota(ids.begin(), ids.end(), PartyId{0});
  server_ = std::make_unique<Server>(params_, ids);
  for (PartyId id : ids) {
    clients_.push_back(std::make_unique<Client>(id, params_, std::move(data.train[id]), std::move(data.test[id]),
                                                client_seed(master_, id)));
  }
}

void Simulation::pump() {
  for (bool busy = true; busy;) {
    busy = false;
    while (auto m = transport_->receive(kTpaId)) {
      tpa_->deliver(*m, *transport_);
      busy = true;
    }
    while (auto m = transport_->receive(kServerId)) {
      server_->deliver(*m, *transport_);
      busy = true;
    }
    for (auto& c : clients_) {
      while (auto m = transport_->receive(c->id())) {
        c->deliver(*m, *transport_);
        busy = true;
      }
    }
  }
}

void Simulation::setup() {
  if (setup_done_) throw ProtocolError("setup already ran");
  std::vector<PartyId> ids(clients_.size());
  std::iota(ids.begin(), ids.end(), PartyId{0});
  tpa_->issue_keys(*transport_, ids);
  pump();
  tpa_->retire();
  server_->broadcast_init(*transport_, fl::init_weights(params_.shape, seed_u64(derive_seed(master_, "init"))));
  pump();
  for (const auto& c : clients_) {
    if (c->phase() != Client::Phase::kActive) throw ProtocolError("client " + std::to_string(c->id()) + " not ready");
  }
  setup_done_ = true;
}

RoundReport Simulation::run_round() {
  if (!setup_done_) throw ProtocolError("run setup first");
  if (round_ >= cfg_.rounds) throw ProtocolError("all rounds already ran");
  const std::uint32_t r = round_ + 1;
  RoundReport rep;
  rep.round = r;
  rep.mode = cfg_.mode;
  rep.training = sample_cohort(master_, "train", r, cfg_.clients, cfg_.clients_per_round);
  rep.evaluation = eval_cohort(cfg_, master_, r);

  server_->start_round(r, rep.training, rep.evaluation, *transport_);
  pump();
  const AggregationOutcome agg = server_->aggregate(*transport_);
  pump();
  rep.metrics = server_->finish_round();
  round_ = r;

  const fl::ModelWeights& global = clients_.front()->weights();
  for (const auto& c : clients_) {
    if (c->global_round() != r || c->weights().values != global.values) {
      throw ProtocolError("clients disagree on the global model");
    }
  }
  globals_.push_back(global);
  rep.model_digest = model_digest(global);
  rep.excluded = agg.excluded;
  rep.total_n = agg.total_n;

  RoundTimings& t = rep.timings;
  t.train = mean_of(rep.training, [&](PartyId id) { return clients_[id]->last_timing().train; });
  t.sym_encrypt = mean_of(rep.training, [&](PartyId id) { return clients_[id]->last_timing().sym_encrypt; });
  t.key_protect = mean_of(rep.training, [&](PartyId id) { return clients_[id]->last_timing().key_protect; });
  t.decrypt = mean_of(rep.evaluation, [&](PartyId id) { return clients_[id]->last_timing().decrypt; });
  for (const auto& pc : agg.per_client) {
    t.key_recover += pc.key_recover;
    t.hesd_total += pc.hesd;
  }
  if (!agg.per_client.empty()) {
    t.key_recover /= static_cast<double>(agg.per_client.size());
    t.hesd = t.hesd_total / static_cast<double>(agg.per_client.size());
  }
  t.fedavg = agg.fedavg_seconds;
  t.aggregation_phase = agg.total_seconds;

  for (const auto& e : log_->entries()) {
    if (e.header.round == r) rep.bytes_by_type[std::string(tag_name(e.tag))] += e.bytes;
  }
  reports_.push_back(rep);
  return rep;
}

ExperimentResult Simulation::run() {
  if (!setup_done_) setup();
  while (round_ < cfg_.rounds) run_round();
  return {cfg_, params_.quant, params_.shape, reports_, globals_, log_};
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, TransportKind kind, bool timestamps) {
  Simulation sim(cfg, kind, timestamps);
  return sim.run();
}

ExperimentResult run_plaintext_experiment(const ExperimentConfig& cfg) {
  const Partitions data = prepare_data(cfg);
  const SharedParams p = make_shared(cfg, data);
  const Seed master = seed_from_u64(cfg.seed);
  ExperimentResult out{cfg, p.quant, p.shape, {}, {}, nullptr};
  fl::ModelWeights global = fl::init_weights(p.shape, seed_u64(derive_seed(master, "init")));
  for (std::uint32_t r = 1; r <= cfg.rounds; ++r) {
    RoundReport rep;
    rep.round = r;
    rep.mode = cfg.mode;
    rep.training = sample_cohort(master, "train", r, cfg.clients, cfg.clients_per_round);
    rep.evaluation = eval_cohort(cfg, master, r);
    std::vector<fl::PlainUpdate> ups;
    for (PartyId id : rep.training) {
      fl::TrainConfig tc = p.train;
      tc.seed = train_seed(client_seed(master, id), r);
      const fl::TrainResult res = fl::train_local(global, data.train[id], tc);
      ups.push_back({fl::dequantize(fl::quantize(res.weights, p.quant), p.quant, 1, p.shape), res.n});
      rep.total_n += res.n;
    }
    global = fl::fedavg_plain(ups);
    std::vector<fl::EvalMetrics> ms;
    for (PartyId id : rep.evaluation) ms.push_back(fl::evaluate(global, data.test[id]));
    rep.metrics = fl::aggregate_metrics(ms);
    rep.model_digest = model_digest(global);
    out.reports.push_back(std::move(rep));
    out.global_models.push_back(global);
  }
  return out;
}

}  // namespace hhefl::protocol
