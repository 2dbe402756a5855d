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


#ifndef HHEFL_PROTOCOL_TRANSPORT_HPP_
#define HHEFL_PROTOCOL_TRANSPORT_HPP_

#include <chrono>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <vector>

#include "hhefl/protocol/messages.hpp"

namespace hhefl::protocol {

// kSetup models the trusted out-of-band delivery of key material; such
// entries are logged by size only and are invisible to a network tap.
enum class Channel : std::uint8_t { kNetwork = 0, kSetup = 1 };

struct TranscriptEntry {
  std::uint64_t seq = 0;
  Header header;
  std::uint8_t tag = 0;
  Channel channel = Channel::kNetwork;
  std::size_t bytes = 0;   // encoded frame length
  double timestamp = 0;    // seconds since the log was created
  Bytes frame;             // empty for setup-channel entries
};

// Append-only, safe under concurrent appends.
class TranscriptLog {
 public:
  explicit TranscriptLog(bool timestamps = true);

  void append(const Header& h, std::uint8_t tag, Channel ch, Bytes frame);

  std::vector<TranscriptEntry> entries() const;
  // Network-channel entries only.
  std::vector<TranscriptEntry> tapped() const;
  std::size_t size() const;

  // Magic "HTRN", u32 version, u64 entry count, then per entry: u64 seq,
  // u8 channel, u8 tag, u32 sender, u32 recipient, u32 round, u64 bytes,
  // f64 timestamp, u32-prefixed frame.
  void write(std::ostream& out) const;

 private:
  mutable std::mutex mu_;
  bool timestamps_;
  std::chrono::steady_clock::time_point start_;
  std::vector<TranscriptEntry> entries_;
};

// Every message is encoded once to record its exact size in the transcript.
class Transport {
 public:
  Transport(WireContext wc, std::shared_ptr<TranscriptLog> log);
  virtual ~Transport() = default;

  void send(const Message& m, Channel ch = Channel::kNetwork);
  // Next queued message for `who`, FIFO.
  std::optional<Message> receive(PartyId who);
  virtual std::size_t pending(PartyId who) const = 0;

  const WireContext& wire() const { return wc_; }
  TranscriptLog& log() { return *log_; }

 protected:
  virtual void push(const Message& m, Bytes frame, Channel ch) = 0;
  virtual std::optional<Message> pop(PartyId who) = 0;

  WireContext wc_;
  std::shared_ptr<TranscriptLog> log_;
};

// Deterministic in-process queues carrying message objects.
class InMemoryTransport final : public Transport {
 public:
  using Transport::Transport;
  std::size_t pending(PartyId who) const override;

 protected:
  void push(const Message& m, Bytes frame, Channel ch) override;
  std::optional<Message> pop(PartyId who) override;

 private:
  std::map<PartyId, std::deque<Message>> queues_;
};

// Carries encoded frames and decodes them at the receiver, so every field
// must survive the wire format.
class LoopbackByteTransport final : public Transport {
 public:
  using Transport::Transport;
  std::size_t pending(PartyId who) const override;

  // Applied to network-channel frames in transit (after logging); for tests.
  void set_tamper(std::function<void(const Header&, std::uint8_t tag, Bytes&)> fn) { tamper_ = std::move(fn); }

 protected:
  void push(const Message& m, Bytes frame, Channel ch) override;
  std::optional<Message> pop(PartyId who) override;

 private:
  std::map<PartyId, std::deque<Bytes>> queues_;
  std::function<void(const Header&, std::uint8_t, Bytes&)> tamper_;
};

}  // namespace hhefl::protocol

#endif  // HHEFL_PROTOCOL_TRANSPORT_HPP_
