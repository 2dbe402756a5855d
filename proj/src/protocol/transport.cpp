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


#include "hhefl/protocol/transport.hpp"

#include "hhefl/error.hpp"

namespace hhefl::protocol {

TranscriptLog::TranscriptLog(bool timestamps) : timestamps_(timestamps), start_(std::chrono::steady_clock::now()) {}

void TranscriptLog::append(const Header& h, std::uint8_t tag, Channel ch, Bytes frame) {
  TranscriptEntry e;
  e.header = h;
  e.tag = tag;
  e.channel = ch;
  e.bytes = frame.size();
  if (timestamps_) {
    e.timestamp = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  if (ch == Channel::kNetwork) e.frame = std::move(frame);
  std::lock_guard lock(mu_);
  e.seq = entries_.size();
  entries_.push_back(std::move(e));
}

std::vector<TranscriptEntry> TranscriptLog::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::vector<TranscriptEntry> TranscriptLog::tapped() const {
  std::lock_guard lock(mu_);
  std::vector<TranscriptEntry> out;
  for (const auto& e : entries_) {
    if (e.channel == Channel::kNetwork) out.push_back(e);
  }
  return out;
}

std::size_t TranscriptLog::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

void TranscriptLog::write(std::ostream& out) const {
  std::lock_guard lock(mu_);
  ByteWriter w;
  w.raw(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>("HTRN"), 4));
  w.u32(1);
  w.u64(entries_.size());
  out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.size()));
  for (const auto& e : entries_) {
    ByteWriter rec(64 + e.frame.size());
    rec.u64(e.seq);
    rec.u8(static_cast<std::uint8_t>(e.channel));
    rec.u8(e.tag);
    rec.u32(e.header.sender);
    rec.u32(e.header.recipient);
    rec.u32(e.header.round);
    rec.u64(e.bytes);
    rec.f64(e.timestamp);
    rec.blob(e.frame);
    out.write(reinterpret_cast<const char*>(rec.bytes().data()), static_cast<std::streamsize>(rec.size()));
  }
}

Transport::Transport(WireContext wc, std::shared_ptr<TranscriptLog> log) : wc_(std::move(wc)), log_(std::move(log)) {
  if (!log_) throw InvalidArgument("transport needs a transcript log");
}

void Transport::send(const Message& m, Channel ch) {
  Bytes frame = encode(wc_, m);
  log_->append(m.header, tag_of(m.payload), ch, frame);
  push(m, std::move(frame), ch);
}

std::optional<Message> Transport::receive(PartyId who) { return pop(who); }

std::size_t InMemoryTransport::pending(PartyId who) const {
  const auto it = queues_.find(who);
  return it == queues_.end() ? 0 : it->second.size();
}

void InMemoryTransport::push(const Message& m, Bytes, Channel) { queues_[m.header.recipient].push_back(m); }

std::optional<Message> InMemoryTransport::pop(PartyId who) {
  auto it = queues_.find(who);
  if (it == queues_.end() || it->second.empty()) return std::nullopt;
  Message m = std::move(it->second.front());
  it->second.pop_front();
  return m;
}

std::size_t LoopbackByteTransport::pending(PartyId who) const {
  const auto it = queues_.find(who);
  return it == queues_.end() ? 0 : it->second.size();
}

void LoopbackByteTransport::push(const Message& m, Bytes frame, Channel ch) {
  if (tamper_ && ch == Channel::kNetwork) tamper_(m.header, tag_of(m.payload), frame);
  queues_[m.header.recipient].push_back(std::move(frame));
}

std::optional<Message> LoopbackByteTransport::pop(PartyId who) {
  auto it = queues_.find(who);
  if (it == queues_.end() || it->second.empty()) return std::nullopt;
  Bytes frame = std::move(it->second.front());
  it->second.pop_front();
  return decode(wc_, frame);
}

}  // namespace hhefl::protocol
