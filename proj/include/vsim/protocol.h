// Copyright 2026 The vsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VSIM_PROTOCOL_H_
#define VSIM_PROTOCOL_H_

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vsim/errors.h"
#include "vsim/io.h"
#include "vsim/pipeline.h"
#include "vsim/profile.h"

namespace vsim {

// Binary frame message, all integers little-endian:
//   "VSIM" | version u8 | codec u8 | frame_id u64 | payload length u32 | payload
// Replies append: trailer length u32 | UTF-8 JSON trailer.
inline constexpr char kFrameMagic[4] = {'V', 'S', 'I', 'M'};
inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::size_t kFrameHeaderSize = 18;
inline constexpr std::size_t kDefaultMaxFrameBytes = std::size_t(4) << 20;
inline constexpr const char* kControlSchema = "vsim.control/1";

// Framing failure. `code` is one of: truncated, bad_magic, bad_version,
// bad_codec, length_mismatch, too_large.
class ProtocolError : public ParseError {
 public:
  ProtocolError(std::string code, const std::string& message)
      : ParseError(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

struct FrameMessage {
  ImageCodec codec = ImageCodec::kPng;
  std::uint64_t frame_id = 0;
  std::vector<std::uint8_t> payload;
};

struct FrameReply {
  FrameMessage frame;
  std::string trailer;  // JSON text
};

std::vector<std::uint8_t> encode_frame_message(const FrameMessage& m);
// Throws ProtocolError. Payloads above `max_payload` bytes are too_large.
FrameMessage parse_frame_message(std::span<const std::uint8_t> bytes,
                                 std::size_t max_payload = kDefaultMaxFrameBytes);

// frame_id of a message whose magic is intact and header long enough to
// carry one, whatever else is wrong with it.
std::optional<std::uint64_t> peek_frame_id(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_frame_reply(const FrameMessage& m, std::string_view trailer);
FrameReply parse_frame_reply(std::span<const std::uint8_t> bytes);

struct SessionOptions {
  double budget_us = kDefaultBudgetUs;
  std::size_t max_frame_bytes = kDefaultMaxFrameBytes;
  SimulationProfile initial_profile = preset(0);
  // Seconds since the session epoch; drives floater drift. Defaults to the
  // wall clock.
  std::function<double()> clock;
};

// One live session: the active profile plus the frame counter. Not thread
// safe; the service feeds each session from a single worker so controls and
// frames are applied in arrival order.
class Session {
 public:
  explicit Session(SessionOptions options = {});

  // A control message in, a JSON reply out. Every failure becomes an
  // {"type":"error",...} reply and leaves the profile untouched.
  std::string handle_control(std::string_view text);

  struct Reply {
    bool binary = false;
    std::vector<std::uint8_t> bytes;  // frame reply, or JSON text when !binary
  };
  // A binary frame message in. `dropped` lists frame ids discarded by
  // backpressure since the previous reply; they ride in this reply.
  Reply handle_frame(std::span<const std::uint8_t> message,
                     const std::vector<std::uint64_t>& dropped = {});

  // Error reply for a frame that never reached handle_frame.
  static std::string frame_error(std::uint64_t frame_id, std::string_view code,
                                 std::string_view message,
                                 const std::vector<std::uint64_t>& dropped = {});

  const SimulationProfile& profile() const { return profile_; }
  std::uint64_t frames_processed() const { return frames_processed_; }

 private:
  SessionOptions options_;
  SimulationProfile profile_;
  std::uint64_t frames_processed_ = 0;
  bool has_last_id_ = false;
  std::uint64_t last_frame_id_ = 0;
  std::chrono::steady_clock::time_point epoch_;
};

}  // namespace vsim

#endif  // VSIM_PROTOCOL_H_
