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

#include "vsim/protocol.h"

#include <algorithm>
#include <cmath>
#include <optional>

#include "json.hpp"

namespace vsim {
namespace {

using Json = nlohmann::ordered_json;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> bytes, std::size_t at, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= std::uint64_t(bytes[at + i]) << (8 * i);
  return v;
}

// Header fields and the payload span; the caller decides what follows it.
struct Parsed {
  FrameMessage message;
  std::size_t end = 0;  // offset just past the payload
};

Parsed parse_header(std::span<const std::uint8_t> bytes, std::size_t max_payload) {
  const std::size_t magic_len = std::min<std::size_t>(bytes.size(), 4);
  if (!std::equal(kFrameMagic, kFrameMagic + magic_len, bytes.begin())) {
    throw ProtocolError("bad_magic", "frame does not start with \"VSIM\"");
  }
  if (bytes.size() < kFrameHeaderSize) {
    throw ProtocolError("truncated", "frame shorter than the 18-byte header");
  }
  if (bytes[4] != kProtocolVersion) {
    throw ProtocolError("bad_version",
                        "unsupported protocol version " + std::to_string(bytes[4]));
  }
  const std::uint8_t codec = bytes[5];
  if (codec != static_cast<std::uint8_t>(ImageCodec::kPng) &&
      codec != static_cast<std::uint8_t>(ImageCodec::kJpeg)) {
    throw ProtocolError("bad_codec", "unknown codec " + std::to_string(codec) +
                                         " (expected 1 = PNG or 2 = JPEG)");
  }
  const std::uint64_t len = get_le(bytes, 14, 4);
  if (len > max_payload) {
    throw ProtocolError("too_large", "payload of " + std::to_string(len) +
                                         " bytes exceeds the limit of " +
                                         std::to_string(max_payload));
  }
  if (bytes.size() < kFrameHeaderSize + len) {
    throw ProtocolError("length_mismatch", "payload length field says " + std::to_string(len) +
                                               " bytes but " +
                                               std::to_string(bytes.size() - kFrameHeaderSize) +
                                               " follow the header");
  }
  Parsed p;
  p.message.codec = static_cast<ImageCodec>(codec);
  p.message.frame_id = get_le(bytes, 6, 8);
  p.message.payload.assign(bytes.begin() + kFrameHeaderSize,
                           bytes.begin() + kFrameHeaderSize + len);
  p.end = kFrameHeaderSize + len;
  return p;
}

Json profile_json(const SimulationProfile& p) { return Json::parse(save_profile(p)); }

Json id_or_null(const Json& request) {
  auto it = request.find("id");
  return it == request.end() ? Json(nullptr) : *it;
}

std::string error_reply(const Json& request_type, const Json& id, std::string_view code,
                        std::string_view message, const std::string* field = nullptr) {
  Json r;
  r["type"] = "error";
  r["request"] = request_type;
  r["id"] = id;
  r["code"] = code;
  if (field) r["field"] = *field;
  r["message"] = message;
  return r.dump();
}

double number_field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    throw ValidationError(key, "required number");
  }
  return it->get<double>();
}

}  // namespace

std::optional<std::uint64_t> peek_frame_id(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 14 || !std::equal(kFrameMagic, kFrameMagic + 4, bytes.begin())) {
    return std::nullopt;
  }
  return get_le(bytes, 6, 8);
}

std::vector<std::uint8_t> encode_frame_message(const FrameMessage& m) {
  if (m.payload.size() > 0xffffffffu) throw ContractError("frame payload exceeds 4 GiB");
  std::vector<std::uint8_t> out;
  out.reserve(kFrameHeaderSize + m.payload.size());
  out.insert(out.end(), kFrameMagic, kFrameMagic + 4);
  out.push_back(kProtocolVersion);
  out.push_back(static_cast<std::uint8_t>(m.codec));
  put_u64(out, m.frame_id);
  put_u32(out, static_cast<std::uint32_t>(m.payload.size()));
  out.insert(out.end(), m.payload.begin(), m.payload.end());
  return out;
}

FrameMessage parse_frame_message(std::span<const std::uint8_t> bytes, std::size_t max_payload) {
  Parsed p = parse_header(bytes, max_payload);
  if (p.end != bytes.size()) {
    throw ProtocolError("length_mismatch",
                        std::to_string(bytes.size() - p.end) + " bytes after the payload");
  }
  return std::move(p.message);
}

std::vector<std::uint8_t> encode_frame_reply(const FrameMessage& m, std::string_view trailer) {
  std::vector<std::uint8_t> out = encode_frame_message(m);
  put_u32(out, static_cast<std::uint32_t>(trailer.size()));
  out.insert(out.end(), trailer.begin(), trailer.end());
  return out;
}

FrameReply parse_frame_reply(std::span<const std::uint8_t> bytes) {
  Parsed p = parse_header(bytes, 0xffffffffu);
  if (bytes.size() < p.end + 4) throw ProtocolError("truncated", "reply has no trailer length");
  const std::uint64_t len = get_le(bytes, p.end, 4);
  if (bytes.size() != p.end + 4 + len) {
    throw ProtocolError("length_mismatch", "trailer length does not match the reply size");
  }
  FrameReply r;
  r.frame = std::move(p.message);
  r.trailer.assign(bytes.begin() + p.end + 4, bytes.end());
  return r;
}

Session::Session(SessionOptions options)
    : options_(std::move(options)),
      profile_(options_.initial_profile),
      epoch_(std::chrono::steady_clock::now()) {
  profile_.validate();
}

std::string Session::handle_control(std::string_view text) {
  Json request;
  try {
    request = Json::parse(text);
  } catch (const Json::parse_error& e) {
    return error_reply(nullptr, nullptr, "parse", std::string("malformed JSON: ") + e.what());
  }
  if (!request.is_object()) {
    return error_reply(nullptr, nullptr, "bad_request", "control message must be an object");
  }
  const Json id = id_or_null(request);
  auto type_it = request.find("type");
  if (type_it == request.end() || !type_it->is_string()) {
    return error_reply(nullptr, id, "bad_request", "missing string field \"type\"");
  }
  const std::string type = type_it->get<std::string>();

  auto profile_reply = [&](std::vector<std::string> warnings = {}) {
    Json r;
    r["type"] = "profile";
    r["request"] = type;
    r["id"] = id;
    r["profile"] = profile_json(profile_);
    r["filters"] = enabled_filters(profile_);
    if (!warnings.empty()) r["warnings"] = warnings;
    return r.dump();
  };

  try {
    if (type == "ping") {
      Json r;
      r["type"] = "pong";
      r["request"] = type;
      r["id"] = id;
      r["frames"] = frames_processed_;
      return r.dump();
    }
    if (type == "get_profile") return profile_reply();
    if (type == "set_stage") {
      auto it = request.find("stage");
      if (it == request.end() || !it->is_number_integer()) {
        throw ValidationError("stage", "required integer in 0..4");
      }
      const auto stage = it->get<long long>();
      if (stage < 0 || stage >= kStageCount) {
        throw ValidationError("stage", "must be in 0..4");
      }
      SimulationProfile next = preset(static_cast<int>(stage));
      next.field.fixation_x = profile_.field.fixation_x;
      next.field.fixation_y = profile_.field.fixation_y;
      next.validate();
      profile_ = next;
      return profile_reply();
    }
    if (type == "set_fixation") {
      SimulationProfile next = profile_;
      next.field.fixation_x = number_field(request, "x");
      next.field.fixation_y = number_field(request, "y");
      next.validate();
      profile_ = next;
      return profile_reply();
    }
    if (type == "set_param") {
      auto path = request.find("path");
      auto value = request.find("value");
      if (path == request.end() || !path->is_string()) {
        throw ValidationError("path", "required string");
      }
      if (value == request.end()) throw ValidationError("value", "required");
      SimulationProfile next = profile_;
      set_profile_param(next, path->get<std::string>(), value->dump());
      profile_ = next;
      return profile_reply();
    }
    if (type == "set_profile") {
      auto doc = request.find("profile");
      if (doc == request.end() || !doc->is_object()) {
        throw ValidationError("profile", "required object");
      }
      const bool lenient = request.value("lenient", false);
      std::vector<std::string> warnings;
      SimulationProfile next = load_profile(
          doc->dump(), lenient ? ParseMode::kLenient : ParseMode::kStrict, &warnings);
      profile_ = next;
      return profile_reply(std::move(warnings));
    }
    return error_reply(type, id, "unknown_type", "unknown control message type \"" + type +
                                                     "\" (expected set_stage, set_profile, "
                                                     "set_fixation, set_param, get_profile "
                                                     "or ping)");
  } catch (const ValidationError& e) {
    return error_reply(type, id, "validation", e.what(), &e.field());
  } catch (const ParseError& e) {
    return error_reply(type, id, "parse", e.what());
  } catch (const Error& e) {
    return error_reply(type, id, "bad_request", e.what());
  }
}

std::string Session::frame_error(std::uint64_t frame_id, std::string_view code,
                                 std::string_view message,
                                 const std::vector<std::uint64_t>& dropped) {
  Json r;
  r["type"] = "error";
  r["request"] = "frame";
  r["frame_id"] = frame_id;
  r["code"] = code;
  r["message"] = message;
  r["dropped"] = dropped;
  return r.dump();
}

Session::Reply Session::handle_frame(std::span<const std::uint8_t> message,
                                     const std::vector<std::uint64_t>& dropped) {
  Reply reply;
  auto fail = [&](std::optional<std::uint64_t> id, std::string_view code,
                  std::string_view text) {
    Json r;
    r["type"] = "error";
    r["request"] = "frame";
    r["frame_id"] = id ? Json(*id) : Json(nullptr);
    r["code"] = code;
    r["message"] = text;
    r["dropped"] = dropped;
    const std::string s = r.dump();
    reply.bytes.assign(s.begin(), s.end());
    return reply;
  };

  FrameMessage in;
  try {
    in = parse_frame_message(message, options_.max_frame_bytes);
  } catch (const ProtocolError& e) {
    return fail(peek_frame_id(message), e.code(), e.what());
  }
  if (has_last_id_ && in.frame_id <= last_frame_id_) {
    return fail(in.frame_id, "frame_id_order",
                "frame_id " + std::to_string(in.frame_id) + " is not greater than " +
                    std::to_string(last_frame_id_));
  }
  Frame frame;
  try {
    frame = decode_image(in.payload);
  } catch (const ParseError& e) {
    return fail(in.frame_id, "decode", e.what());
  }
  has_last_id_ = true;
  last_frame_id_ = in.frame_id;

  const double t = options_.clock
                       ? options_.clock()
                       : std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_)
                             .count();
  FrameResult result;
  try {
    result = process_frame(frame, profile_, t, options_.budget_us);
  } catch (const Error& e) {
    return fail(in.frame_id, "process", e.what());
  }
  ++frames_processed_;

  FrameMessage out;
  out.codec = in.codec;
  out.frame_id = in.frame_id;
  out.payload = encode_image(result.frame, in.codec);

  Json trailer;
  trailer["frame_id"] = in.frame_id;
  trailer["timing"] = Json::parse(result.timing.to_json());
  trailer["dropped"] = dropped;
  Json warnings = Json::array();
  if (result.timing.over_budget) {
    warnings.push_back("over_budget: " + std::to_string(std::llround(result.timing.total_us)) +
                       " us > " + std::to_string(std::llround(result.timing.budget_us)) + " us");
  }
  trailer["warnings"] = warnings;
  reply.binary = true;
  reply.bytes = encode_frame_reply(out, trailer.dump());
  return reply;
}

}  // namespace vsim
