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

#include "vsim/service.h"

#include <atomic>
#include <charconv>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast.hpp>

#include "json.hpp"

#include "vsim/io.h"

namespace vsim {
namespace {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using Json = nlohmann::ordered_json;
using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

constexpr auto kReadTimeout = std::chrono::seconds(60);
constexpr std::size_t kHeaderLimit = 64 * 1024;

struct Shared {
  ServiceConfig config;
  net::thread_pool& pool;
};

std::string_view sv(beast::string_view s) { return {s.data(), s.size()}; }

// Query strings -----------------------------------------------------------

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string url_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '+') {
      out += ' ';
    } else if (s[i] == '%' && i + 2 < s.size() && hex_value(s[i + 1]) >= 0 &&
               hex_value(s[i + 2]) >= 0) {
      out += static_cast<char>(hex_value(s[i + 1]) * 16 + hex_value(s[i + 2]));
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

struct Target {
  std::string path;
  std::map<std::string, std::string> query;
};

Target parse_target(std::string_view target) {
  Target t;
  const auto q = target.find('?');
  t.path = std::string(target.substr(0, q));
  if (q == std::string_view::npos) return t;
  std::string_view rest = target.substr(q + 1);
  while (!rest.empty()) {
    const auto amp = rest.find('&');
    const std::string_view pair = rest.substr(0, amp);
    const auto eq = pair.find('=');
    t.query[url_decode(pair.substr(0, eq))] =
        eq == std::string_view::npos ? "" : url_decode(pair.substr(eq + 1));
    if (amp == std::string_view::npos) break;
    rest.remove_prefix(amp + 1);
  }
  return t;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

// Responses ---------------------------------------------------------------

Response make_response(unsigned version, bool keep_alive, http::status status,
                       std::string body, std::string_view content_type) {
  Response res{status, version};
  res.set(http::field::server, std::string("vsim/") + kVersion);
  res.set(http::field::content_type,
          beast::string_view(content_type.data(), content_type.size()));
  res.set(http::field::access_control_allow_origin, "*");
  res.set(http::field::access_control_expose_headers, "X-Vsim-Timing");
  res.keep_alive(keep_alive);
  res.body() = std::move(body);
  res.prepare_payload();
  return res;
}

Response json_response(const Request& req, http::status status, const Json& body) {
  return make_response(req.version(), req.keep_alive(), status, body.dump() + "\n",
                       "application/json");
}

Response error_response(const Request& req, http::status status, std::string_view code,
                        std::string_view message, const std::string* field = nullptr) {
  Json body;
  body["error"] = code;
  if (field) body["field"] = *field;
  body["message"] = message;
  return json_response(req, status, body);
}

Json profiles_document() {
  Json doc;
  doc["schema"] = "vsim.profiles/1";
  doc["profiles"] = Json::array();
  for (int stage = 0; stage < kStageCount; ++stage) {
    const SimulationProfile p = preset(stage);
    Json entry;
    entry["stage"] = stage;
    entry["name"] = p.name;
    entry["description"] = std::string(preset_description(stage));
    entry["filters"] = enabled_filters(p);
    entry["profile"] = Json::parse(save_profile(p));
    doc["profiles"].push_back(std::move(entry));
  }
  return doc;
}

// POST /simulate. Runs on the worker pool.
Response simulate(const Request& req, const Shared& shared) {
  const Target target = parse_target(sv(req.target()));
  try {
    if (req.body().empty()) {
      return error_response(req, http::status::bad_request, "empty_body",
                            "request body must be a PNG or JPEG image");
    }
    SimulationProfile profile;
    const auto header = req.find("X-Vsim-Profile");
    const auto stage_it = target.query.find("stage");
    if (header != req.end() && stage_it != target.query.end()) {
      return error_response(req, http::status::bad_request, "conflict",
                            "give either the X-Vsim-Profile header or ?stage, not both");
    }
    if (header != req.end()) {
      profile = load_profile(sv(header->value()));
    } else {
      int stage = 0;
      if (stage_it != target.query.end() &&
          (!parse_number(stage_it->second, stage) || stage < 0 || stage >= kStageCount)) {
        throw ValidationError("stage", "must be an integer in 0..4");
      }
      profile = preset(stage);
    }
    if (auto it = target.query.find("fixation"); it != target.query.end()) {
      const auto comma = it->second.find(',');
      double x = 0, y = 0;
      if (comma == std::string::npos ||
          !parse_number(std::string_view(it->second).substr(0, comma), x) ||
          !parse_number(std::string_view(it->second).substr(comma + 1), y)) {
        throw ValidationError("field.fixation", "expected x,y");
      }
      profile.field.fixation_x = x;
      profile.field.fixation_y = y;
    }
    if (auto it = target.query.find("seed"); it != target.query.end()) {
      std::uint64_t seed = 0;
      if (!parse_number(it->second, seed)) throw ValidationError("seed", "expected a u64");
      profile.floaters.seed = seed;
      profile.patches.seed = seed;
    }
    double t = 0;
    if (auto it = target.query.find("t"); it != target.query.end()) {
      if (!parse_number(it->second, t)) throw ValidationError("t", "expected seconds");
    }
    profile.validate();

    const std::span<const std::uint8_t> body(
        reinterpret_cast<const std::uint8_t*>(req.body().data()), req.body().size());
    const ImageCodec codec = detect_codec(body);
    const Frame frame = decode_image(body);
    const FrameResult result = process_frame(frame, profile, t, shared.config.budget_us);
    const auto bytes = encode_image(result.frame, codec);
    Response res = make_response(
        req.version(), req.keep_alive(), http::status::ok,
        std::string(bytes.begin(), bytes.end()),
        codec == ImageCodec::kPng ? "image/png" : "image/jpeg");
    res.set("X-Vsim-Timing", result.timing.to_json());
    return res;
  } catch (const ValidationError& e) {
    return error_response(req, http::status::unprocessable_entity, "validation", e.what(),
                          &e.field());
  } catch (const ParseError& e) {
    return error_response(req, http::status::bad_request, "parse", e.what());
  } catch (const Error& e) {
    return error_response(req, http::status::bad_request, "bad_request", e.what());
  }
}

// WebSocket session -------------------------------------------------------

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, const Shared& shared)
      : ws_(std::move(socket)), shared_(shared), session_(session_options(shared.config)) {}

  void run(Request req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.set_option(websocket::stream_base::decorator([](websocket::response_type& res) {
      res.set(http::field::server, std::string("vsim/") + kVersion);
    }));
    // Frames up to twice the limit still get a too_large reply; beyond
    // that the connection is closed with 1009.
    ws_.read_message_max(2 * shared_.config.max_frame_bytes + 65536);
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

 private:
  struct Item {
    bool binary = false;
    std::string data;
  };
  struct Outgoing {
    bool binary = false;
    std::string data;
  };

  static SessionOptions session_options(const ServiceConfig& c) {
    SessionOptions o;
    o.budget_us = c.budget_us;
    o.max_frame_bytes = c.max_frame_bytes;
    return o;
  }

  void on_accept(beast::error_code ec) {
    if (ec) return;
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      std::lock_guard lock(mu_);
      queue_.clear();
      return;
    }
    Item item{ws_.got_binary(), beast::buffers_to_string(buffer_.data())};
    buffer_.consume(buffer_.size());
    enqueue(std::move(item));
    do_read();
  }

  static std::span<const std::uint8_t> bytes_of(const std::string& s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
  }

  // Controls are never dropped. A frame beyond max_pending_frames evicts the
  // oldest queued frame that carries a readable frame_id.
  void enqueue(Item item) {
    std::lock_guard lock(mu_);
    if (item.binary) {
      if (pending_frames_ >= shared_.config.max_pending_frames) {
        for (auto it = queue_.begin(); it != queue_.end(); ++it) {
          if (!it->binary) continue;
          if (const auto id = peek_frame_id(bytes_of(it->data))) {
            dropped_.push_back(*id);
            queue_.erase(it);
            --pending_frames_;
            break;
          }
        }
      }
      ++pending_frames_;
    }
    queue_.push_back(std::move(item));
    if (!draining_) {
      draining_ = true;
      net::post(shared_.pool, [self = shared_from_this()] { self->drain_one(); });
    }
  }

  // At most one drain task is queued or running per session, so session_ is
  // only touched by one thread at a time and items run in arrival order.
  void drain_one() {
    Item item;
    std::vector<std::uint64_t> dropped;
    {
      std::lock_guard lock(mu_);
      if (queue_.empty()) {
        draining_ = false;
        return;
      }
      item = std::move(queue_.front());
      queue_.pop_front();
      if (item.binary) {
        --pending_frames_;
        dropped.swap(dropped_);
      }
    }
    Outgoing out;
    if (item.binary) {
      Session::Reply reply = session_.handle_frame(bytes_of(item.data), dropped);
      out.binary = reply.binary;
      out.data.assign(reply.bytes.begin(), reply.bytes.end());
    } else {
      out.data = session_.handle_control(item.data);
    }
    net::post(ws_.get_executor(), [self = shared_from_this(), out = std::move(out)]() mutable {
      self->outbox_.push_back(std::move(out));
      if (self->outbox_.size() == 1) self->do_write();
    });
    net::post(shared_.pool, [self = shared_from_this()] { self->drain_one(); });
  }

  void do_write() {
    Outgoing& front = outbox_.front();
    ws_.binary(front.binary);
    ws_.async_write(net::buffer(front.data),
                    beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) return;
    outbox_.pop_front();
    if (!outbox_.empty()) do_write();
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  const Shared& shared_;
  Session session_;

  std::mutex mu_;
  std::deque<Item> queue_;
  std::size_t pending_frames_ = 0;
  std::vector<std::uint64_t> dropped_;
  bool draining_ = false;

  std::deque<Outgoing> outbox_;  // on the socket's executor only
};

// HTTP connection ---------------------------------------------------------

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, const Shared& shared)
      : stream_(std::move(socket)), shared_(shared) {}

  void run() {
    net::dispatch(stream_.get_executor(),
                  beast::bind_front_handler(&HttpSession::do_read, shared_from_this()));
  }

 private:
  void do_read() {
    parser_.emplace();
    parser_->header_limit(kHeaderLimit);
    parser_->body_limit(shared_.config.max_frame_bytes);
    stream_.expires_after(kReadTimeout);
    http::async_read(stream_, buffer_, *parser_,
                     beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) return close();
    if (ec == http::error::body_limit) {
      Request req;
      req.version(11);
      req.keep_alive(false);
      return send(error_response(req, http::status::payload_too_large, "too_large",
                                 "request body exceeds " +
                                     std::to_string(shared_.config.max_frame_bytes) +
                                     " bytes"));
    }
    if (ec) return;
    Request req = parser_->release();
    const Target target = parse_target(sv(req.target()));

    if (websocket::is_upgrade(req)) {
      if (target.path != "/session") {
        return send(error_response(req, http::status::not_found, "not_found",
                                   "WebSocket endpoint is /session"));
      }
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), shared_)->run(std::move(req));
      return;
    }
    if (req.method() == http::verb::options) {
      Response res = make_response(req.version(), req.keep_alive(), http::status::no_content,
                                   "", "text/plain");
      res.set(http::field::access_control_allow_methods, "GET, POST, OPTIONS");
      res.set(http::field::access_control_allow_headers, "Content-Type, X-Vsim-Profile");
      return send(std::move(res));
    }
    if (target.path == "/healthz") {
      if (req.method() != http::verb::get) return method_not_allowed(req, "GET");
      Json body;
      body["status"] = "ok";
      body["version"] = kVersion;
      return send(json_response(req, http::status::ok, body));
    }
    if (target.path == "/profiles") {
      if (req.method() != http::verb::get) return method_not_allowed(req, "GET");
      return send(json_response(req, http::status::ok, profiles_document()));
    }
    if (target.path == "/simulate") {
      if (req.method() != http::verb::post) return method_not_allowed(req, "POST");
      auto shared_req = std::make_shared<Request>(std::move(req));
      net::post(shared_.pool, [self = shared_from_this(), shared_req] {
        Response res = simulate(*shared_req, self->shared_);
        net::post(self->stream_.get_executor(), [self, res = std::move(res)]() mutable {
          self->send(std::move(res));
        });
      });
      return;
    }
    if (target.path == "/session") {
      return send(error_response(req, http::status::upgrade_required, "upgrade_required",
                                 "/session speaks WebSocket"));
    }
    return send(error_response(req, http::status::not_found, "not_found",
                               "no route for " + target.path));
  }

  void method_not_allowed(const Request& req, const char* allowed) {
    Response res = error_response(req, http::status::method_not_allowed, "method_not_allowed",
                                  std::string("use ") + allowed);
    res.set(http::field::allow, allowed);
    send(std::move(res));
  }

  void send(Response res) {
    auto sp = std::make_shared<Response>(std::move(res));
    http::async_write(stream_, *sp, [self = shared_from_this(), sp](beast::error_code ec,
                                                                    std::size_t) {
      if (ec) return;
      if (sp->need_eof()) return self->close();
      self->do_read();
    });
  }

  void close() {
    beast::error_code ec;
    stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  std::optional<http::request_parser<http::string_body>> parser_;
  const Shared& shared_;
};

int default_workers(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

struct Server::Impl {
  explicit Impl(ServiceConfig c)
      : config(std::move(c)),
        ioc(std::max(1, config.io_threads)),
        acceptor(ioc),
        pool(static_cast<std::size_t>(default_workers(config.worker_threads))),
        shared{config, pool} {
    const std::string where = config.address + ":" + std::to_string(config.port);
    beast::error_code ec;
    const auto address = net::ip::make_address(config.address, ec);
    if (ec) throw IoError("cannot bind " + where + ": invalid address");
    const tcp::endpoint endpoint(address, config.port);
    auto fail = [&](const char* what) {
      throw IoError("cannot bind " + where + ": " + what + ": " + ec.message());
    };
    if (acceptor.open(endpoint.protocol(), ec); ec) fail("open");
    if (acceptor.set_option(net::socket_base::reuse_address(true), ec); ec) fail("set_option");
    if (acceptor.bind(endpoint, ec); ec) fail("bind");
    if (acceptor.listen(net::socket_base::max_listen_connections, ec); ec) fail("listen");
  }

  ~Impl() {
    pool.stop();
    pool.join();
  }

  void do_accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket s) {
      if (!ec) std::make_shared<HttpSession>(std::move(s), shared)->run();
      if (acceptor.is_open()) do_accept();
    });
  }

  ServiceConfig config;
  net::io_context ioc;
  tcp::acceptor acceptor;
  net::thread_pool pool;
  Shared shared;
};

Server::Server(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Server::~Server() { stop(); }

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

const ServiceConfig& Server::config() const { return impl_->config; }

void Server::run() {
  impl_->do_accept();
  std::vector<std::thread> extra;
  for (int i = 1; i < impl_->config.io_threads; ++i) {
    extra.emplace_back([this] { impl_->ioc.run(); });
  }
  impl_->ioc.run();
  for (auto& t : extra) t.join();
}

void Server::stop() { impl_->ioc.stop(); }

}  // namespace vsim
