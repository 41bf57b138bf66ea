// Copyright 2026 The Coadapt Authors
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

#include "server.h"

#include <chrono>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <map>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "error.h"
#include "json.hpp"
#include "rng.h"
#include "session.h"

namespace coadapt {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr auto kTimerPeriod = std::chrono::microseconds(1000000 / 120);

class WsConnection;

struct LiveSession {
  std::unique_ptr<Session> session;
  std::weak_ptr<WsConnection> conn;
  Clock::time_point clock_start;
  long long ticks_done = 0;
};

}  // namespace

struct Server::Impl : std::enable_shared_from_this<Server::Impl> {
  explicit Impl(ServerOptions o) : opt(std::move(o)) {}

  ServerOptions opt;
  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  net::steady_timer timer{ioc};
  std::thread thread;
  std::map<std::string, LiveSession> sessions;
  uint64_t counter = 0;
  unsigned short bound_port = 0;
  bool running = false;

  unsigned short bind();
  void accept();
  void schedule_tick();
  void on_tick();
  void shutdown();

  http::response<http::string_body> handle_http(const http::request<http::string_body>& req);
  void attach(const std::string& id, const std::shared_ptr<WsConnection>& c);
  void detach(const std::string& id, const WsConnection* c);
  void on_message(const std::string& id, const std::string& text);
  void deliver(LiveSession& s, const std::vector<json>& events);
  std::string new_id();
};

namespace {

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket socket, std::shared_ptr<Server::Impl> srv, std::string id)
      : ws_(std::move(socket)), srv_(std::move(srv)), id_(std::move(id)) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->srv_->attach(self->id_, self);
      self->do_read();
    });
  }

  void send(std::string text) {
    if (closed_) return;
    outbox_.push_back(std::move(text));
    if (outbox_.size() == 1) do_write();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().close(ec);
  }

 private:
  void do_read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, size_t) {
      if (ec) {
        self->closed_ = true;
        self->srv_->detach(self->id_, self.get());
        return;
      }
      std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->srv_->on_message(self->id_, text);
      self->do_read();
    });
  }

  void do_write() {
    ws_.text(true);
    ws_.async_write(net::buffer(outbox_.front()),
                    [self = shared_from_this()](beast::error_code ec, size_t) {
                      if (ec) {
                        self->closed_ = true;
                        return;
                      }
                      self->outbox_.pop_front();
                      if (!self->outbox_.empty()) self->do_write();
                    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::shared_ptr<Server::Impl> srv_;
  std::string id_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  bool closed_ = false;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket socket, std::shared_ptr<Server::Impl> srv)
      : stream_(std::move(socket)), srv_(std::move(srv)) {}

  void run() { do_read(); }

 private:
  void do_read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, size_t) {
                       self->on_read(ec);
                     });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      beast::error_code ignored;
      stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
      return;
    }
    if (websocket::is_upgrade(req_)) {
      std::string target(req_.target());
      const std::string prefix = "/sessions/";
      const std::string suffix = "/ws";
      if (target.rfind(prefix, 0) == 0 && target.size() > prefix.size() + suffix.size() &&
          target.compare(target.size() - suffix.size(), suffix.size(), suffix) == 0) {
        std::string id = target.substr(prefix.size(), target.size() - prefix.size() - suffix.size());
        if (srv_->sessions.count(id)) {
          stream_.expires_never();
          std::make_shared<WsConnection>(stream_.release_socket(), srv_, id)->run(std::move(req_));
          return;
        }
      }
    }
    auto res = std::make_shared<http::response<http::string_body>>(srv_->handle_http(req_));
    bool keep = res->keep_alive();
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res, keep](beast::error_code ec, size_t) {
                        if (ec) return;
                        if (!keep) {
                          beast::error_code ignored;
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                          return;
                        }
                        self->do_read();
                      });
  }

  beast::tcp_stream stream_;
  std::shared_ptr<Server::Impl> srv_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

http::response<http::string_body> make_response(const http::request<http::string_body>& req,
                                                 http::status status, const std::string& body,
                                                 const char* content_type) {
  http::response<http::string_body> res{status, req.version()};
  res.set(http::field::content_type, content_type);
  res.keep_alive(req.keep_alive());
  res.body() = body;
  res.prepare_payload();
  return res;
}

http::response<http::string_body> json_response(const http::request<http::string_body>& req,
                                                http::status status, const json& body) {
  return make_response(req, status, body.dump(), "application/json");
}

json error_body(const std::string& code, const std::string& message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

}  // namespace

std::string Server::Impl::new_id() {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(derive_seed(opt.seed, counter++)));
  return buf;
}

http::response<http::string_body> Server::Impl::handle_http(
    const http::request<http::string_body>& req) {
  std::string target(req.target());
  if (req.method() == http::verb::post && target == "/sessions") {
    json body;
    try {
      body = req.body().empty() ? json::object() : json::parse(req.body());
    } catch (const json::exception& e) {
      return json_response(req, http::status::bad_request, error_body("parse", e.what()));
    }
    try {
      if (body.is_object()) {
        if (!body.contains("human")) body["human"] = json::object();
        if (body["human"].is_object() && !body["human"].contains("model")) {
          body["human"]["model"] = "live";
        }
      }
      ExperimentConfig cfg = config_from_json(body);
      std::string id = new_id();
      LiveSession live;
      live.session = std::make_unique<Session>(id, cfg);
      if (!opt.data_dir.empty()) {
        live.session->attach_log_file(
            (std::filesystem::path(opt.data_dir) / (id + ".ndjson")).string());
      }
      json status = live.session->status_json();
      sessions.emplace(id, std::move(live));
      return json_response(req, http::status::created, status);
    } catch (const Error& e) {
      return json_response(req, http::status::bad_request,
                           error_body(error_code_name(e.code()), e.what()));
    }
  }
  const std::string prefix = "/sessions/";
  if (req.method() == http::verb::get && target.rfind(prefix, 0) == 0) {
    std::string rest = target.substr(prefix.size());
    bool want_log = false;
    if (rest.size() > 4 && rest.compare(rest.size() - 4, 4, "/log") == 0) {
      want_log = true;
      rest.resize(rest.size() - 4);
    }
    auto it = sessions.find(rest);
    if (it == sessions.end()) {
      return json_response(req, http::status::not_found,
                           error_body("not-found", "no session " + rest));
    }
    if (want_log) {
      return make_response(req, http::status::ok, it->second.session->log_text(),
                           "application/x-ndjson");
    }
    return json_response(req, http::status::ok, it->second.session->status_json());
  }
  return json_response(req, http::status::not_found, error_body("not-found", "no route " + target));
}

void Server::Impl::attach(const std::string& id, const std::shared_ptr<WsConnection>& c) {
  auto it = sessions.find(id);
  if (it == sessions.end()) {
    c->close();
    return;
  }
  if (auto old = it->second.conn.lock()) old->close();
  it->second.conn = c;
  it->second.clock_start = Clock::now();
  it->second.ticks_done = 0;
  c->send(json({{"type", "notice"}, {"message", "connected"}, {"status", it->second.session->status_json()}}).dump());
}

void Server::Impl::detach(const std::string& id, const WsConnection* c) {
  auto it = sessions.find(id);
  if (it != sessions.end() && it->second.conn.lock().get() == c) it->second.conn.reset();
}

void Server::Impl::deliver(LiveSession& s, const std::vector<json>& events) {
  auto c = s.conn.lock();
  if (!c) return;
  for (const json& e : events) c->send(e.dump());
}

void Server::Impl::on_message(const std::string& id, const std::string& text) {
  auto it = sessions.find(id);
  if (it == sessions.end()) return;
  LiveSession& s = it->second;
  json msg;
  try {
    msg = json::parse(text);
  } catch (const json::exception& e) {
    deliver(s, {{{"type", "error"}, {"code", "parse"}, {"message", e.what()}}});
    return;
  }
  if (msg.is_object() && msg.value("type", "") == "tick") {
    if (!opt.manual_clock) {
      deliver(s, {{{"type", "error"}, {"code", "invalid-argument"},
                   {"message", "the server owns the clock"}}});
      return;
    }
    int n = msg.contains("n") && msg["n"].is_number_integer() ? msg["n"].get<int>() : 1;
    if (n < 0) n = 0;
    deliver(s, s.session->advance(n));
    return;
  }
  deliver(s, s.session->handle_client(msg));
}

void Server::Impl::schedule_tick() {
  timer.expires_after(kTimerPeriod);
  timer.async_wait([self = shared_from_this()](beast::error_code ec) {
    if (ec || !self->running) return;
    self->on_tick();
    self->schedule_tick();
  });
}

void Server::Impl::on_tick() {
  auto now = Clock::now();
  for (auto& [id, s] : sessions) {
    if (s.conn.expired()) continue;
    double rate = s.session->engine().config().sample_rate_hz;
    double elapsed = std::chrono::duration<double>(now - s.clock_start).count();
    long long due = static_cast<long long>(elapsed * rate);
    if (due > s.ticks_done) {
      int n = static_cast<int>(due - s.ticks_done);
      s.ticks_done = due;
      deliver(s, s.session->advance(n));
    }
  }
}

void Server::Impl::accept() {
  acceptor.async_accept([self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    // Frames are small and go out at the sample rate; don't let Nagle batch them.
    beast::error_code ignored;
    socket.set_option(tcp::no_delay(true), ignored);
    std::make_shared<HttpConnection>(std::move(socket), self)->run();
    if (self->running) self->accept();
  });
}

unsigned short Server::Impl::bind() {
  beast::error_code ec;
  auto addr = net::ip::make_address(opt.address, ec);
  if (ec) fail(ErrorCode::kInvalidArgument, "bad address " + opt.address);
  tcp::endpoint ep{addr, opt.port};
  acceptor.open(ep.protocol(), ec);
  if (!ec) acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) acceptor.bind(ep, ec);
  if (!ec) acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) fail(ErrorCode::kIo, "cannot listen on " + opt.address + ":" + std::to_string(opt.port) +
                                   ": " + ec.message());
  if (!opt.data_dir.empty()) {
    std::error_code fec;
    std::filesystem::create_directories(opt.data_dir, fec);
    if (fec) fail(ErrorCode::kIo, opt.data_dir + ": " + fec.message());
  }
  bound_port = acceptor.local_endpoint().port();
  running = true;
  accept();
  if (!opt.manual_clock) schedule_tick();
  return bound_port;
}

void Server::Impl::shutdown() {
  running = false;
  beast::error_code ec;
  acceptor.close(ec);
  timer.cancel();
  for (auto& [id, s] : sessions) {
    if (auto c = s.conn.lock()) c->close();
  }
  ioc.stop();
}

Server::Server(ServerOptions options) : impl_(std::make_shared<Impl>(std::move(options))) {}

Server::~Server() { stop(); }

unsigned short Server::start() {
  unsigned short port = impl_->bind();
  impl_->thread = std::thread([impl = impl_] { impl->ioc.run(); });
  return port;
}

void Server::run_until_signal() {
  impl_->bind();
  net::signal_set signals(impl_->ioc, SIGINT, SIGTERM);
  signals.async_wait([impl = impl_](beast::error_code, int) { impl->shutdown(); });
  impl_->ioc.run();
}

void Server::stop() {
  if (impl_->thread.joinable()) {
    net::post(impl_->ioc, [impl = impl_] { impl->shutdown(); });
    impl_->thread.join();
  }
}

unsigned short Server::port() const { return impl_->bound_port; }

}  // namespace coadapt
