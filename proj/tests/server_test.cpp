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

// Loopback tests of the HTTP endpoints and the WebSocket wire protocol,
// driven with a manual clock so every run sees the same tick sequence.

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "coadapt/coadapt.h"
#include "doctest.h"
#include "json.hpp"

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;

namespace {

struct Reply {
  int status = 0;
  std::string body;
  std::string content_type;
};

Reply request(unsigned short port, http::verb verb, const std::string& target,
              const std::string& body = "") {
  net::io_context ioc;
  tcp::resolver resolver(ioc);
  beast::tcp_stream stream(ioc);
  stream.connect(resolver.resolve("127.0.0.1", std::to_string(port)));
  http::request<http::string_body> req{verb, target, 11};
  req.set(http::field::host, "127.0.0.1");
  req.set(http::field::content_type, "application/json");
  req.body() = body;
  req.prepare_payload();
  http::write(stream, req);
  beast::flat_buffer buffer;
  http::response<http::string_body> res;
  http::read(stream, buffer, res);
  beast::error_code ec;
  stream.socket().shutdown(tcp::socket::shutdown_both, ec);
  return {static_cast<int>(res.result_int()), res.body(),
          std::string(res[http::field::content_type])};
}

class Client {
 public:
  Client(unsigned short port, const std::string& id) : resolver_(ioc_), ws_(ioc_) {
    auto results = resolver_.resolve("127.0.0.1", std::to_string(port));
    net::connect(ws_.next_layer(), results.begin(), results.end());
    ws_.next_layer().set_option(tcp::no_delay(true));
    ws_.handshake("127.0.0.1", "/sessions/" + id + "/ws");
  }
  ~Client() {
    beast::error_code ec;
    ws_.close(websocket::close_code::normal, ec);
  }
  void send(const json& j) { ws_.write(net::buffer(j.dump())); }
  json read() {
    beast::flat_buffer b;
    ws_.read(b);
    return json::parse(beast::buffers_to_string(b.data()));
  }
  // Reads events until one of the given type arrives; returns all of them.
  std::vector<json> read_until(const std::string& type) {
    std::vector<json> out;
    for (int i = 0; i < 10000; ++i) {
      out.push_back(read());
      if (out.back().value("type", "") == type) return out;
    }
    FAIL("no " << type << " event");
    return out;
  }

 private:
  net::io_context ioc_;
  tcp::resolver resolver_;
  websocket::stream<tcp::socket> ws_;
};

struct ServerFixture {
  ServerFixture() {
    dir = std::filesystem::temp_directory_path() / "coadapt_server_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    json opts = {{"address", "127.0.0.1"}, {"port", 0}, {"data_dir", dir.string()},
                 {"manual_clock", true}};
    REQUIRE(coadapt_server_start(opts.dump().c_str(), &server, &port) == COADAPT_OK);
  }
  ~ServerFixture() {
    coadapt_server_stop(server);
    std::filesystem::remove_all(dir);
  }
  std::filesystem::path dir;
  coadapt_server* server = nullptr;
  unsigned short port = 0;
};

const char* kConfig =
    R"({"experiment": 2, "samples_per_trial": 10, "attention_check": false,
        "rest_every": 0, "seed": 4})";

}  // namespace

TEST_CASE_FIXTURE(ServerFixture, "http endpoints") {
  Reply created = request(port, http::verb::post, "/sessions", kConfig);
  CHECK(created.status == 201);
  json st = json::parse(created.body);
  std::string id = st.at("id");
  CHECK(st["status"] == "intro");
  CHECK(st["trials_total"] == 20);

  Reply status = request(port, http::verb::get, "/sessions/" + id);
  CHECK(status.status == 200);
  CHECK(json::parse(status.body)["id"] == id);

  Reply log = request(port, http::verb::get, "/sessions/" + id + "/log");
  CHECK(log.status == 200);
  CHECK(log.content_type == "application/x-ndjson");
  CHECK(log.body.find("\"create\"") != std::string::npos);

  CHECK(request(port, http::verb::get, "/sessions/nope").status == 404);
  CHECK(request(port, http::verb::get, "/elsewhere").status == 404);
  Reply bad = request(port, http::verb::post, "/sessions", R"({"experiment": 9})");
  CHECK(bad.status == 400);
  CHECK(json::parse(bad.body).dump().find("config.experiment") != std::string::npos);
  CHECK(request(port, http::verb::post, "/sessions", "{oops").status == 400);
}

TEST_CASE_FIXTURE(ServerFixture, "wire protocol over a websocket") {
  std::string id = json::parse(request(port, http::verb::post, "/sessions", kConfig).body)["id"];
  Client c(port, id);
  json hello = c.read();
  CHECK(hello["type"] == "notice");
  CHECK(hello["status"]["status"] == "intro");

  c.send({{"type", "input"}, {"x", 0.1}});
  CHECK(c.read()["type"] == "notice");

  c.send({{"type", "start"}});
  json start = c.read();
  CHECK(start["type"] == "trialStart");
  CHECK(start["index"] == 0);
  CHECK(start["total"] == 20);

  c.send({{"type", "input"}, {"x", 0.25}, {"t", 12.5}});
  c.send({{"type", "tick"}, {"n", 3}});
  for (int i = 0; i < 3; ++i) {
    json f = c.read();
    CHECK(f["type"] == "frame");
    CHECK(f["sample"] == i);
    CHECK(f["display"].is_number());
  }
  c.send({{"type", "tick"}, {"n", 8}});
  auto rest = c.read_until("trialEnd");
  CHECK(rest.size() == 9);
  CHECK(c.read()["type"] == "trialStart");

  // Play the remaining trials with the cursor moving so the conjecture
  // estimate has a defined denominator.
  double x = 0.25;
  for (int k = 1; k < 20; ++k) {
    for (int t = 0; t < 11; ++t) {
      x += 0.001;
      c.send({{"type", "input"}, {"x", x}});
      c.send({{"type", "tick"}, {"n", 1}});
      CHECK(c.read()["type"] == "frame");
    }
    CHECK(c.read()["type"] == "trialEnd");
    json next = c.read();
    if (k < 19) CHECK(next["type"] == "trialStart");
    else CHECK(next["type"] == "surveyPrompt");
  }
  c.send({{"type", "survey"}, {"items", {1, 2, 3, 4, 5, 6}}, {"feedback", "ok"}});
  CHECK(c.read()["type"] == "experimentEnd");

  json st = json::parse(request(port, http::verb::get, "/sessions/" + id).body);
  CHECK(st["status"] == "done");
  CHECK(st["trials_completed"] == 20);

  // The log served over HTTP matches the file in the data directory and
  // replays to the same records.
  std::string log = request(port, http::verb::get, "/sessions/" + id + "/log").body;
  std::ifstream f(dir / (id + ".ndjson"));
  std::stringstream file;
  file << f.rdbuf();
  CHECK(file.str() == log);
  char* records = nullptr;
  REQUIRE(coadapt_replay(log.c_str(), &records) == COADAPT_OK);
  std::string ndjson(records);
  coadapt_string_free(records);
  int lines = 0;
  for (char ch : ndjson) lines += ch == '\n';
  CHECK(lines == 22);  // run header, 20 trials, trace
}

TEST_CASE_FIXTURE(ServerFixture, "manual ticks are refused by a wall-clock server") {
  json opts = {{"port", 0}, {"manual_clock", false}};
  coadapt_server* wall = nullptr;
  unsigned short wall_port = 0;
  REQUIRE(coadapt_server_start(opts.dump().c_str(), &wall, &wall_port) == COADAPT_OK);
  {
    std::string id =
        json::parse(request(wall_port, http::verb::post, "/sessions", kConfig).body)["id"];
    Client c(wall_port, id);
    c.read();
    c.send({{"type", "tick"}, {"n", 1}});
    json e = c.read();
    CHECK(e["type"] == "error");
    CHECK(e["code"] == "invalid-argument");
  }
  coadapt_server_stop(wall);
}
