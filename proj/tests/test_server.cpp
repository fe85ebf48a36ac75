// Copyright 2026 The vsasrl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <chrono>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <gtest/gtest.h>

#include "vsasrl/server.hpp"
#include "vsasrl/session.hpp"

namespace vsasrl {
namespace {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using nlohmann::json;

class Client {
 public:
  explicit Client(unsigned short port) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    net::connect(beast::get_lowest_layer(ws_), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/");
  }

  json read() {
    beast::flat_buffer buf;
    ws_.read(buf);
    return json::parse(beast::buffers_to_string(buf.data()));
  }

  /// Next message whose type is not "state".
  json read_reply() {
    for (;;) {
      json j = read();
      if (j["type"] != "state") return j;
    }
  }

  void send(const std::string& text) { ws_.write(net::buffer(text)); }
  void send(const json& j) { send(j.dump()); }
  void close() { ws_.close(websocket::close_code::normal); }
  tcp::socket& socket() { return beast::get_lowest_layer(ws_); }

 private:
  net::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

class Served : public testing::Test {
 protected:
  void SetUp() override {
    server_ = std::make_unique<SessionServer>(SimConfig{});
    server_->start();
    ASSERT_NE(server_->port(), 0);
  }
  void TearDown() override { server_->stop(); }
  std::unique_ptr<SessionServer> server_;
};

TEST_F(Served, HelloThenSchemaValidStates) {
  Client c(server_->port());
  const json hello = c.read();
  EXPECT_EQ(hello["type"], "hello");
  EXPECT_EQ(hello["protocol"], 1);
  EXPECT_EQ(hello["stream_hz"], 50.0);
  double last_t = -1.0;
  std::uint64_t last_seq = 0;
  for (int i = 0; i < 10; ++i) {
    const json s = c.read();
    const auto v = state_message_violations(s);
    ASSERT_TRUE(v.empty()) << v.front();
    EXPECT_GE(s["t"].get<double>(), last_t);
    EXPECT_GT(s["seq"].get<std::uint64_t>(), last_seq);
    last_t = s["t"];
    last_seq = s["seq"];
  }
}

TEST_F(Served, StreamAndClockFollowWallTime) {
  Client c(server_->port());
  c.read();  // hello
  const json first = c.read();
  const auto t0 = std::chrono::steady_clock::now();
  int count = 0;
  json last;
  while (std::chrono::steady_clock::now() - t0 < std::chrono::seconds(1)) {
    last = c.read();
    ++count;
  }
  // 50 Hz nominal; generous bounds for loaded machines.
  EXPECT_GE(count, 35);
  EXPECT_LE(count, 65);
  const double sim = last["t"].get<double>() - first["t"].get<double>();
  EXPECT_GT(sim, 0.7);
  EXPECT_LT(sim, 1.3);
}

TEST_F(Served, ButtonAcknowledgedAndStateFollows) {
  Client c(server_->port());
  c.read();
  c.send(json{{"type", "button"}, {"button", "B1"}, {"value", "on"}});
  const json ack = c.read_reply();
  EXPECT_EQ(ack["type"], "ack");
  EXPECT_EQ(ack["command"], "button");
  EXPECT_EQ(ack["accepted"], true);
  EXPECT_EQ(ack["fsm_state"], "S2");
  const json s = c.read();
  EXPECT_EQ(s["fsm_state"], "S2");
  EXPECT_EQ(s["in_transit"], true);
  EXPECT_EQ(s["stiffness"], "low");
}

TEST_F(Served, MalformedCommandsGetErrorsAndSessionContinues) {
  Client c(server_->port());
  c.read();
  c.send(std::string("{not json"));
  EXPECT_EQ(c.read_reply()["type"], "error");
  c.send(json{{"type", "self_destruct"}});
  const json e = c.read_reply();
  EXPECT_EQ(e["type"], "error");
  EXPECT_EQ(e["request"]["type"], "self_destruct");
  c.send(json{{"type", "push"}, {"force_N", {0, 100}}, {"duration_s", 1}});
  EXPECT_EQ(c.read_reply()["type"], "error");
  c.send(json{{"type", "set_target"}, {"x_mm", -200}, {"y_mm", 640}});  // not in S3
  const json late = c.read_reply();
  EXPECT_EQ(late["type"], "error");
  EXPECT_EQ(late["request"]["type"], "set_target");
  c.send(json{{"type", "pause"}});
  EXPECT_EQ(c.read_reply()["type"], "ack");
  const json s = c.read();
  EXPECT_TRUE(state_message_violations(s).empty());
  EXPECT_EQ(s["paused"], true);
}

TEST_F(Served, RequestIdsAreEchoed) {
  Client c(server_->port());
  c.read();
  c.send(json{{"type", "pause"}, {"id", 41}});
  const json ack = c.read_reply();
  EXPECT_EQ(ack["type"], "ack");
  EXPECT_EQ(ack["id"], 41);
  c.send(json{{"type", "set_speed_scale"}, {"scale", 9}, {"id", "too-fast"}});
  const json bad = c.read_reply();
  EXPECT_EQ(bad["type"], "error");
  EXPECT_EQ(bad["id"], "too-fast");
  c.send(json{{"type", "set_target"}, {"x_mm", -200}, {"y_mm", 640}, {"id", 7}});
  const json late = c.read_reply();
  EXPECT_EQ(late["type"], "error");
  EXPECT_EQ(late["id"], 7);
  c.send(json{{"type", "resume"}});
  EXPECT_FALSE(c.read_reply().contains("id"));
}

TEST_F(Served, RepliesGoOnlyToTheSender) {
  Client a(server_->port()), b(server_->port());
  a.read();
  b.read();
  a.send(json{{"type", "set_speed_scale"}, {"scale", 0.5}});
  EXPECT_EQ(a.read_reply()["command"], "set_speed_scale");
  // b sees only state messages over the next few frames, which carry the
  // new scale once applied.
  for (int i = 0; i < 5; ++i) {
    const json m = b.read();
    ASSERT_EQ(m["type"], "state");
    if (i == 4) EXPECT_EQ(m["speed_scale"], 0.5);
  }
}

TEST_F(Served, SurvivesAbruptDisconnectAndRunsWithoutClients) {
  {
    Client c(server_->port());
    c.read();
    c.send(json{{"type", "button"}, {"button", "B1"}, {"value", true}});
    c.socket().close();  // no close handshake
  }
  const auto before = server_->ticks();
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  EXPECT_GT(server_->ticks(), before + 150);
  EXPECT_EQ(server_->clients(), 0u);
  Client again(server_->port());
  EXPECT_EQ(again.read()["type"], "hello");
  const json s = again.read();
  EXPECT_EQ(s["fsm_state"], "S2");
}

TEST(Server, StopIsIdempotentAndWaitReturns) {
  SessionServer s(SimConfig{});
  s.start();
  EXPECT_FALSE(s.wait_for(0.05));
  std::thread stopper([&] { s.stop(); });
  s.wait();
  stopper.join();
  s.stop();
}

TEST(Server, BusyPortReported) {
  SessionServer a(SimConfig{});
  a.start();
  ServerOptions o;
  o.port = a.port();
  SessionServer b(SimConfig{}, o);
  EXPECT_THROW(b.start(), Error);
}

}  // namespace
}  // namespace vsasrl
