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

#include "vsasrl/server.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include "vsasrl/session.hpp"

namespace vsasrl {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using nlohmann::json;

json hello_message(const SimConfig& cfg) {
  const Rect& a = cfg.workspace.cooperative_region;
  const Rect& h = cfg.workspace.human_region;
  return {{"type", "hello"},
          {"protocol", 1},
          {"dt", cfg.observer.dt},
          {"stream_hz", cfg.session.stream_hz},
          {"link_mm", {cfg.arm.length(0) * 1e3, cfg.arm.length(1) * 1e3}},
          {"cooperative_region_mm", {a.x_min, a.x_max, a.y_min, a.y_max}},
          {"human_region_mm", {h.x_min, h.x_max, h.y_min, h.y_max}},
          {"speed_scale_range", {kMinSpeedScale, kMaxSpeedScale}}};
}

namespace {

using Message = std::shared_ptr<const std::string>;

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  using Inbox = std::function<void(std::uint64_t, Command, json)>;
  using Closed = std::function<void(std::uint64_t)>;

  Connection(tcp::socket socket, std::uint64_t id, std::size_t max_queue, Inbox inbox, Closed closed)
      : ws_(std::move(socket)), id_(id), max_queue_(max_queue), inbox_(std::move(inbox)), closed_(std::move(closed)) {}

  void run(Message hello) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this(), hello](beast::error_code ec) {
      if (ec) return self->fail("accept", ec);
      self->open_ = true;
      self->send(hello);
      self->read();
    });
  }

  void send(Message m) {
    if (!open_) return;
    if (queue_.size() >= max_queue_) queue_.pop_front();  // slow client: drop the stalest
    queue_.push_back(std::move(m));
    if (!writing_) write();
  }

  void close() {
    if (!open_) return;
    open_ = false;
    ws_.async_close(websocket::close_code::going_away, [self = shared_from_this()](beast::error_code) {});
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->fail("read", ec);
      self->on_message(beast::buffers_to_string(self->buffer_.data()));
      self->buffer_.consume(self->buffer_.size());
      self->read();
    });
  }

  void on_message(const std::string& text) {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error&) {
      send(std::make_shared<const std::string>(error_reply("message is not valid JSON").dump()));
      return;
    }
    try {
      Command cmd = parse_command(j);
      inbox_(id_, std::move(cmd), j.is_object() ? j.value("id", json()) : json());
    } catch (const Error& e) {
      json r = error_reply(e.what(), j);
      if (j.is_object() && j.contains("id")) r["id"] = j["id"];
      send(std::make_shared<const std::string>(r.dump()));
    }
  }

  void write() {
    if (queue_.empty() || !open_) {
      writing_ = false;
      return;
    }
    writing_ = true;
    Message m = queue_.front();
    queue_.pop_front();
    ws_.text(true);
    ws_.async_write(net::buffer(*m), [self = shared_from_this(), m](beast::error_code ec, std::size_t) {
      if (ec) return self->fail("write", ec);
      self->write();
    });
  }

  void fail(const char* what, beast::error_code ec) {
    if (ec != websocket::error::closed && ec != net::error::operation_aborted)
      spdlog::debug("client {}: {}: {}", id_, what, ec.message());
    open_ = false;
    writing_ = false;
    queue_.clear();
    if (closed_) std::exchange(closed_, nullptr)(id_);
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::uint64_t id_;
  std::size_t max_queue_;
  Inbox inbox_;
  Closed closed_;
  std::deque<Message> queue_;
  bool writing_ = false;
  bool open_ = false;
};

}  // namespace

struct SessionServer::Impl {
  SimConfig cfg;
  ServerOptions options;
  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  std::optional<net::signal_set> signals;
  std::thread io_thread, sim_thread;
  std::atomic<bool> running{false};
  std::atomic<std::uint64_t> ticks{0};
  std::atomic<std::size_t> client_count{0};
  unsigned short port = 0;

  // Network thread only.
  std::map<std::uint64_t, std::shared_ptr<Connection>> connections;
  std::uint64_t next_id = 1;
  Message hello;

  // Network -> simulation.
  std::mutex inbox_mutex;
  struct Inbound {
    std::uint64_t from;
    Command command;
    json request_id;
  };
  std::deque<Inbound> inbox;

  // Stop notification.
  std::mutex stop_mutex;
  std::condition_variable stop_cv;
  bool stopped = false;
  bool stop_requested = false;

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      const std::uint64_t id = next_id++;
      auto c = std::make_shared<Connection>(
          std::move(socket), id, options.max_queued_messages,
          [this](std::uint64_t from, Command cmd, json request_id) {
            std::lock_guard lock(inbox_mutex);
            inbox.push_back({from, std::move(cmd), std::move(request_id)});
          },
          [this](std::uint64_t gone) {
            connections.erase(gone);
            client_count = connections.size();
            spdlog::info("client {} disconnected", gone);
          });
      connections.emplace(id, c);
      client_count = connections.size();
      spdlog::info("client {} connected", id);
      c->run(hello);
      accept();
    });
  }

  void simulate() {
    using clock = std::chrono::steady_clock;
    Session session(cfg);
    const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(cfg.observer.dt));
    auto origin = clock::now();
    std::int64_t n = 0;
    while (running) {
      {
        std::lock_guard lock(inbox_mutex);
        for (auto& in : inbox) session.submit(std::move(in.command), in.from, std::move(in.request_id));
        inbox.clear();
      }
      const bool due = session.tick();
      for (auto& r : session.take_replies())
        net::post(ioc, [this, to = r.origin, m = std::make_shared<const std::string>(r.body.dump())] {
          if (auto it = connections.find(to); it != connections.end()) it->second->send(m);
        });
      if (due) {
        auto m = std::make_shared<const std::string>(to_json(session.state()).dump());
        net::post(ioc, [this, m] {
          for (auto& [id, c] : connections) c->send(m);
        });
      }
      session.clear_trace();
      ticks = session.ticks();
      // Absolute schedule: sleeping to origin + n * dt never accumulates drift.
      // After a stall longer than 100 ms the schedule restarts instead of
      // bursting to catch up.
      ++n;
      auto target = origin + n * period;
      const auto now = clock::now();
      if (now - target > std::chrono::milliseconds(100)) {
        origin = now - n * period;
        target = now;
      }
      std::this_thread::sleep_until(target);
    }
  }

  void shutdown_network() {
    beast::error_code ec;
    acceptor.close(ec);
    if (signals) signals->cancel(ec);
    for (auto& [id, c] : connections) c->close();
    // Give close handshakes a moment, then stop regardless of peers.
    auto timer = std::make_shared<net::steady_timer>(ioc, std::chrono::milliseconds(200));
    timer->async_wait([this, timer](beast::error_code) { ioc.stop(); });
  }

  void request_stop() {
    {
      std::lock_guard lock(stop_mutex);
      stop_requested = true;
    }
    stop_cv.notify_all();
  }
};

SessionServer::SessionServer(SimConfig cfg, ServerOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->cfg = std::move(cfg);
  impl_->options = std::move(options);
}

SessionServer::~SessionServer() { stop(); }

void SessionServer::start() {
  Impl& m = *impl_;
  if (m.running) return;
  beast::error_code ec;
  const auto address = net::ip::make_address(m.options.address, ec);
  if (ec) throw Error("serve: bad address '" + m.options.address + "': " + ec.message());
  const tcp::endpoint ep{address, m.options.port};
  m.acceptor.open(ep.protocol(), ec);
  if (!ec) m.acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) m.acceptor.bind(ep, ec);
  if (!ec) m.acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) throw Error("serve: cannot listen on " + m.options.address + ":" + std::to_string(m.options.port) + ": " +
                      ec.message());
  m.port = m.acceptor.local_endpoint().port();
  m.hello = std::make_shared<const std::string>(hello_message(m.cfg).dump());
  if (m.options.handle_signals) {
    m.signals.emplace(m.ioc, SIGINT, SIGTERM);
    m.signals->async_wait([this](beast::error_code ec, int sig) {
      if (ec) return;
      spdlog::info("signal {}: stopping", sig);
      impl_->request_stop();
    });
  }
  m.running = true;
  m.stopped = false;
  m.stop_requested = false;
  m.accept();
  m.io_thread = std::thread([&m] { m.ioc.run(); });
  m.sim_thread = std::thread([&m] {
    try {
      m.simulate();
    } catch (const std::exception& e) {
      spdlog::error("simulation stopped: {}", e.what());
      m.request_stop();
    }
  });
  spdlog::info("serving on ws://{}:{}", m.options.address, m.port);
}

unsigned short SessionServer::port() const { return impl_->port; }

void SessionServer::stop() {
  Impl& m = *impl_;
  if (!m.running.exchange(false)) return;
  if (m.sim_thread.joinable()) m.sim_thread.join();
  net::post(m.ioc, [&m] { m.shutdown_network(); });
  if (m.io_thread.joinable()) m.io_thread.join();
  {
    std::lock_guard lock(m.stop_mutex);
    m.stopped = true;
    m.stop_requested = true;
  }
  m.stop_cv.notify_all();
}

void SessionServer::wait() {
  {
    std::unique_lock lock(impl_->stop_mutex);
    impl_->stop_cv.wait(lock, [this] { return impl_->stop_requested; });
  }
  stop();
}

bool SessionServer::wait_for(double seconds) {
  {
    std::unique_lock lock(impl_->stop_mutex);
    if (!impl_->stop_cv.wait_for(lock, std::chrono::duration<double>(seconds),
                                 [this] { return impl_->stop_requested; }))
      return false;
  }
  stop();
  return true;
}

std::uint64_t SessionServer::ticks() const { return impl_->ticks; }
std::size_t SessionServer::clients() const { return impl_->client_count; }

}  // namespace vsasrl
