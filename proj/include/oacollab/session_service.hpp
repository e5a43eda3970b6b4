#pragma once

// Live gateway: a WebSocket server on its own io thread plus a tick loop owned by the
// caller of run_session. The two sides exchange data only through posted handlers, the
// input mailbox and a snapshot slot, so a tick never waits on the network.

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "oacollab/config.hpp"
#include "oacollab/metrics.hpp"
#include "oacollab/task_engine.hpp"
#include "oacollab/trial_log.hpp"
#include "oacollab/wire.hpp"

namespace oacollab::service {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = boost::beast::websocket;
using tcp = boost::asio::ip::tcp;

/// Static session facts included in every hello.
struct SessionInfo {
  std::string session_id;
  Mode mode = Mode::individual;
  int trials = 0;
  double dt = 0.001;
  double broadcast_hz = 60.0;
};

class WireServer {
 public:
  WireServer(const Endpoint& endpoint, InputMailbox& mailbox, SessionInfo info)
      : mailbox_(mailbox), info_(std::move(info)), acceptor_(ioc_) {
    beast::error_code ec;
    const auto address = net::ip::make_address(endpoint.address, ec);
    if (ec) throw Error(ErrorCode::BindFailure, "bad bind address '" + endpoint.address + "'");
    const tcp::endpoint ep{address, endpoint.port};
    acceptor_.open(ep.protocol(), ec);
    if (!ec) acceptor_.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) acceptor_.bind(ep, ec);
    if (!ec) acceptor_.listen(net::socket_base::max_listen_connections, ec);
    if (ec) throw Error(ErrorCode::BindFailure, "cannot listen on " + endpoint.address + ":" +
                                                    std::to_string(endpoint.port) + ": " + ec.message());
    port_ = acceptor_.local_endpoint().port();
    snapshot_ = std::make_shared<const Snapshot>();
    do_accept();
    thread_ = std::thread([this] { ioc_.run(); });
  }

  WireServer(const WireServer&) = delete;
  WireServer& operator=(const WireServer&) = delete;

  ~WireServer() { shutdown(std::chrono::milliseconds(0)); }

  unsigned short port() const { return port_; }
  int client_count() const { return clients_.load(); }

  /// State sent as part of hello to newly connected clients.
  void set_snapshot(double t, nlohmann::json state, bool complete) {
    auto s = std::make_shared<const Snapshot>(Snapshot{t, std::move(state), complete});
    std::lock_guard lock(snapshot_mutex_);
    snapshot_ = std::move(s);
  }

  /// Queues a message for every connected client. Never blocks on I/O.
  void broadcast(WireKind kind, double t, nlohmann::json payload) {
    auto shared = std::make_shared<const nlohmann::json>(std::move(payload));
    net::post(ioc_, [this, kind, t, shared] {
      for (const auto& c : connections_) c->send(kind, t, *shared);
    });
  }

  /// Blocks until at least `n` clients are connected or the timeout passes.
  bool wait_for_clients(int n, std::chrono::milliseconds timeout) {
    std::unique_lock lock(wait_mutex_);
    return wait_cv_.wait_for(lock, timeout, [&] { return clients_.load() >= n || stopped_.load(); }) &&
           clients_.load() >= n;
  }

  /// Latest TLX response received from any client.
  std::optional<metrics::TlxResponse> tlx() const {
    std::lock_guard lock(tlx_mutex_);
    return tlx_;
  }

  bool wait_for_tlx(std::chrono::milliseconds timeout) {
    std::unique_lock lock(tlx_mutex_);
    return tlx_cv_.wait_for(lock, timeout, [&] { return tlx_.has_value(); });
  }

  /// Flushes queued messages, closes every connection and joins the io thread.
  void shutdown(std::chrono::milliseconds drain = std::chrono::milliseconds(2000)) {
    if (!thread_.joinable()) return;
    net::post(ioc_, [this] {
      beast::error_code ec;
      acceptor_.close(ec);
      for (const auto& c : connections_) c->close_when_drained();
    });
    {
      std::unique_lock lock(wait_mutex_);
      wait_cv_.wait_for(lock, drain, [&] { return clients_.load() == 0; });
    }
    stopped_ = true;
    wait_cv_.notify_all();
    ioc_.stop();
    thread_.join();
    // Peers that never finished the close handshake get their socket closed under them.
    for (const auto& c : connections_) c->abort();
    connections_.clear();
  }

 private:
  struct Snapshot {
    double t = 0.0;
    nlohmann::json state;
    bool complete = false;
  };

  class Connection : public std::enable_shared_from_this<Connection> {
   public:
    Connection(WireServer& server, tcp::socket socket, std::uint64_t epoch)
        : server_(server), ws_(std::move(socket)), seq_(epoch) {}

    void start() {
      ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
      ws_.async_accept([self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
    }

    void send(WireKind kind, double t, const nlohmann::json& payload) {
      if (closing_) return;
      // A client that stops reading loses display frames, never events.
      if (kind == WireKind::tick_state && queue_.size() >= max_backlog) return;
      WireMessage m{kind, seq_.next(), t, payload};
      queue_.push_back(serialize(m));
      if (!writing_) do_write();
    }

    void abort() {
      beast::error_code ec;
      beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ec);
      beast::get_lowest_layer(ws_).socket().close(ec);
    }

    void close_when_drained() {
      closing_ = true;
      if (!writing_) do_close();
    }

   private:
    static constexpr std::size_t max_backlog = 256;

    void on_accept(beast::error_code ec) {
      if (ec) return;
      ws_.text(true);
      auto snap = server_.snapshot();
      nlohmann::json hello{{"epoch", seq_.epoch()},
                           {"session_id", server_.info_.session_id},
                           {"mode", std::string(to_string(server_.info_.mode))},
                           {"trials", server_.info_.trials},
                           {"dt", server_.info_.dt},
                           {"broadcast_hz", server_.info_.broadcast_hz},
                           {"complete", snap->complete},
                           {"state", snap->state}};
      send(WireKind::hello, snap->t, hello);
      server_.add(shared_from_this());
      do_read();
    }

    void do_read() {
      ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
    }

    void on_read(beast::error_code ec) {
      if (ec) {
        server_.remove(shared_from_this());
        return;
      }
      const std::string text = beast::buffers_to_string(buffer_.data());
      buffer_.consume(buffer_.size());
      try {
        const WireMessage m = parse_message(text);
        if (m.kind == WireKind::input) {
          server_.mailbox_.post(cursor_from_input(m.payload));
        } else if (m.kind == WireKind::tlx_submit) {
          const auto resp = metrics::tlx_from_json(m.payload);
          metrics::tlx_total(resp);  // validates weights and ratings
          server_.store_tlx(resp);
        } else {
          throw Error(ErrorCode::InvalidArgument, "clients may only send input or tlx_submit");
        }
      } catch (const Error& e) {
        send(WireKind::error, server_.snapshot()->t, error_payload(e.code(), e.what()));
      }
      do_read();
    }

    void do_write() {
      writing_ = true;
      ws_.async_write(net::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
        self->on_write(ec);
      });
    }

    void on_write(beast::error_code ec) {
      writing_ = false;
      if (ec) {
        queue_.clear();
        server_.remove(shared_from_this());
        return;
      }
      queue_.pop_front();
      if (!queue_.empty()) {
        do_write();
      } else if (closing_) {
        do_close();
      }
    }

    void do_close() {
      if (close_started_) return;
      close_started_ = true;
      ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
    }

    WireServer& server_;
    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    SeqCounter seq_;
    std::deque<std::string> queue_;
    bool writing_ = false;
    bool closing_ = false;
    bool close_started_ = false;
  };

  std::shared_ptr<const Snapshot> snapshot() const {
    std::lock_guard lock(snapshot_mutex_);
    return snapshot_;
  }

  void store_tlx(const metrics::TlxResponse& r) {
    {
      std::lock_guard lock(tlx_mutex_);
      tlx_ = r;
    }
    tlx_cv_.notify_all();
  }

  void do_accept() {
    acceptor_.async_accept(net::make_strand(ioc_), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<Connection>(*this, std::move(socket), ++epochs_)->start();
      do_accept();
    });
  }

  void add(const std::shared_ptr<Connection>& c) {
    connections_.insert(c);
    {
      std::lock_guard lock(wait_mutex_);
      clients_ = static_cast<int>(connections_.size());
    }
    wait_cv_.notify_all();
  }

  void remove(const std::shared_ptr<Connection>& c) {
    connections_.erase(c);
    {
      std::lock_guard lock(wait_mutex_);
      clients_ = static_cast<int>(connections_.size());
    }
    wait_cv_.notify_all();
  }

  InputMailbox& mailbox_;
  SessionInfo info_;
  net::io_context ioc_{1};
  tcp::acceptor acceptor_;
  unsigned short port_ = 0;
  std::thread thread_;

  // io thread only
  std::set<std::shared_ptr<Connection>> connections_;
  std::uint64_t epochs_ = 0;

  std::atomic<int> clients_{0};
  std::atomic<bool> stopped_{false};
  std::mutex wait_mutex_;
  std::condition_variable wait_cv_;

  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const Snapshot> snapshot_;

  mutable std::mutex tlx_mutex_;
  std::condition_variable tlx_cv_;
  std::optional<metrics::TlxResponse> tlx_;
};

// Session runner ---------------------------------------------------------------

struct RunOptions {
  bool headless = false;  ///< simulated human and no wall-clock pacing
  std::optional<task::HumanForceSource> human;   ///< overrides the human force source
  std::optional<std::vector<TrialSpec>> trials;  ///< overrides the generated trial list
  bool disable_robot = false;
  int wait_for_clients = 0;  ///< clients required before the first tick
  std::chrono::milliseconds client_wait_timeout{10000};
  std::function<void(unsigned short port)> on_listening;
};

struct RunResult {
  metrics::SessionSummary summary;
  std::vector<metrics::TrialRecord> records;
  std::filesystem::path log_path;
  std::filesystem::path summary_path;
};

inline std::filesystem::path trial_log_path(const ServiceConfig& cfg) {
  return cfg.out_dir / (cfg.resolved_session_id() + ".jsonl");
}

inline std::filesystem::path summary_path(const ServiceConfig& cfg) {
  return cfg.out_dir / (cfg.resolved_session_id() + ".summary.json");
}

/// Runs one session end to end: ticks, broadcasts, logs and the summary.
/// Live sessions need an endpoint; headless sessions may run without one.
inline RunResult run_session(const ServiceConfig& cfg, const std::optional<partner::RobotPartnerConfig>& partner,
                             const std::optional<Endpoint>& endpoint, const RunOptions& opt = {}) {
  using clock = std::chrono::steady_clock;
  cfg.validate();
  const bool live = !opt.headless;
  if (live && !endpoint) throw Error(ErrorCode::InvalidArgument, "a live session needs an endpoint");

  std::vector<TrialSpec> trials = opt.trials ? *opt.trials : generate_session(cfg.session);
  SessionConfig session_cfg = cfg.session;
  session_cfg.trials_per_session = static_cast<int>(trials.size());

  std::optional<task::RobotSetup> robot;
  if (partner && !opt.disable_robot) {
    robot = task::RobotSetup{*partner, partner::PersonModel{cfg.person, {}}};
  }
  task::Session session(session_cfg, std::move(trials), {}, robot);

  InputMailbox mailbox;
  const std::string session_id = cfg.resolved_session_id();
  std::unique_ptr<WireServer> server;
  if (endpoint) {
    server = std::make_unique<WireServer>(
        *endpoint, mailbox,
        SessionInfo{session_id, cfg.session.mode, static_cast<int>(session.trials().size()), session.plant().dt,
                    cfg.broadcast_hz});
    server->set_snapshot(session.state().time, tick_state_payload(session), false);
    if (opt.on_listening) opt.on_listening(server->port());
    if (opt.wait_for_clients > 0 && !server->wait_for_clients(opt.wait_for_clients, opt.client_wait_timeout)) {
      throw Error(ErrorCode::ClientDisconnected, "expected clients did not connect");
    }
  }

  task::SimHuman sim(cfg.resolved_human());
  task::HumanForceSource human;
  if (opt.human) {
    human = *opt.human;
  } else if (!live) {
    human = task::sim_human_source(sim);
  } else {
    auto guard = std::make_shared<StaleInputGuard>(cfg.stale_timeout, cfg.stale_decay);
    auto seen = std::make_shared<std::uint64_t>(0);
    human = [&mailbox, guard, seen, mapping = cfg.mapping](const task::Session& s) -> Vec2 {
      const auto sample = mailbox.sample();
      if (sample.version != *seen) {
        *seen = sample.version;
        guard->fresh(s.state().time);
      }
      if (!sample.cursor) return {};
      return guard->scale(s.state().time, s.phase()) * map_cursor_to_force(*sample.cursor, s.state(), mapping);
    };
  }

  if (server) {
    server->broadcast(WireKind::session_start, session.state().time,
                      {{"session_id", session_id},
                       {"mode", std::string(to_string(cfg.session.mode))},
                       {"trials", session.trials().size()},
                       {"seed", cfg.session.seed}});
  }

  const double dt = session.plant().dt;
  std::uint64_t next_frame = 0;
  auto wall0 = clock::now();
  double sim0 = session.state().time;

  while (!session.complete()) {
    if (live) {
      // Between trials, wait for a client before showing the next target.
      if (session.phase() == task::TrialPhase::at_start && server->client_count() == 0) {
        while (server->client_count() == 0) server->wait_for_clients(1, std::chrono::milliseconds(200));
        wall0 = clock::now();
        sim0 = session.state().time;
      }
    }
    if (live && cfg.realtime) {
      const auto due = wall0 + std::chrono::duration_cast<clock::duration>(
                                   std::chrono::duration<double>(session.state().time - sim0 + dt));
      const auto now = clock::now();
      if (due > now) {
        std::this_thread::sleep_until(due);
      } else if (now - due > std::chrono::milliseconds(100)) {
        wall0 = now;  // fell far behind; drop the backlog rather than fast-forward
        sim0 = session.state().time;
      }
    }

    const auto events = session.tick(human(session));
    if (!server) continue;

    const double t = session.state().time;
    const auto frame = static_cast<std::uint64_t>(t * cfg.broadcast_hz);
    if (frame >= next_frame || !events.empty()) {
      auto state = tick_state_payload(session);
      server->set_snapshot(t, state, session.complete());
      for (const auto& e : events) server->broadcast(WireKind::trial_event, e.t, trial_event_payload(e));
      if (frame >= next_frame) {
        server->broadcast(WireKind::tick_state, t, std::move(state));
        next_frame = frame + 1;
      }
    }
  }

  std::filesystem::create_directories(cfg.out_dir);
  RunResult result;
  result.log_path = trial_log_path(cfg);
  result.summary_path = summary_path(cfg);
  result.records = metrics::write_trial_log(result.log_path, session_id, cfg.session.mode, session.completed());

  std::optional<metrics::TlxResponse> tlx;
  if (server) {
    if (live && cfg.tlx_wait > 0.0) {
      server->wait_for_tlx(std::chrono::milliseconds(static_cast<long long>(cfg.tlx_wait * 1000.0)));
    }
    tlx = server->tlx();
  }
  result.summary = metrics::summarize_session(result.records, tlx);
  metrics::write_summary(result.summary_path, result.summary);

  if (server) {
    server->broadcast(WireKind::session_summary, session.state().time, metrics::to_json(result.summary));
    server->shutdown();
  }
  return result;
}

/// Human force source that replays a logged session's per-tick total force.
inline task::HumanForceSource replay_source_from_log(const metrics::TrialLog& log) {
  std::vector<std::vector<Vec2>> forces;
  for (const auto& c : log.trials) {
    std::vector<Vec2> f;
    for (std::size_t k = 1; k < c.outcome.path.size(); ++k) {
      f.push_back(c.outcome.path[k].human_force + c.outcome.path[k].robot_force);
    }
    forces.push_back(std::move(f));
  }
  return task::replay_source(std::move(forces));
}

}  // namespace oacollab::service
