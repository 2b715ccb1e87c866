#include "flexinst/console_bridge.hpp"

#include <atomic>
#include <deque>
#include <string>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "flexinst/errors.hpp"
#include "flexinst/protocol.hpp"

namespace flexinst {
namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace ws = beast::websocket;
using tcp = asio::ip::tcp;

constexpr std::size_t kMaxQueuedWrites = 64;
constexpr std::size_t kMaxMessageBytes = 64 * 1024;

}  // namespace

struct ConsoleBridge::Impl : std::enable_shared_from_this<ConsoleBridge::Impl> {
  class Session;

  BridgeConfig cfg;
  ConsoleInputSource& input;
  int raw_range;
  double rate_hz;
  asio::io_context io;
  tcp::acceptor acceptor{io};
  std::thread thread;
  std::shared_ptr<Session> active;
  std::vector<std::weak_ptr<Session>> sessions;
  std::atomic<bool> has_session{false};
  std::atomic<std::uint64_t> accepted{0};
  std::atomic<std::uint64_t> rejected{0};
  std::atomic<bool> stopped{false};

  Impl(const BridgeConfig& c, ConsoleInputSource& in, int range, double rate)
      : cfg(c), input(in), raw_range(range), rate_hz(rate) {}

  class Session : public std::enable_shared_from_this<Session> {
   public:
    Session(std::shared_ptr<Impl> owner, tcp::socket socket, bool primary)
        : owner_(std::move(owner)), ws_(std::move(socket)), primary_(primary) {}

    void start() {
      ws_.read_message_max(kMaxMessageBytes);
      ws_.async_accept([self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
    }

    void send(std::string text) {
      if (closing_) return;
      if (queue_.size() >= kMaxQueuedWrites) queue_.pop_front();
      queue_.push_back(std::move(text));
      if (queue_.size() == 1 && !writing_) write_next();
    }

    void close() {
      if (closing_) return;
      closing_ = true;
      beast::error_code ec;
      beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ec);
      beast::get_lowest_layer(ws_).socket().close(ec);
    }

   private:
    void on_accept(beast::error_code ec) {
      if (ec) return finish();
      ws_.text(true);
      if (!primary_) {
        queue_.push_back(protocol::encode_busy());
        closing_after_write_ = true;
        write_next();
        return;
      }
      read_next();
    }

    void read_next() {
      ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
        self->on_read(ec);
      });
    }

    void on_read(beast::error_code ec) {
      if (ec) return finish();
      const std::string text = beast::buffers_to_string(buffer_.data());
      buffer_.consume(buffer_.size());
      handle(text);
      if (!closing_) read_next();
    }

    void reject(std::string_view reason) {
      ++owner_->rejected;
      send(protocol::encode_error(reason));
    }

    void handle(const std::string& text) {
      protocol::ClientMessage msg;
      try {
        msg = protocol::parse_client_message(text);
      } catch (const ProtocolError& e) {
        return reject(e.what());
      }
      if (!greeted_ && !std::holds_alternative<protocol::Hello>(msg)) {
        return reject("hello required before other messages");
      }
      ConsoleInputSource& input = owner_->input;
      if (std::holds_alternative<protocol::Hello>(msg)) {
        if (greeted_) return reject("duplicate hello");
        greeted_ = true;
        const double snapshot_hz = owner_->rate_hz / owner_->cfg.snapshot_decimation;
        send(protocol::encode_welcome(owner_->rate_hz, snapshot_hz, owner_->cfg.allow_fault_inject));
      } else if (const auto* axes = std::get_if<protocol::Axes>(&msg)) {
        input.submit_axes(protocol::to_raw_axes(*axes, owner_->raw_range));
      } else if (const auto* cmd = std::get_if<protocol::Command>(&msg)) {
        input.post_events(protocol::to_events(*cmd));
      } else if (const auto* inj = std::get_if<protocol::FaultInject>(&msg)) {
        if (!owner_->cfg.allow_fault_inject) return reject("faultInject is disabled");
        input.post_events(protocol::to_events(inj->fault));
      }
      ++owner_->accepted;
    }

    void write_next() {
      writing_ = true;
      ws_.async_write(asio::buffer(queue_.front()),
                      [self = shared_from_this()](beast::error_code ec, std::size_t) {
                        self->on_write(ec);
                      });
    }

    void on_write(beast::error_code ec) {
      writing_ = false;
      if (ec) return finish();
      queue_.pop_front();
      if (!queue_.empty()) return write_next();
      if (closing_after_write_) {
        ws_.async_close(ws::close_code::try_again_later,
                        [self = shared_from_this()](beast::error_code) { self->finish(); });
      }
    }

    void finish() {
      if (finished_) return;
      finished_ = true;
      close();
      if (primary_) owner_->session_ended(this);
    }

    std::shared_ptr<Impl> owner_;
    ws::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    std::deque<std::string> queue_;
    bool primary_;
    bool greeted_ = false;
    bool writing_ = false;
    bool closing_ = false;
    bool closing_after_write_ = false;
    bool finished_ = false;
  };

  void listen() {
    beast::error_code ec;
    const auto address = asio::ip::make_address(cfg.bind_address, ec);
    if (ec) throw std::runtime_error("console bridge: bad bind address '" + cfg.bind_address + "'");
    const tcp::endpoint endpoint(address, cfg.port);
    acceptor.open(endpoint.protocol(), ec);
    if (!ec) acceptor.set_option(asio::socket_base::reuse_address(true), ec);
    if (!ec) acceptor.bind(endpoint, ec);
    if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
    if (ec) {
      throw std::runtime_error("console bridge: cannot listen on " + cfg.bind_address + ":" +
                               std::to_string(cfg.port) + ": " + ec.message());
    }
  }

  void accept_next() {
    acceptor.async_accept([self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      const bool primary = !self->active;
      auto session = std::make_shared<Session>(self, std::move(socket), primary);
      std::erase_if(self->sessions, [](const auto& w) { return w.expired(); });
      self->sessions.push_back(session);
      if (primary) {
        self->active = session;
        self->has_session = true;
      }
      session->start();
      self->accept_next();
    });
  }

  void session_ended(Session* s) {
    if (active.get() != s) return;
    active.reset();
    has_session = false;
    if (!stopped) input.session_lost();
  }

  void shutdown() {
    if (stopped.exchange(true)) return;
    asio::post(io, [self = shared_from_this()] {
      beast::error_code ec;
      self->acceptor.close(ec);
      for (const auto& w : self->sessions) {
        if (auto s = w.lock()) s->close();
      }
      self->sessions.clear();
      self->active.reset();
      self->has_session = false;
    });
    if (thread.joinable()) thread.join();
  }
};

ConsoleBridge::ConsoleBridge(const BridgeConfig& cfg, ConsoleInputSource& input, int raw_range,
                             double loop_rate_hz)
    : impl_(std::make_shared<Impl>(cfg, input, raw_range, loop_rate_hz)) {
  if (cfg.snapshot_decimation < 1) throw DomainError("snapshot decimation must be >= 1");
  impl_->listen();
  impl_->accept_next();
  impl_->thread = std::thread([impl = impl_] { impl->io.run(); });
}

ConsoleBridge::~ConsoleBridge() { stop(); }

void ConsoleBridge::stop() { impl_->shutdown(); }

unsigned short ConsoleBridge::port() const noexcept {
  beast::error_code ec;
  const auto ep = impl_->acceptor.local_endpoint(ec);
  return ec ? 0 : ep.port();
}

void ConsoleBridge::publish(const TelemetryRecord& rec) {
  if (impl_->stopped || !impl_->has_session) return;
  if (rec.tick % static_cast<std::uint64_t>(impl_->cfg.snapshot_decimation) != 0) return;
  asio::post(impl_->io, [impl = impl_, text = protocol::encode_state(protocol::snapshot_of(rec))]() mutable {
    if (impl->active) impl->active->send(std::move(text));
  });
}

bool ConsoleBridge::session_active() const noexcept { return impl_->has_session; }
std::uint64_t ConsoleBridge::messages_accepted() const noexcept { return impl_->accepted; }
std::uint64_t ConsoleBridge::messages_rejected() const noexcept { return impl_->rejected; }

}  // namespace flexinst
