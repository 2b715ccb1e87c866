#include "doctest.h"

#include <chrono>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "flexinst/console_bridge.hpp"
#include "flexinst/protocol.hpp"
#include "json.hpp"

using namespace flexinst;
using nlohmann::json;
namespace asio = boost::asio;
namespace beast = boost::beast;
namespace ws = beast::websocket;
using tcp = asio::ip::tcp;
using namespace std::chrono_literals;

namespace {

template <typename Pred>
bool wait_for(Pred pred, std::chrono::milliseconds limit = 2000ms) {
  const auto end = std::chrono::steady_clock::now() + limit;
  while (!pred()) {
    if (std::chrono::steady_clock::now() > end) return false;
    std::this_thread::sleep_for(1ms);
  }
  return true;
}

class Client {
 public:
  explicit Client(unsigned short port) : ws_(io_) {
    tcp::resolver resolver(io_);
    asio::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/");
    ws_.text(true);
  }

  void send(const std::string& text) { ws_.write(asio::buffer(text)); }
  void send(const json& j) { send(j.dump()); }

  json read() {
    beast::flat_buffer buf;
    ws_.read(buf);
    return json::parse(beast::buffers_to_string(buf.data()));
  }

  /// Next message whose type is `type`; state messages on the way are kept.
  json read_type(const std::string& type) {
    while (true) {
      json j = read();
      if (j.at("type") == type) return j;
      if (j.at("type") == "state") states.push_back(j);
    }
  }

  void read_states_until(std::uint64_t tick) {
    while (states.empty() || states.back().at("tick").get<std::uint64_t>() < tick) {
      json j = read();
      if (j.at("type") == "state") states.push_back(j);
    }
  }

  void hello() {
    send(json{{"type", "hello"}, {"client", "test"}});
    CHECK(read_type("welcome").at("protocol") == protocol::kVersion);
  }

  void drop() {
    beast::error_code ec;
    ws_.next_layer().shutdown(tcp::socket::shutdown_both, ec);
    ws_.next_layer().close(ec);
  }

  std::vector<json> states;

 private:
  asio::io_context io_;
  ws::stream<tcp::socket> ws_;
};

json axes(double ry, double tz = 0.0, int buttons = 0) {
  return {{"type", "axes"}, {"tx", 0.0}, {"ty", 0.0}, {"tz", tz},
          {"rx", 0.0},      {"ry", ry},  {"rz", 0.0}, {"buttons", buttons}};
}

SystemConfig test_config(bool fault_inject) {
  SystemConfig cfg;
  cfg.bridge.port = 0;
  cfg.bridge.allow_fault_inject = fault_inject;
  return cfg;
}

struct Backend {
  explicit Backend(bool fault_inject = false) : cfg(test_config(fault_inject)) { loop.initialize(); }

  TelemetryRecord tick() {
    last = loop.tick();
    bridge.publish(last);
    return last;
  }
  void pump(int n) {
    for (int i = 0; i < n; ++i) tick();
  }
  /// Waits until the bridge has handled `n` more messages than before.
  void settle(std::uint64_t before, std::uint64_t n) {
    REQUIRE(wait_for([&] {
      return bridge.messages_accepted() + bridge.messages_rejected() >= before + n;
    }));
  }
  std::uint64_t handled() const { return bridge.messages_accepted() + bridge.messages_rejected(); }

  SystemConfig cfg;
  ConsoleInputSource input;
  TeleopLoop loop{cfg, input};
  ConsoleBridge bridge{cfg.bridge, input, cfg.pipeline.raw_range, cfg.fsm.rate_hz};
  TelemetryRecord last;
};

}  // namespace

TEST_CASE("scripted console session bends the instrument") {
  Backend be;
  Client c(be.bridge.port());
  REQUIRE(wait_for([&] { return be.bridge.session_active(); }));
  c.hello();

  auto h = be.handled();
  c.send(json{{"type", "enable"}});
  be.settle(h, 1);
  CHECK(be.tick().mode == Mode::Teleop);

  h = be.handled();
  c.send(axes(0.5));
  be.settle(h, 1);
  const std::uint64_t start = be.last.tick;
  be.pump(200);
  c.read_states_until(be.last.tick - be.last.tick % 5);

  std::vector<double> q1;
  for (const auto& s : c.states) {
    if (s.at("tick").get<std::uint64_t>() > start) q1.push_back(s.at("q1").get<double>());
  }
  REQUIRE(q1.size() >= 38);
  for (std::size_t i = 3; i < q1.size(); ++i) CHECK(q1[i] > q1[i - 1]);
  CHECK(q1.back() > 20.0);

  // Spring return: axes back to neutral, bend rate decays to zero.
  h = be.handled();
  c.send(axes(0.0));
  be.settle(h, 1);
  be.pump(100);
  c.states.clear();
  c.read_states_until(be.last.tick - be.last.tick % 5);
  const double a = c.states[c.states.size() - 5].at("q1").get<double>();
  const double b = c.states.back().at("q1").get<double>();
  CHECK(a == b);
  CHECK(be.last.command.is_zero());
  CHECK(be.last.mode == Mode::Teleop);
  CHECK(c.states.back().at("mode") == "TELEOP");
}

TEST_CASE("session drop in TELEOP faults within one tick") {
  Backend be;
  auto c = std::make_unique<Client>(be.bridge.port());
  c->hello();
  auto h = be.handled();
  c->send(json{{"type", "enable"}});
  c->send(axes(0.0, 0.8));
  be.settle(h, 2);
  be.pump(20);
  REQUIRE(be.last.mode == Mode::Teleop);
  REQUIRE_FALSE(be.last.command.is_zero());

  c->drop();
  REQUIRE(wait_for([&] { return !be.bridge.session_active(); }));
  const TelemetryRecord r = be.tick();
  CHECK(r.mode == Mode::Fault);
  CHECK(r.fault == FaultCause::InputLost);
  CHECK(r.command.is_zero());
  for (int v : r.motor_speeds) CHECK(v == 0);

  SUBCASE("a new session can reset the fault") {
    Client again(be.bridge.port());
    again.hello();
    h = be.handled();
    again.send(json{{"type", "reset"}});
    be.settle(h, 1);
    be.pump(2);
    CHECK(be.last.mode == Mode::Idle);
  }
}

TEST_CASE("drop while idle does not fault") {
  Backend be;
  {
    Client c(be.bridge.port());
    c.hello();
    c.drop();
  }
  REQUIRE(wait_for([&] { return !be.bridge.session_active(); }));
  CHECK(be.tick().mode == Mode::Idle);
}

TEST_CASE("malformed messages are rejected without a state change") {
  Backend be;
  Client c(be.bridge.port());

  c.send(json{{"type", "enable"}});
  CHECK(c.read_type("error").at("reason").get<std::string>().find("hello") != std::string::npos);
  c.hello();
  be.pump(3);
  const Mode before = be.last.mode;
  const auto rejected = be.bridge.messages_rejected();
  for (const char* bad : {"{not json", R"({"type":"axes","ry":7})", R"({"type":"warp"})",
                          R"({"type":"faultInject","fault":"busTimeout"})", R"({"type":"hello"})"}) {
    c.send(std::string(bad));
    CHECK(c.read_type("error").contains("reason"));
  }
  CHECK(be.bridge.messages_rejected() == rejected + 5);
  be.pump(3);
  CHECK(be.last.mode == before);
  CHECK(be.last.events == 0);
  CHECK(be.last.raw == RawAxes{});
  CHECK(be.bridge.session_active());
}

TEST_CASE("second operator is turned away") {
  Backend be;
  Client first(be.bridge.port());
  first.hello();
  Client second(be.bridge.port());
  CHECK(second.read().at("type") == "busy");
  const auto h = be.handled();
  first.send(json{{"type", "enable"}});
  be.settle(h, 1);
  be.pump(1);
  CHECK(be.last.mode == Mode::Teleop);
  CHECK(be.bridge.session_active());
}

TEST_CASE("fault injection over the wire when enabled") {
  Backend be(true);
  Client c(be.bridge.port());
  c.hello();
  auto h = be.handled();
  c.send(json{{"type", "enable"}});
  be.settle(h, 1);
  be.pump(5);
  h = be.handled();
  c.send(json{{"type", "faultInject"}, {"fault", "busTimeout"}});
  be.settle(h, 1);
  const TelemetryRecord r = be.tick();
  CHECK(r.mode == Mode::Fault);
  CHECK(r.fault == FaultCause::BusTimeout);
  be.pump(5);
  c.read_states_until(be.last.tick - be.last.tick % 5);
  CHECK(c.states.back().at("faults") == json::array({"BUS_TIMEOUT"}));
}

TEST_CASE("snapshots are decimated") {
  Backend be;
  Client c(be.bridge.port());
  c.hello();
  be.pump(52);
  c.read_states_until(50);
  for (const auto& s : c.states) CHECK(s.at("tick").get<std::uint64_t>() % 5 == 0);
  CHECK(c.states.size() == 10);
}

TEST_CASE("bind failures surface at startup") {
  Backend be;
  BridgeConfig taken = be.cfg.bridge;
  taken.port = be.bridge.port();
  ConsoleInputSource other;
  CHECK_THROWS_AS(ConsoleBridge(taken, other, 350, 100.0), std::runtime_error);
  BridgeConfig bad;
  bad.bind_address = "not-an-address";
  bad.port = 0;
  CHECK_THROWS_AS(ConsoleBridge(bad, other, 350, 100.0), std::runtime_error);
}
