#include "amava/net/gateway.hpp"

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <optional>
#include <deque>
#include <random>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "amava/errors.hpp"
#include "amava/net/codec.hpp"

namespace amava::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

namespace {

std::string new_session_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::uint8_t raw[16];
  for (int i = 0; i < 16; i += 8) {
    const auto v = rng();
    for (int j = 0; j < 8; ++j) raw[i + j] = static_cast<std::uint8_t>(v >> (8 * j));
  }
  return to_hex(raw, sizeof raw);
}

json error_message(const std::string& code, const std::string& message) {
  return {{"kind", "error"}, {"code", code}, {"message", message}};
}

class Connection;

// Audio goes back through the connection's strand so that the order of
// deliver() calls is the order on the wire.
class ConnectionSink : public AudioSink {
 public:
  ConnectionSink(std::weak_ptr<Connection> conn, std::string session_id)
      : conn_(std::move(conn)), session_id_(std::move(session_id)) {}
  void deliver(const AudioClip& clip, const std::string& caption) override;

 private:
  std::weak_ptr<Connection> conn_;
  std::string session_id_;
};

struct Shared {
  GatewayOptions options;
  DepsFactory factory;
  std::shared_ptr<BackgroundExecutor> reaper = std::make_shared<BackgroundExecutor>();
  std::atomic<std::size_t> sessions{0};
};

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, std::shared_ptr<Shared> shared)
      : ws_(std::move(socket)), shared_(std::move(shared)) {}

  ~Connection() { retire(); }

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(32 * 1024 * 1024);
    ws_.async_accept(beast::bind_front_handler(&Connection::on_accept, shared_from_this()));
  }

  // Any thread. Throws once the connection is gone.
  void push(std::string text) {
    if (gone_.load()) throw std::runtime_error("connection closed");
    asio::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text)]() mutable {
      self->enqueue(std::move(text));
    });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) {
      spdlog::debug("websocket handshake failed: {}", ec.message());
      return;
    }
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&Connection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      if (ec != websocket::error::closed) spdlog::debug("session {}: read ended: {}", session_id_, ec.message());
      gone_ = true;
      retire();
      return;
    }
    const bool text = ws_.got_text();
    std::string payload = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    if (!text) {
      send(error_message("bad_message", "binary messages are not supported"));
    } else {
      handle(payload);
    }
    if (!closing_) do_read();
  }

  void handle(const std::string& payload) {
    json msg;
    try {
      msg = json::parse(payload);
    } catch (const json::exception&) {
      send(error_message("bad_message", "message is not valid JSON"));
      return;
    }
    if (!msg.is_object() || !msg.contains("kind") || !msg["kind"].is_string()) {
      send(error_message("bad_message", "message needs a string field \"kind\""));
      return;
    }
    const std::string kind = msg["kind"];
    if (kind == "hello") return on_hello(msg);
    if (!runner_) {
      send(error_message("no_session", "send hello before " + kind));
      close_after_writes(websocket::close_code::policy_error, "hello required");
      return;
    }
    if (kind == "frame") return on_frame(msg);
    if (kind == "status") return on_status();
    if (kind == "bye") {
      retire();
      close_after_writes(websocket::close_code::normal, "bye");
      return;
    }
    send(error_message("bad_message", "unknown message kind '" + kind + "'"));
  }

  void on_hello(const json&) {
    if (runner_) {
      send(error_message("duplicate_hello", "session " + session_id_ + " is already open"));
      return;
    }
    try {
      session_id_ = new_session_id();
      SessionDeps deps = shared_->factory();
      deps.sink = std::make_shared<ConnectionSink>(weak_from_this(), session_id_);
      clock_ = deps.clock;
      auto session = std::make_shared<Session>(session_id_, shared_->options.pipeline, std::move(deps));
      runner_ = std::make_unique<SessionRunner>(std::move(session));
    } catch (const std::exception& e) {
      spdlog::error("cannot open session: {}", e.what());
      send(error_message("internal", "cannot open a session"));
      close_after_writes(websocket::close_code::internal_error, "session setup failed");
      return;
    }
    ++shared_->sessions;
    spdlog::info("session {} opened", session_id_);
    send({{"kind", "hello_ack"}, {"session_id", session_id_}, {"capture_hz", shared_->options.pipeline.capture_hz}});
  }

  void on_frame(const json& msg) {
    const auto field = [&](const char* k) { return msg.contains(k) ? msg[k] : json(); };
    const json sid = field("session_id");
    const json seq = field("seq");
    const json captured = field("captured_at_ms");
    const json payload = field("jpeg_b64");
    if (!sid.is_string() || !seq.is_number_integer() || !captured.is_number_integer() || !payload.is_string()) {
      send(error_message("bad_message", "frame needs session_id, seq, captured_at_ms and jpeg_b64"));
      return;
    }
    if (sid.get<std::string>() != session_id_) {
      send(error_message("wrong_session", "frame names another session"));
      return;
    }
    const auto s = seq.get<std::int64_t>();
    if (last_seq_ && s != *last_seq_ + 1) {
      spdlog::info("session {}: frame sequence jumped from {} to {}", session_id_, *last_seq_, s);
    }
    last_seq_ = s;
    ++frames_;
    try {
      EncodedFrame original{"image/jpeg", base64_decode(payload.get<std::string>())};
      GrayImage gray = decode_jpeg_gray(original.bytes);
      runner_->offer_frame(gray, clock_->now_ms(), std::move(original));
    } catch (const SessionClosed&) {
      send(error_message("session_closed", "session is closed"));
    } catch (const std::exception& e) {
      send(error_message("bad_frame", std::string("frame ") + std::to_string(s) + " skipped: " + e.what()));
    }
  }

  void on_status() {
    send({{"kind", "status"},
          {"session_id", session_id_},
          {"frames", frames_},
          {"batches", runner_->processed()},
          {"dropped", runner_->dropped()}});
  }

  void send(const json& msg) { enqueue(msg.dump()); }

  void enqueue(std::string text) {
    if (closing_started_) return;
    queue_.push_back(std::move(text));
    if (queue_.size() == 1) do_write();
  }

  void do_write() {
    ws_.text(true);
    ws_.async_write(asio::buffer(queue_.front()),
                    beast::bind_front_handler(&Connection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      spdlog::debug("session {}: write failed: {}", session_id_, ec.message());
      gone_ = true;
      queue_.clear();
      retire();
      return;
    }
    queue_.pop_front();
    if (!queue_.empty()) return do_write();
    if (closing_) start_close();
  }

  void close_after_writes(websocket::close_code code, const std::string& reason) {
    closing_ = true;
    close_reason_ = websocket::close_reason(code, reason);
    if (queue_.empty()) start_close();
  }

  void start_close() {
    if (closing_started_) return;
    closing_started_ = true;
    gone_ = true;
    ws_.async_close(close_reason_, [self = shared_from_this()](beast::error_code) {});
  }

  // Session teardown may wait on in-flight backend calls, so it runs on
  // the reaper thread.
  void retire() {
    if (!runner_) return;
    --shared_->sessions;
    spdlog::info("session {} closed", session_id_);
    runner_->session()->close();
    shared_->reaper->post([r = std::shared_ptr<SessionRunner>(std::move(runner_))] { r->close(); });
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::shared_ptr<Shared> shared_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool closing_ = false;
  bool closing_started_ = false;
  websocket::close_reason close_reason_;
  std::atomic<bool> gone_{false};

  std::string session_id_;
  std::unique_ptr<SessionRunner> runner_;
  std::shared_ptr<Clock> clock_;
  std::optional<std::int64_t> last_seq_;
  std::uint64_t frames_ = 0;
};

void ConnectionSink::deliver(const AudioClip& clip, const std::string& caption) {
  auto conn = conn_.lock();
  if (!conn) throw std::runtime_error("connection closed");
  const std::string category(to_string(clip.category));
  conn->push(json{{"kind", "audio"},
                  {"session_id", session_id_},
                  {"batch_index", clip.batch_index},
                  {"category", category},
                  {"mime", clip.mime},
                  {"audio_b64", base64_encode(clip.bytes)}}
                 .dump());
  conn->push(json{{"kind", "caption"},
                  {"session_id", session_id_},
                  {"batch_index", clip.batch_index},
                  {"category", category},
                  {"text", caption}}
                 .dump());
}

}  // namespace

struct Gateway::Impl {
  std::shared_ptr<Shared> shared = std::make_shared<Shared>();
  asio::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::vector<std::thread> threads;
  std::mutex mu;
  std::condition_variable cv;
  bool running = false;
  std::uint16_t port = 0;

  void accept() {
    acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) {
        if (ec != asio::error::operation_aborted) spdlog::warn("accept failed: {}", ec.message());
        if (!acceptor.is_open()) return;
      } else {
        std::make_shared<Connection>(std::move(socket), shared)->start();
      }
      accept();
    });
  }
};

Gateway::Gateway(GatewayOptions options, DepsFactory factory) : impl_(std::make_unique<Impl>()) {
  options.pipeline.validate();
  if (!factory) throw std::invalid_argument("gateway needs a session factory");
  if (options.io_threads < 1) throw std::invalid_argument("gateway needs at least one io thread");
  impl_->shared->options = std::move(options);
  impl_->shared->factory = std::move(factory);
}

Gateway::~Gateway() { stop(); }

void Gateway::start() {
  auto& im = *impl_;
  const auto& opt = im.shared->options;
  beast::error_code ec;
  const auto address = asio::ip::make_address(opt.address, ec);
  if (ec) throw std::runtime_error("bad listen address " + opt.address + ": " + ec.message());
  const tcp::endpoint endpoint(address, opt.port);
  im.acceptor.open(endpoint.protocol(), ec);
  if (!ec) im.acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) im.acceptor.bind(endpoint, ec);
  if (!ec) im.acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) throw std::runtime_error("cannot listen on " + opt.address + ":" + std::to_string(opt.port) + ": " + ec.message());
  im.port = im.acceptor.local_endpoint().port();
  im.accept();
  {
    std::lock_guard lock(im.mu);
    im.running = true;
  }
  for (int i = 0; i < opt.io_threads; ++i) im.threads.emplace_back([&im] { im.ioc.run(); });
  spdlog::info("listening on {}:{}", opt.address, im.port);
}

void Gateway::stop() {
  auto& im = *impl_;
  {
    std::lock_guard lock(im.mu);
    if (!im.running && im.threads.empty()) return;
    im.running = false;
  }
  asio::post(im.ioc, [&im] {
    beast::error_code ec;
    im.acceptor.close(ec);
  });
  im.ioc.stop();
  for (auto& t : im.threads) {
    if (t.joinable() && t.get_id() != std::this_thread::get_id()) t.join();
  }
  im.threads.clear();
  im.cv.notify_all();
}

void Gateway::wait() {
  std::unique_lock lock(impl_->mu);
  impl_->cv.wait(lock, [&] { return !impl_->running; });
}

std::uint16_t Gateway::port() const { return impl_->port; }

std::size_t Gateway::active_sessions() const { return impl_->shared->sessions.load(); }

}  // namespace amava::net
