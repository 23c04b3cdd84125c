#include "ws_client.hpp"

#include <future>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace amava::testing {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

// All stream operations run on the single io thread.
struct WsClient::Impl {
  asio::io_context ioc;
  websocket::stream<tcp::socket> ws{ioc};
  beast::flat_buffer buf;
  std::deque<std::pair<std::string, std::shared_ptr<std::promise<void>>>> outbox;
  std::thread io;

  mutable std::mutex mu;
  std::condition_variable cv;
  std::deque<std::string> inbox;
  bool closed = false;
  int close_code = 0;

  void read() {
    ws.async_read(buf, [this](beast::error_code ec, std::size_t) {
      std::lock_guard lock(mu);
      if (ec) {
        closed = true;
        close_code = ws.reason().code ? ws.reason().code : -1;
        cv.notify_all();
        for (auto& [_, done] : outbox) done->set_value();
        outbox.clear();
        return;
      }
      inbox.push_back(beast::buffers_to_string(buf.data()));
      buf.consume(buf.size());
      cv.notify_all();
      read();
    });
  }

  void write_next() {
    ws.async_write(asio::buffer(outbox.front().first), [this](beast::error_code, std::size_t) {
      if (outbox.empty()) return;
      outbox.front().second->set_value();
      outbox.pop_front();
      if (!outbox.empty()) write_next();
    });
  }
};

WsClient::WsClient(std::uint16_t port, const std::string& host) : impl_(std::make_unique<Impl>()) {
  tcp::resolver resolver(impl_->ioc);
  asio::connect(impl_->ws.next_layer(), resolver.resolve(host, std::to_string(port)));
  impl_->ws.handshake(host + ":" + std::to_string(port), "/");
  impl_->ws.text(true);
  impl_->ws.read_message_max(64 * 1024 * 1024);
  impl_->read();
  impl_->io = std::thread([this] { impl_->ioc.run(); });
}

WsClient::~WsClient() {
  close();
  wait_closed(2000);
  impl_->ioc.stop();
  if (impl_->io.joinable()) impl_->io.join();
}

void WsClient::send(const nlohmann::json& msg) { send_raw(msg.dump()); }

void WsClient::send_raw(const std::string& text) {
  auto done = std::make_shared<std::promise<void>>();
  auto fut = done->get_future();
  asio::post(impl_->ioc, [this, text, done] {
    if (impl_->closed) {
      done->set_value();
      return;
    }
    impl_->outbox.emplace_back(text, done);
    if (impl_->outbox.size() == 1) impl_->write_next();
  });
  fut.wait_for(std::chrono::seconds(5));
}

std::optional<nlohmann::json> WsClient::receive(int timeout_ms) {
  std::unique_lock lock(impl_->mu);
  impl_->cv.wait_for(lock, std::chrono::milliseconds(timeout_ms),
                     [&] { return !impl_->inbox.empty() || impl_->closed; });
  if (impl_->inbox.empty()) return std::nullopt;
  auto text = std::move(impl_->inbox.front());
  impl_->inbox.pop_front();
  return nlohmann::json::parse(text);
}

int WsClient::wait_closed(int timeout_ms) {
  std::unique_lock lock(impl_->mu);
  impl_->cv.wait_for(lock, std::chrono::milliseconds(timeout_ms), [&] { return impl_->closed; });
  return impl_->closed ? impl_->close_code : 0;
}

bool WsClient::closed() const {
  std::lock_guard lock(impl_->mu);
  return impl_->closed;
}

void WsClient::close() {
  asio::post(impl_->ioc, [this] {
    if (impl_->closed || !impl_->ws.is_open()) return;
    impl_->ws.async_close(websocket::close_code::normal, [](beast::error_code) {});
  });
}

std::string WsClient::hello() {
  send({{"kind", "hello"}, {"client_version", "test"}});
  const auto ack = receive();
  if (!ack || (*ack)["kind"] != "hello_ack") throw std::runtime_error("no hello_ack");
  return (*ack)["session_id"];
}

}  // namespace amava::testing
