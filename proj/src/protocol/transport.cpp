#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>

#include "tabverify/protocol.hpp"

namespace tabverify::protocol {

namespace {

struct Queue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::vector<std::uint8_t>> items;
  bool closed = false;
};

class LoopbackTransport final : public Transport {
 public:
  LoopbackTransport(std::shared_ptr<Queue> in, std::shared_ptr<Queue> out) : in_(std::move(in)), out_(std::move(out)) {}
  ~LoopbackTransport() override { close(); }

  void send(const Frame& f) override {
    auto bytes = encode_frame(f);
    std::lock_guard<std::mutex> lock(out_->mu);
    if (out_->closed) throw ChannelError("loopback: peer closed");
    out_->items.push_back(std::move(bytes));
    out_->cv.notify_one();
  }

  Frame recv() override {
    std::unique_lock<std::mutex> lock(in_->mu);
    in_->cv.wait(lock, [&] { return !in_->items.empty() || in_->closed; });
    if (in_->items.empty()) throw ChannelError("loopback: peer closed");
    auto bytes = std::move(in_->items.front());
    in_->items.pop_front();
    lock.unlock();
    return decode_frame(std::span<const std::uint8_t>(bytes).subspan(4));
  }

  void close() override {
    for (auto* q : {in_.get(), out_.get()}) {
      std::lock_guard<std::mutex> lock(q->mu);
      q->closed = true;
      q->cv.notify_all();
    }
  }

 private:
  std::shared_ptr<Queue> in_;
  std::shared_ptr<Queue> out_;
};

class TcpTransport final : public Transport {
 public:
  explicit TcpTransport(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  ~TcpTransport() override { close(); }

  void send(const Frame& f) override {
    const auto bytes = encode_frame(f);
    std::size_t done = 0;
    while (done < bytes.size()) {
      const ssize_t n = ::send(fd_, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw ChannelError(std::string("tcp send: ") + std::strerror(errno));
      done += static_cast<std::size_t>(n);
    }
  }

  Frame recv() override {
    std::uint8_t head[4];
    read_all(head, 4);
    const std::size_t len = (std::size_t{head[0]} << 24) | (std::size_t{head[1]} << 16) | (std::size_t{head[2]} << 8) | head[3];
    if (len > kMaxFrameBytes) throw ChannelError("tcp: frame exceeds the size limit");
    std::vector<std::uint8_t> body(len);
    read_all(body.data(), len);
    return decode_frame(body);
  }

  void close() override {
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  void read_all(std::uint8_t* p, std::size_t n) {
    if (fd_ < 0) throw ChannelError("tcp: closed");
    std::size_t done = 0;
    while (done < n) {
      const ssize_t r = ::recv(fd_, p + done, n - done, 0);
      if (r < 0 && errno == EINTR) continue;
      if (r == 0) throw ChannelError("tcp: connection closed by peer");
      if (r < 0) throw ChannelError(std::string("tcp recv: ") + std::strerror(errno));
      done += static_cast<std::size_t>(r);
    }
  }

  int fd_;
};

addrinfo* resolve(const std::string& host, int port, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), std::to_string(port).c_str(), &hints, &res);
  if (rc != 0) throw ChannelError("cannot resolve '" + host + "': " + ::gai_strerror(rc));
  return res;
}

}  // namespace

std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> loopback_pair() {
  auto a = std::make_shared<Queue>();
  auto b = std::make_shared<Queue>();
  return {std::make_unique<LoopbackTransport>(a, b), std::make_unique<LoopbackTransport>(b, a)};
}

TcpListener::TcpListener(const std::string& host, int port) {
  addrinfo* res = resolve(host, port, true);
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd_ = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd_ < 0) continue;
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd_, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd_, 16) == 0) break;
    ::close(fd_);
    fd_ = -1;
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) throw ChannelError("cannot listen on " + host + ":" + std::to_string(port));
  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.ss_family == AF_INET6 ? reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port
                                           : reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Transport> TcpListener::accept() {
  for (;;) {
    const int c = ::accept(fd_, nullptr, nullptr);
    if (c >= 0) return std::make_unique<TcpTransport>(c);
    if (errno != EINTR) throw ChannelError(std::string("accept: ") + std::strerror(errno));
  }
}

std::unique_ptr<Transport> tcp_connect(const std::string& host, int port) {
  addrinfo* res = resolve(host, port, false);
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw ChannelError("cannot connect to " + host + ":" + std::to_string(port));
  return std::make_unique<TcpTransport>(fd);
}

void serve(Developer& dev, Transport& t) {
  const auto& pk = *dev.params().hpk;
  const auto& ports = dev.params().structure.inputs;
  for (;;) {
    Frame f;
    try {
      f = t.recv();
    } catch (const ChannelError&) {
      return;
    }
    Frame reply{"", f.session, nlohmann::json::object()};
    try {
      if (f.type == "open") {
        dev.reset();
        reply = {"params", f.session, {{"params", dev.params().to_json()}}};
      } else if (f.type == "encode") {
        reply = {"answer", f.session, {{"answer", dev.encode(EncodeQuery::from_json(f.body.at("query"), pk)).to_json()}}};
      } else if (f.type == "path") {
        reply = {"answer", f.session, {{"answer", path_answer_to_json(dev.path(PathQuery::from_json(f.body.at("query"))), ports)}}};
      } else if (f.type == "checker") {
        reply = {"commit", f.session, {{"answer", commit_answer_to_json(dev.checker(CheckerQuery::from_json(f.body.at("query"), pk)))}}};
      } else if (f.type == "proof") {
        reply = {"reveal", f.session,
                 {{"answer", reveal_answer_to_json(dev.proof(word_from_base64(f.body.at("ct_sk").get<std::string>(), pk)))}}};
      } else if (f.type == "close") {
        t.send({"close", f.session, nlohmann::json::object()});
        return;
      } else {
        reply = {"error", f.session, {{"message", "unexpected frame type '" + f.type + "'"}}};
      }
    } catch (const std::exception& e) {
      reply = {"error", f.session, {{"message", e.what()}}};
    }
    try {
      t.send(reply);
    } catch (const ChannelError&) {
      return;
    }
  }
}

Frame RemoteLink::call(const std::string& type, const nlohmann::json& body, const std::string& expect) {
  if (type != "open") fresh_ = false;
  t_.send({type, session_, body});
  Frame f = t_.recv();
  if (f.type == "error") {
    std::string msg = "?";
    if (f.body.is_object() && f.body.contains("message") && f.body["message"].is_string()) msg = f.body["message"];
    throw ChannelError("developer error: " + msg);
  }
  if (f.type != expect) throw ChannelError("expected a '" + expect + "' frame, got '" + f.type + "'");
  if (f.session != session_) throw ChannelError("frame for a different session");
  return f;
}

PublicParams RemoteLink::fetch_params(const std::string& session) {
  session_ = session;
  Frame f = call("open", nlohmann::json::object(), "params");
  PublicParams pp = PublicParams::from_json(f.body.at("params"));
  pk_ = pp.hpk;
  inputs_ = pp.structure.inputs;
  fresh_ = true;
  return pp;
}

// A session just opened by fetch_params is not reopened: that would wipe M twice.
void RemoteLink::open(const std::string& session) {
  if (fresh_ && session == session_) {
    fresh_ = false;
    return;
  }
  fetch_params(session);
  fresh_ = false;
}

EncodeAnswer RemoteLink::encode(const EncodeQuery& q) {
  return EncodeAnswer::from_json(call("encode", {{"query", q.to_json()}}, "answer").body.at("answer"), *pk_);
}

PathAnswer RemoteLink::path(const PathQuery& q) {
  return path_answer_from_json(call("path", {{"query", q.to_json()}}, "answer").body.at("answer"), inputs_);
}

CommitAnswer RemoteLink::checker(const CheckerQuery& q) {
  return commit_answer_from_json(call("checker", {{"query", q.to_json()}}, "commit").body.at("answer"), q.challenges);
}

RevealAnswer RemoteLink::proof(const he::CtWord& ct_sk) {
  return reveal_answer_from_json(call("proof", {{"ct_sk", word_to_base64(ct_sk)}}, "reveal").body.at("answer"));
}

void RemoteLink::close() {
  try {
    call("close", nlohmann::json::object(), "close");
  } catch (const ChannelError&) {
  }
}

}  // namespace tabverify::protocol
