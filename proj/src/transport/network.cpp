#include "roadrunner/transport/network.hpp"

#include <atomic>
#include <cstdio>
#include <map>
#include <thread>
#include <vector>

#include "serve_util.hpp"

namespace rr::transport {

// ---- client ---------------------------------------------------------------

struct NetworkClient::Impl {
    NetworkOptions options;
    std::mutex mutex;
    std::map<std::string, net::Fd> connections;

    static std::string key(const PeerAddress& peer) {
        return peer.host + ":" + std::to_string(peer.port);
    }
};

NetworkClient::NetworkClient(NetworkOptions options) : impl_(std::make_unique<Impl>()) {
    impl_->options = std::move(options);
}

NetworkClient::~NetworkClient() = default;

void NetworkClient::close_connections() {
    std::lock_guard lock(impl_->mutex);
    impl_->connections.clear();
}

namespace {

Status send_payload_hose(int fd, std::span<const std::uint8_t> payload, net::Millis timeout) {
    auto hose = DataHose::create();
    if (!hose.ok()) return std::move(hose).error();
    DataHose& h = hose.value();
    for (std::size_t off = 0; off < payload.size();) {
        std::size_t chunk = std::min(h.capacity(), payload.size() - off);
        if (auto s = hose_fill_from_memory(h, payload.subspan(off, chunk)); !s.ok()) return s;
        if (auto s = hose_splice_to_socket(h, fd, chunk, timeout); !s.ok()) return s;
        off += chunk;
    }
    h.close_all();
    return ok_status();
}

Status send_payload_plain(int fd, std::span<const std::uint8_t> payload, std::size_t chunk_size,
                          net::Millis timeout) {
    for (std::size_t off = 0; off < payload.size(); off += chunk_size) {
        std::size_t step = std::min(chunk_size, payload.size() - off);
        if (auto s = net::write_full(fd, payload.subspan(off, step), timeout); !s.ok()) return s;
    }
    return ok_status();
}

Result<FrameHeader> read_reply(int fd, net::Millis timeout) {
    std::array<std::uint8_t, kFrameHeaderSize> reply_bytes;
    if (auto s = net::read_full(fd, reply_bytes, timeout); !s.ok()) return std::move(s).error();
    auto reply = decode_frame_header(reply_bytes);
    if (!reply.ok()) return reply;
    if (reply.value().msg_type == MsgType::Error) {
        std::uint64_t len = std::min<std::uint64_t>(reply.value().payload_len, 65536);
        std::string message(std::size_t(len), '\0');
        if (len > 0) {
            auto s = net::read_full(
                fd, std::span(reinterpret_cast<std::uint8_t*>(message.data()), message.size()),
                timeout);
            if (!s.ok()) return std::move(s).error();
        }
        return parse_error_payload(message, ErrorKind::PeerUnreachable);
    }
    if (reply.value().msg_type != MsgType::Ack) {
        return make_error(ErrorKind::FrameMalformed, "expected ACK frame in reply");
    }
    return reply;
}

}  // namespace

Result<SendOutcome> NetworkClient::send(const PeerAddress& peer, FrameHeader header,
                                        host::Instance& source, MemoryRegion region) {
    if (region.length == 0) {
        return make_error(ErrorKind::BoundsViolation, "zero-length region cannot be transferred");
    }
    if (header.payload_len != region.length) {
        return make_error(ErrorKind::FrameMalformed,
                          "header payload_len does not match the region length");
    }
    auto src = source.memory_view(region);
    if (!src.ok()) return std::move(src).error();

    bool zero_copy =
        impl_->options.hose == HosePreference::Auto && hose_capability().available;
    header.flags = std::uint16_t((header.flags & ~kFlagZeroCopy) | (zero_copy ? kFlagZeroCopy : 0));

    const net::Millis timeout = impl_->options.transport.ack_timeout;
    std::lock_guard lock(impl_->mutex);

    std::string key = Impl::key(peer);
    bool reused = impl_->connections.count(key) > 0;
    if (!reused) {
        auto conn = net::tcp_connect(peer.host, peer.port, timeout);
        if (!conn.ok()) return std::move(conn).error();
        net::set_nodelay(conn.value().get());
        impl_->connections[key] = std::move(conn).value();
    }

    auto header_bytes = encode_frame_header(header);
    if (auto s = net::write_full(impl_->connections[key].get(), header_bytes, timeout); !s.ok()) {
        impl_->connections.erase(key);
        if (!reused) return std::move(s).error();
        // Stale cached connection; retry once on a fresh one.
        auto conn = net::tcp_connect(peer.host, peer.port, timeout);
        if (!conn.ok()) return std::move(conn).error();
        net::set_nodelay(conn.value().get());
        impl_->connections[key] = std::move(conn).value();
        if (auto s2 = net::write_full(impl_->connections[key].get(), header_bytes, timeout);
            !s2.ok()) {
            impl_->connections.erase(key);
            return std::move(s2).error();
        }
    }
    int fd = impl_->connections[key].get();

    Status sent = zero_copy
                      ? send_payload_hose(fd, src.value(), timeout)
                      : send_payload_plain(fd, src.value(), impl_->options.transport.chunk_size,
                                           timeout);
    if (!sent.ok()) {
        impl_->connections.erase(key);
        return std::move(sent).error();
    }

    auto reply = read_reply(fd, timeout);
    if (!reply.ok()) {
        impl_->connections.erase(key);
        return std::move(reply).error();
    }
    return SendOutcome{reply.value(), zero_copy};
}

// ---- server ---------------------------------------------------------------

struct NetworkServer::Impl {
    net::Fd listen_fd;
    std::uint16_t port = 0;
    SinkResolver resolver;
    NetworkOptions options;
    std::atomic<bool> stop{false};
    std::thread accept_thread;
    std::mutex handlers_mutex;
    std::vector<std::thread> handlers;

    void accept_loop() {
        while (!stop.load()) {
            auto conn = net::accept_with_timeout(listen_fd.get(), net::Millis(100));
            if (!conn.ok()) break;
            if (!conn.value().valid()) continue;
            net::set_nodelay(conn.value().get());
            int fd = conn.value().release();
            std::lock_guard lock(handlers_mutex);
            handlers.emplace_back([this, fd] {
                net::Fd owned(fd);
                serve_connection(owned.get());
            });
        }
    }

    void serve_connection(int fd) {
        const bool use_hose =
            options.hose == HosePreference::Auto && hose_capability().available;
        const net::Millis timeout = options.transport.ack_timeout;
        detail::serve_frames(fd, resolver, options.transport, [=, this](std::uint64_t) -> FillFn {
            if (use_hose) {
                return [fd, timeout](std::span<std::uint8_t> dst) -> Status {
                    auto hose = DataHose::create();
                    if (!hose.ok()) return std::move(hose).error();
                    DataHose& h = hose.value();
                    for (std::size_t off = 0; off < dst.size();) {
                        std::size_t chunk = std::min(h.capacity(), dst.size() - off);
                        if (auto s = hose_splice_from_socket(fd, h, chunk, timeout); !s.ok())
                            return s;
                        if (auto s = hose_drain_to_memory(h, dst.subspan(off, chunk)); !s.ok())
                            return s;
                        off += chunk;
                    }
                    h.close_all();
                    return ok_status();
                };
            }
            std::size_t chunk_size = options.transport.chunk_size;
            return [fd, timeout, chunk_size](std::span<std::uint8_t> dst) -> Status {
                for (std::size_t off = 0; off < dst.size(); off += chunk_size) {
                    std::size_t step = std::min(chunk_size, dst.size() - off);
                    if (auto s = net::read_full(fd, dst.subspan(off, step), timeout); !s.ok())
                        return s;
                }
                return ok_status();
            };
        });
    }
};

NetworkServer::NetworkServer() : impl_(std::make_unique<Impl>()) {}

NetworkServer::~NetworkServer() { stop(); }

std::uint16_t NetworkServer::port() const { return impl_->port; }

Result<std::unique_ptr<NetworkServer>> NetworkServer::start(const std::string& host,
                                                            std::uint16_t port, DeliverySink& sink,
                                                            NetworkOptions options) {
    DeliverySink* sink_ptr = &sink;
    return start(
        host, port,
        [sink_ptr](const FrameHeader&) -> Result<DeliverySink*> { return sink_ptr; },
        std::move(options));
}

Result<std::unique_ptr<NetworkServer>> NetworkServer::start(const std::string& host,
                                                            std::uint16_t port,
                                                            SinkResolver resolver,
                                                            NetworkOptions options) {
    auto listen = net::tcp_listen(host, port);
    if (!listen.ok()) return std::move(listen).error();
    auto bound = net::local_port(listen.value().get());
    if (!bound.ok()) return std::move(bound).error();

    auto server = std::unique_ptr<NetworkServer>(new NetworkServer());
    server->impl_->listen_fd = std::move(listen).value();
    server->impl_->port = bound.value();
    server->impl_->resolver = std::move(resolver);
    server->impl_->options = std::move(options);
    server->impl_->accept_thread =
        std::thread([impl = server->impl_.get()] { impl->accept_loop(); });
    return server;
}

void NetworkServer::stop() {
    if (!impl_ || impl_->stop.exchange(true)) return;
    if (impl_->accept_thread.joinable()) impl_->accept_thread.join();
    impl_->listen_fd.reset();
    std::vector<std::thread> handlers;
    {
        std::lock_guard lock(impl_->handlers_mutex);
        handlers.swap(impl_->handlers);
    }
    for (auto& t : handlers) {
        if (t.joinable()) t.join();
    }
}

}  // namespace rr::transport
