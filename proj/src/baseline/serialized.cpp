#include "roadrunner/baseline/serialized.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstring>
#include <thread>
#include <vector>

#include "roadrunner/net/socket.hpp"

namespace rr::baseline {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

constexpr std::uint64_t kMaxMessageBytes = 2ull * 1024 * 1024 * 1024;

int decode_char(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= data.size(); i += 3) {
        std::uint32_t v = std::uint32_t(data[i]) << 16 | std::uint32_t(data[i + 1]) << 8 |
                          std::uint32_t(data[i + 2]);
        out.push_back(kAlphabet[(v >> 18) & 63]);
        out.push_back(kAlphabet[(v >> 12) & 63]);
        out.push_back(kAlphabet[(v >> 6) & 63]);
        out.push_back(kAlphabet[v & 63]);
    }
    std::size_t rest = data.size() - i;
    if (rest == 1) {
        std::uint32_t v = std::uint32_t(data[i]) << 16;
        out.push_back(kAlphabet[(v >> 18) & 63]);
        out.push_back(kAlphabet[(v >> 12) & 63]);
        out.push_back('=');
        out.push_back('=');
    } else if (rest == 2) {
        std::uint32_t v = std::uint32_t(data[i]) << 16 | std::uint32_t(data[i + 1]) << 8;
        out.push_back(kAlphabet[(v >> 18) & 63]);
        out.push_back(kAlphabet[(v >> 12) & 63]);
        out.push_back(kAlphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

Result<std::vector<std::uint8_t>> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) {
        return make_error(ErrorKind::FrameMalformed, "base64 length not a multiple of 4");
    }
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int pad = 0;
        std::uint32_t v = 0;
        for (int j = 0; j < 4; j++) {
            char c = text[i + j];
            if (c == '=') {
                if (i + 4 != text.size() || j < 2) {
                    return make_error(ErrorKind::FrameMalformed, "misplaced base64 padding");
                }
                pad++;
                v <<= 6;
                continue;
            }
            if (pad > 0) {
                return make_error(ErrorKind::FrameMalformed, "data after base64 padding");
            }
            int d = decode_char(c);
            if (d < 0) {
                return make_error(ErrorKind::FrameMalformed, "invalid base64 character");
            }
            v = (v << 6) | std::uint32_t(d);
        }
        out.push_back(std::uint8_t(v >> 16));
        if (pad < 2) out.push_back(std::uint8_t(v >> 8));
        if (pad < 1) out.push_back(std::uint8_t(v));
    }
    return out;
}

std::string serialize(std::span<const std::uint8_t> payload, std::uint32_t source_fn,
                      std::uint32_t target_fn) {
    std::string out = "v1 ";
    out += std::to_string(source_fn);
    out += ' ';
    out += std::to_string(target_fn);
    out += ' ';
    out += base64_encode(payload);
    return out;
}

Result<SerializedMessage> parse_message(std::string_view envelope) {
    auto fail = [](const char* what) {
        return make_error(ErrorKind::FrameMalformed, std::string("bad envelope: ") + what);
    };
    if (envelope.substr(0, 3) != "v1 ") return fail("missing version tag");
    envelope.remove_prefix(3);

    SerializedMessage msg;
    auto take_u32 = [&](std::uint32_t& out) -> bool {
        auto space = envelope.find(' ');
        if (space == std::string_view::npos) return false;
        auto token = envelope.substr(0, space);
        auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
        if (ec != std::errc() || p != token.data() + token.size()) return false;
        envelope.remove_prefix(space + 1);
        return true;
    };
    if (!take_u32(msg.source_fn)) return fail("missing source id");
    if (!take_u32(msg.target_fn)) return fail("missing target id");
    msg.payload_b64 = std::string(envelope);
    return msg;
}

Result<std::vector<std::uint8_t>> deserialize(std::string_view envelope) {
    auto msg = parse_message(envelope);
    if (!msg.ok()) return std::move(msg).error();
    return base64_decode(msg.value().payload_b64);
}

// ---- server ----------------------------------------------------------------

struct BaselineServer::Impl {
    net::Fd listen_fd;
    std::uint16_t port = 0;
    transport::DeliverySink* sink = nullptr;
    BaselineOptions options;
    std::atomic<bool> stop{false};
    std::thread accept_thread;
    std::mutex handlers_mutex;
    std::vector<std::thread> handlers;

    mutable std::mutex phases_mutex;
    ServerPhases phases;

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
        const net::Millis timeout = options.timeout;
        for (;;) {
            std::array<std::uint8_t, 8> len_bytes;
            auto got = net::read_full_or_eof(fd, len_bytes, timeout);
            if (!got.ok() || !got.value()) return;
            std::uint64_t len = 0;
            for (int i = 0; i < 8; i++) len |= std::uint64_t(len_bytes[i]) << (8 * i);
            if (len == 0 || len > kMaxMessageBytes) return;

            std::string text(std::size_t(len), '\0');
            if (!net::read_full(fd, std::span(reinterpret_cast<std::uint8_t*>(text.data()),
                                              text.size()),
                                timeout)
                     .ok())
                return;

            auto t0 = Clock::now();
            auto payload = deserialize(text);
            double deserialize_s = seconds_since(t0);

            std::uint8_t status = 1;
            MemoryRegion region{};
            double deliver_s = 0;
            if (payload.ok() && !payload.value().empty()) {
                std::lock_guard lock(sink->mutex());
                auto t1 = Clock::now();
                auto staged = sink->stage(payload.value().size(),
                                          [&](std::span<std::uint8_t> dst) -> Status {
                                              std::memcpy(dst.data(), payload.value().data(),
                                                          dst.size());
                                              return ok_status();
                                          });
                deliver_s = seconds_since(t1);
                if (staged.ok()) {
                    status = 0;
                    region = staged.value();
                }
                {
                    std::lock_guard plock(phases_mutex);
                    phases = ServerPhases{deserialize_s, deliver_s};
                }
                if (!net::write_full(fd, std::span(&status, 1), timeout).ok()) return;
                if (status == 0) {
                    if (auto s = sink->complete(region); !s.ok()) {
                        std::fprintf(stderr, "baseline run() failed: %s\n",
                                     s.error().to_string().c_str());
                    }
                }
                continue;
            }
            {
                std::lock_guard plock(phases_mutex);
                phases = ServerPhases{deserialize_s, 0};
            }
            if (!net::write_full(fd, std::span(&status, 1), timeout).ok()) return;
        }
    }
};

BaselineServer::BaselineServer() : impl_(std::make_unique<Impl>()) {}

BaselineServer::~BaselineServer() { stop(); }

std::uint16_t BaselineServer::port() const { return impl_->port; }

ServerPhases BaselineServer::last_phases() const {
    std::lock_guard lock(impl_->phases_mutex);
    return impl_->phases;
}

Result<std::unique_ptr<BaselineServer>> BaselineServer::start(const std::string& host,
                                                              std::uint16_t port,
                                                              transport::DeliverySink& sink,
                                                              BaselineOptions options) {
    auto listen = net::tcp_listen(host, port);
    if (!listen.ok()) return std::move(listen).error();
    auto bound = net::local_port(listen.value().get());
    if (!bound.ok()) return std::move(bound).error();

    auto server = std::unique_ptr<BaselineServer>(new BaselineServer());
    server->impl_->listen_fd = std::move(listen).value();
    server->impl_->port = bound.value();
    server->impl_->sink = &sink;
    server->impl_->options = options;
    server->impl_->accept_thread =
        std::thread([impl = server->impl_.get()] { impl->accept_loop(); });
    return server;
}

void BaselineServer::stop() {
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

Result<ClientPhases> baseline_transfer(const std::string& host, std::uint16_t port,
                                       std::uint32_t source_fn, std::uint32_t target_fn,
                                       host::Instance& source, MemoryRegion region,
                                       const BaselineOptions& options) {
    if (region.length == 0) {
        return make_error(ErrorKind::BoundsViolation, "zero-length region cannot be transferred");
    }
    const net::Millis timeout(options.timeout);

    ClientPhases phases;

    // Serialization covers the copy out of the sandbox plus the encode.
    auto t0 = Clock::now();
    auto payload = source.read_memory(region);
    if (!payload.ok()) return std::move(payload).error();
    std::string envelope = serialize(payload.value(), source_fn, target_fn);
    phases.serialize_s = seconds_since(t0);

    auto conn = net::tcp_connect(host, port, timeout);
    if (!conn.ok()) return std::move(conn).error();
    net::set_nodelay(conn.value().get());
    int fd = conn.value().get();

    auto t1 = Clock::now();
    std::array<std::uint8_t, 8> len_bytes;
    std::uint64_t len = envelope.size();
    for (int i = 0; i < 8; i++) len_bytes[i] = std::uint8_t(len >> (8 * i));
    if (auto s = net::write_full(fd, len_bytes, timeout); !s.ok()) return std::move(s).error();
    if (auto s = net::write_full(
            fd, std::span(reinterpret_cast<const std::uint8_t*>(envelope.data()), envelope.size()),
            timeout);
        !s.ok())
        return std::move(s).error();

    std::uint8_t status = 0;
    if (auto s = net::read_full(fd, std::span(&status, 1), timeout); !s.ok())
        return std::move(s).error();
    phases.roundtrip_s = seconds_since(t1);
    if (status != 0) {
        return make_error(ErrorKind::FrameMalformed, "peer rejected the serialized message");
    }
    return phases;
}

}  // namespace rr::baseline
