#include "roadrunner/transport/kernel.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <thread>
#include <vector>

#include "serve_util.hpp"

namespace rr::transport {

namespace detail {

void send_error_frame(int fd, const FrameHeader& request, const TransferError& err,
                      net::Millis timeout) {
    std::string message = err.to_string();
    FrameHeader reply;
    reply.msg_type = MsgType::Error;
    reply.workflow_id = request.workflow_id;
    reply.source_fn = request.target_fn;
    reply.target_fn = request.source_fn;
    reply.payload_len = message.size();
    auto bytes = encode_frame_header(reply);
    if (net::write_full(fd, bytes, timeout).ok()) {
        (void)net::write_full(
            fd, std::span(reinterpret_cast<const std::uint8_t*>(message.data()), message.size()),
            timeout);
    }
}

namespace {

// Reads and discards n payload bytes so the stream stays framed after a
// refused DATA frame.
Status drain_payload(int fd, std::uint64_t n, net::Millis timeout) {
    std::array<std::uint8_t, 65536> junk;
    while (n > 0) {
        std::size_t step = std::size_t(std::min<std::uint64_t>(n, junk.size()));
        if (auto s = net::read_full(fd, std::span(junk.data(), step), timeout); !s.ok()) return s;
        n -= step;
    }
    return ok_status();
}

}  // namespace

void serve_frames(int fd, const SinkResolver& resolve, const TransportOptions& options,
                  const FillFactory& make_fill) {
    for (;;) {
        std::array<std::uint8_t, kFrameHeaderSize> header_bytes;
        auto got = net::read_full_or_eof(fd, header_bytes, options.ack_timeout);
        if (!got.ok() || !got.value()) return;

        auto decoded = decode_frame_header(header_bytes);
        if (!decoded.ok()) {
            send_error_frame(fd, FrameHeader{}, decoded.error(), options.ack_timeout);
            return;  // cannot resynchronize the stream
        }
        const FrameHeader& header = decoded.value();

        if (header.msg_type != MsgType::Data || header.payload_len == 0) {
            auto err = make_error(ErrorKind::FrameMalformed,
                                  header.msg_type != MsgType::Data ? "expected DATA frame"
                                                                   : "zero payload length");
            send_error_frame(fd, header, err, options.ack_timeout);
            if (header.payload_len == 0) continue;  // nothing unread on the stream
            return;
        }

        std::optional<TransferError> refusal;
        if (options.expect_workflow && header.workflow_id != *options.expect_workflow) {
            refusal = make_error(ErrorKind::RegistryMiss, "frame for foreign workflow " +
                                                              workflow_to_hex(header.workflow_id));
        } else if (options.expect_function && header.target_fn != *options.expect_function) {
            refusal = make_error(ErrorKind::RegistryMiss,
                                 "frame for function " + std::to_string(header.target_fn) +
                                     " at an endpoint serving function " +
                                     std::to_string(*options.expect_function));
        }
        DeliverySink* sink_ptr = nullptr;
        if (!refusal) {
            auto resolved = resolve(header);
            if (resolved.ok())
                sink_ptr = resolved.value();
            else
                refusal = resolved.error();
        }
        if (refusal) {
            if (!drain_payload(fd, header.payload_len, options.ack_timeout).ok()) return;
            send_error_frame(fd, header, *refusal, options.ack_timeout);
            continue;
        }
        DeliverySink& sink = *sink_ptr;

        MemoryRegion region;
        {
            std::lock_guard lock(sink.mutex());
            auto staged = sink.stage(header.payload_len, make_fill(header.payload_len));
            if (!staged.ok()) {
                const TransferError& err = staged.error();
                if (err.kind == ErrorKind::AllocationFailed) {
                    // The payload is still in flight; absorb it so the next
                    // frame stays aligned, then refuse.
                    if (!drain_payload(fd, header.payload_len, options.ack_timeout).ok()) return;
                    send_error_frame(fd, header, err, options.ack_timeout);
                    continue;
                }
                // Payload stream broken; nothing to salvage.
                return;
            }
            region = staged.value();

            FrameHeader ack;
            ack.msg_type = MsgType::Ack;
            ack.workflow_id = header.workflow_id;
            ack.source_fn = header.target_fn;
            ack.target_fn = header.source_fn;
            ack.payload_len = 0;
            auto ack_bytes = encode_frame_header(ack);
            if (!net::write_full(fd, ack_bytes, options.ack_timeout).ok()) return;

            if (auto s = sink.complete(region); !s.ok()) {
                std::fprintf(stderr, "delivery run() failed: %s\n", s.error().to_string().c_str());
            }
        }
    }
}

}  // namespace detail

std::string kernel_socket_path(const std::string& runtime_dir, const WorkflowId& workflow,
                               std::uint32_t function_id) {
    return runtime_dir + "/" + workflow_to_hex(workflow) + "/" + std::to_string(function_id) +
           ".sock";
}

struct KernelServer::Impl {
    std::string path;
    net::Fd listen_fd;
    DeliverySink* sink = nullptr;
    TransportOptions options;
    std::atomic<bool> stop{false};
    std::thread accept_thread;
    std::mutex handlers_mutex;
    std::vector<std::thread> handlers;

    void accept_loop() {
        while (!stop.load()) {
            auto conn = net::accept_with_timeout(listen_fd.get(), net::Millis(100));
            if (!conn.ok()) break;
            if (!conn.value().valid()) continue;  // timeout tick
            int fd = conn.value().release();
            std::lock_guard lock(handlers_mutex);
            handlers.emplace_back([this, fd] {
                net::Fd owned(fd);
                auto resolver = [this](const FrameHeader&) -> Result<DeliverySink*> {
                    return sink;
                };
                detail::serve_frames(owned.get(), resolver, options, [this, fd](std::uint64_t) {
                    return [this, fd](std::span<std::uint8_t> dst) -> Status {
                        for (std::size_t off = 0; off < dst.size(); off += options.chunk_size) {
                            std::size_t step = std::min(options.chunk_size, dst.size() - off);
                            if (auto s = net::read_full(fd, dst.subspan(off, step),
                                                        options.ack_timeout);
                                !s.ok())
                                return s;
                        }
                        return ok_status();
                    };
                });
            });
        }
    }
};

KernelServer::KernelServer() : impl_(std::make_unique<Impl>()) {}

KernelServer::~KernelServer() { stop(); }

const std::string& KernelServer::path() const { return impl_->path; }

Result<std::unique_ptr<KernelServer>> KernelServer::start(const std::string& socket_path,
                                                          DeliverySink& sink,
                                                          TransportOptions options) {
    std::error_code ec;
    std::filesystem::create_directories(std::filesystem::path(socket_path).parent_path(), ec);
    auto listen = net::unix_listen(socket_path);
    if (!listen.ok()) return std::move(listen).error();

    auto server = std::unique_ptr<KernelServer>(new KernelServer());
    server->impl_->path = socket_path;
    server->impl_->listen_fd = std::move(listen).value();
    server->impl_->sink = &sink;
    server->impl_->options = std::move(options);
    server->impl_->accept_thread = std::thread([impl = server->impl_.get()] { impl->accept_loop(); });
    return server;
}

void KernelServer::stop() {
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
    ::unlink(impl_->path.c_str());
}

Result<FrameHeader> send_kernel(const std::string& socket_path, const FrameHeader& header,
                                host::Instance& source, MemoryRegion region,
                                const TransportOptions& options) {
    if (region.length == 0) {
        return make_error(ErrorKind::BoundsViolation, "zero-length region cannot be transferred");
    }
    if (header.payload_len != region.length) {
        return make_error(ErrorKind::FrameMalformed,
                          "header payload_len does not match the region length");
    }
    auto src = source.memory_view(region);
    if (!src.ok()) return std::move(src).error();

    auto conn = net::unix_connect(socket_path);
    if (!conn.ok()) return std::move(conn).error();
    int fd = conn.value().get();

    auto header_bytes = encode_frame_header(header);
    if (auto s = net::write_full(fd, header_bytes, options.ack_timeout); !s.ok())
        return std::move(s).error();
    // Payload flows straight out of linear memory; chunking only bounds the
    // per-call size.
    std::span<const std::uint8_t> payload = src.value();
    for (std::size_t off = 0; off < payload.size(); off += options.chunk_size) {
        std::size_t step = std::min(options.chunk_size, payload.size() - off);
        if (auto s = net::write_full(fd, payload.subspan(off, step), options.ack_timeout); !s.ok())
            return std::move(s).error();
    }

    std::array<std::uint8_t, kFrameHeaderSize> reply_bytes;
    if (auto s = net::read_full(fd, reply_bytes, options.ack_timeout); !s.ok())
        return std::move(s).error();
    auto reply = decode_frame_header(reply_bytes);
    if (!reply.ok()) return reply;

    if (reply.value().msg_type == MsgType::Error) {
        std::uint64_t len = std::min<std::uint64_t>(reply.value().payload_len, 65536);
        std::string message(std::size_t(len), '\0');
        if (len > 0) {
            auto s = net::read_full(fd, std::span(reinterpret_cast<std::uint8_t*>(message.data()),
                                                  message.size()),
                                    options.ack_timeout);
            if (!s.ok()) return std::move(s).error();
        }
        return parse_error_payload(message, ErrorKind::PeerUnreachable);
    }
    if (reply.value().msg_type != MsgType::Ack) {
        return make_error(ErrorKind::FrameMalformed, "expected ACK frame in reply");
    }
    return reply;
}

}  // namespace rr::transport
