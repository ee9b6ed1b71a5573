#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>

#include "roadrunner/frame.hpp"
#include "roadrunner/transport/delivery.hpp"

namespace rr::transport {

struct TransportOptions {
    std::chrono::milliseconds ack_timeout{30000};
    std::size_t chunk_size = 256 * 1024;
    // When set, inbound DATA frames must match; mismatches are refused
    // with an ERROR frame.
    std::optional<WorkflowId> expect_workflow;
    std::optional<std::uint32_t> expect_function;
};

// Socket path layout shared by senders and listeners on one host.
std::string kernel_socket_path(const std::string& runtime_dir, const WorkflowId& workflow,
                               std::uint32_t function_id);

// Host-local stream listener feeding one target instance. Each inbound
// DATA frame is decoded, its payload streamed straight into a fresh guest
// allocation, acknowledged, then handed to the guest. A malformed frame
// kills only its own connection.
class KernelServer {
public:
    static Result<std::unique_ptr<KernelServer>> start(const std::string& socket_path,
                                                       DeliverySink& sink,
                                                       TransportOptions options);
    ~KernelServer();
    KernelServer(const KernelServer&) = delete;
    KernelServer& operator=(const KernelServer&) = delete;

    const std::string& path() const;
    void stop();  // idempotent; joins handlers and unlinks the socket

private:
    KernelServer();
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Sends one region from the source instance's memory over the host-local
// stream: 40 header bytes, then the payload written directly from linear
// memory in bounded chunks. Returns once the peer acknowledges.
Result<FrameHeader> send_kernel(const std::string& socket_path, const FrameHeader& header,
                                host::Instance& source, MemoryRegion region,
                                const TransportOptions& options);

}  // namespace rr::transport
