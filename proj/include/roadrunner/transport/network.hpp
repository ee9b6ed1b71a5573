#pragma once

#include <memory>
#include <string>

#include "roadrunner/frame.hpp"
#include "roadrunner/transport/delivery.hpp"
#include "roadrunner/transport/hose.hpp"
#include "roadrunner/transport/kernel.hpp"

namespace rr::transport {

struct PeerAddress {
    std::string host;
    std::uint16_t port = 0;
    std::uint32_t function_id = 0;
};

enum class HosePreference {
    Auto,      // zero-copy when the capability probe passes
    Disabled,  // always the buffered fallback
};

struct NetworkOptions {
    TransportOptions transport;
    HosePreference hose = HosePreference::Auto;
};

struct SendOutcome {
    FrameHeader ack;
    bool zero_copy = false;  // mirrored in the sent header's flag bit 0
};

// Inter-node sender. Keeps one long-lived connection per peer, reused
// across transfers with strict request/ACK alternation. The header goes
// out as a plain 40-byte write; the payload follows over the zero-copy
// hose when available, or as direct chunked writes from linear memory.
//
// On the zero-copy path the kernel maps source pages rather than copying
// them, so the source region must stay untouched until the ACK returns;
// callers must not run the source instance while a send is in flight.
class NetworkClient {
public:
    explicit NetworkClient(NetworkOptions options = {});
    ~NetworkClient();
    NetworkClient(const NetworkClient&) = delete;
    NetworkClient& operator=(const NetworkClient&) = delete;

    Result<SendOutcome> send(const PeerAddress& peer, FrameHeader header, host::Instance& source,
                             MemoryRegion region);

    void close_connections();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Picks the destination sink for an inbound DATA frame. An error refuses
// the frame; the sender sees it as an ERROR reply.
using SinkResolver = std::function<Result<DeliverySink*>(const FrameHeader&)>;

// Inter-node listener. Payload bytes land in the target allocation either
// through a per-frame hose (socket -> pipe -> memory) or direct chunked
// reads; either way the region fills completely before run() is invoked.
class NetworkServer {
public:
    static Result<std::unique_ptr<NetworkServer>> start(const std::string& host,
                                                        std::uint16_t port, DeliverySink& sink,
                                                        NetworkOptions options);
    static Result<std::unique_ptr<NetworkServer>> start(const std::string& host,
                                                        std::uint16_t port, SinkResolver resolver,
                                                        NetworkOptions options);
    ~NetworkServer();
    NetworkServer(const NetworkServer&) = delete;
    NetworkServer& operator=(const NetworkServer&) = delete;

    std::uint16_t port() const;
    void stop();

private:
    NetworkServer();
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace rr::transport
