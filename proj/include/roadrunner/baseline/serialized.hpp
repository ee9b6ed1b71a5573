#pragma once

#include <memory>
#include <string>
#include <vector>

#include "roadrunner/error.hpp"
#include "roadrunner/transport/delivery.hpp"

namespace rr::baseline {

// Comparison path: the payload is serialized to text at the source and
// decoded at the target, reproducing the allocate/transform/copy structure
// HTTP-style data passing pays on every transfer.

std::string base64_encode(std::span<const std::uint8_t> data);
Result<std::vector<std::uint8_t>> base64_decode(std::string_view text);

struct SerializedMessage {
    std::uint32_t source_fn = 0;
    std::uint32_t target_fn = 0;
    std::string payload_b64;
};

// Envelope text: "v1 <src> <dst> <base64>".
std::string serialize(std::span<const std::uint8_t> payload, std::uint32_t source_fn,
                      std::uint32_t target_fn);
Result<SerializedMessage> parse_message(std::string_view envelope);
Result<std::vector<std::uint8_t>> deserialize(std::string_view envelope);

struct BaselineOptions {
    std::chrono::milliseconds timeout{30000};
};

struct ServerPhases {
    double deserialize_s = 0;
    double deliver_s = 0;
};

// Wire protocol: 8-byte little-endian length prefix, then the envelope
// text; the reply is one status byte (0 = delivered).
class BaselineServer {
public:
    static Result<std::unique_ptr<BaselineServer>> start(const std::string& host,
                                                         std::uint16_t port,
                                                         transport::DeliverySink& sink,
                                                         BaselineOptions options);
    ~BaselineServer();
    BaselineServer(const BaselineServer&) = delete;
    BaselineServer& operator=(const BaselineServer&) = delete;

    std::uint16_t port() const;
    // Phase timings recorded for the most recent message.
    ServerPhases last_phases() const;
    void stop();

private:
    BaselineServer();
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct ClientPhases {
    double serialize_s = 0;  // source memory read + encode
    double roundtrip_s = 0;  // send through status byte received
};

Result<ClientPhases> baseline_transfer(const std::string& host, std::uint16_t port,
                                       std::uint32_t source_fn, std::uint32_t target_fn,
                                       host::Instance& source, MemoryRegion region,
                                       const BaselineOptions& options);

}  // namespace rr::baseline
