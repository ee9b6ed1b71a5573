#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "roadrunner/error.hpp"
#include "roadrunner/net/socket.hpp"

namespace rr::transport {

// Per-transfer kernel pipe through which payload pages move between user
// memory and a socket without intermediate user-space buffers. The send
// side maps source pages into the pipe (vmsplice) and forwards them to the
// socket (splice); the receive side drains the socket into the pipe
// (splice) and lands the bytes in destination memory (vmsplice), which is
// the single copy at the VM boundary.
class DataHose {
public:
    static Result<DataHose> create();

    DataHose() = default;
    ~DataHose() { close_all(); }
    DataHose(DataHose&& other) noexcept;
    DataHose& operator=(DataHose&& other) noexcept;
    DataHose(const DataHose&) = delete;
    DataHose& operator=(const DataHose&) = delete;

    int read_fd() const { return read_fd_; }
    int write_fd() const { return write_fd_; }
    std::size_t capacity() const { return capacity_; }
    bool open() const { return read_fd_ >= 0; }

    // Releases both pipe ends; idempotent.
    void close_all();

private:
    int read_fd_ = -1;
    int write_fd_ = -1;
    std::size_t capacity_ = 0;
};

// Exact-count loops over the splicing syscalls; chunk must not exceed the
// hose capacity. All partial results are retried until the full count
// moved or the deadline passes.
Status hose_fill_from_memory(DataHose& hose, std::span<const std::uint8_t> chunk);
Status hose_drain_to_memory(DataHose& hose, std::span<std::uint8_t> chunk);
Status hose_splice_to_socket(DataHose& hose, int socket_fd, std::size_t n, net::Millis timeout);
Status hose_splice_from_socket(int socket_fd, DataHose& hose, std::size_t n, net::Millis timeout);

// Buffered stand-ins for the memory<->pipe steps with identical loop
// contracts. Tests use these to drive the chunk state machine on hosts
// whose kernel rejects vmsplice.
Status hose_fill_buffered(DataHose& hose, std::span<const std::uint8_t> chunk);
Status hose_drain_buffered(DataHose& hose, std::span<std::uint8_t> chunk);

struct HoseCapability {
    bool available = false;
    std::string detail;  // why not, when unavailable
};

// One-time capability probe: runs a small vmsplice+splice round trip over
// a loopback TCP pair. Cached for the process lifetime.
const HoseCapability& hose_capability();

}  // namespace rr::transport
