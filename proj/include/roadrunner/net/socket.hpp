#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <utility>

#include "roadrunner/error.hpp"

namespace rr::net {

// Owning file descriptor.
class Fd {
public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    ~Fd() { reset(); }
    Fd(Fd&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
    Fd& operator=(Fd&& other) noexcept {
        if (this != &other) {
            reset();
            fd_ = std::exchange(other.fd_, -1);
        }
        return *this;
    }
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;

    int get() const { return fd_; }
    bool valid() const { return fd_ >= 0; }
    int release() { return std::exchange(fd_, -1); }
    void reset();

private:
    int fd_ = -1;
};

using Millis = std::chrono::milliseconds;

Result<Fd> unix_listen(const std::string& path, int backlog = 16);
Result<Fd> unix_connect(const std::string& path);

// host may be an IPv4 literal or a resolvable name; port 0 binds ephemeral.
Result<Fd> tcp_listen(const std::string& host, std::uint16_t port, int backlog = 16);
Result<Fd> tcp_connect(const std::string& host, std::uint16_t port, Millis timeout);
Result<std::uint16_t> local_port(int fd);
void set_nodelay(int fd);

// Accept with a deadline; returns an invalid Fd on timeout so callers can
// poll a stop flag between waits.
Result<Fd> accept_with_timeout(int listen_fd, Millis timeout);

// Blocking exact-count I/O with an overall deadline. EOF mid-read reports
// PeerUnreachable; deadline expiry reports Timeout.
Status read_full(int fd, std::span<std::uint8_t> buf, Millis timeout);
Status write_full(int fd, std::span<const std::uint8_t> buf, Millis timeout);

// Like read_full, but EOF before the first byte is a clean end-of-stream
// and returns false.
Result<bool> read_full_or_eof(int fd, std::span<std::uint8_t> buf, Millis timeout);

// Number of open descriptors in this process (for leak checks in tests).
int open_fd_count();

}  // namespace rr::net
